#pragma once

// Translation of second-order sentences over a fixed finite structure into
// quantified boolean circuits.
//
// First-order quantifiers are expanded eagerly into conjunctions or
// disjunctions over the universe. A second-order quantifier of arity k
// becomes a quantifier block of |A|^k fresh boolean variables, one per
// tuple in row-major order. An atom over a second-order variable picks the
// boolean for its tuple; an atom over a structure relation folds to a
// constant: true when the tuple is in the relation, false otherwise.
// Structural sharing in the circuit keeps the repeated subformulas that the
// expansion produces from being rebuilt.

#include <map>
#include <string>
#include <vector>

#include "somm/error.hpp"
#include "somm/qbf/circuit.hpp"
#include "somm/so/formula.hpp"
#include "somm/so/structure.hpp"

namespace somm::qbf {

namespace detail {

class Translator {
 public:
  Translator(const so::RelStructure& rs, Circuit& circ)
      : rs_(rs), circ_(circ) {}

  GateId tr(const so::Formula& f) {
    using so::Conn;
    switch (f->conn) {
      case Conn::Atom:
        return tr_atom(f);
      case Conn::Not:
        return circ_.mk_not(tr(f->kids[0]));
      case Conn::And: {
        std::vector<GateId> ops;
        ops.reserve(f->kids.size());
        for (const auto& k : f->kids) ops.push_back(tr(k));
        return circ_.mk_and(std::move(ops));
      }
      case Conn::Or: {
        std::vector<GateId> ops;
        ops.reserve(f->kids.size());
        for (const auto& k : f->kids) ops.push_back(tr(k));
        return circ_.mk_or(std::move(ops));
      }
      case Conn::Implies: {
        GateId a = tr(f->kids[0]);
        GateId b = tr(f->kids[1]);
        return circ_.mk_or(circ_.mk_not(a), b);
      }
      case Conn::Iff: {
        GateId a = tr(f->kids[0]);
        GateId b = tr(f->kids[1]);
        return circ_.mk_and(circ_.mk_or(circ_.mk_not(a), b),
                            circ_.mk_or(circ_.mk_not(b), a));
      }
      case Conn::Nand:
        return circ_.mk_not(
            circ_.mk_and(tr(f->kids[0]), tr(f->kids[1])));
      case Conn::ForallFo:
      case Conn::ExistsFo: {
        std::vector<GateId> ops;
        ops.reserve(rs_.size());
        auto saved = save_fo(f->var);
        for (int e = 0; e < rs_.size(); ++e) {
          fo_[f->var] = e;
          ops.push_back(tr(f->kids[0]));
        }
        restore_fo(f->var, saved);
        return f->conn == Conn::ForallFo ? circ_.mk_and(std::move(ops))
                                         : circ_.mk_or(std::move(ops));
      }
      case Conn::ForallSo:
      case Conn::ExistsSo: {
        SoBinding b;
        b.arity = f->arity;
        b.base = static_cast<VarId>(circ_.var_count());
        std::uint64_t m = 1;
        for (int i = 0; i < f->arity; ++i)
          m *= static_cast<std::uint64_t>(rs_.size());
        std::vector<VarId> vars;
        vars.reserve(m);
        std::vector<int> t(f->arity, 0);
        for (std::uint64_t r = 0; r < m; ++r) {
          vars.push_back(circ_.new_var(f->var, t));
          for (int i = f->arity - 1; i >= 0; --i) {
            if (++t[i] < rs_.size()) break;
            t[i] = 0;
          }
        }
        so_[f->var].push_back(b);
        GateId body = tr(f->kids[0]);
        so_[f->var].pop_back();
        return circ_.mk_quant(f->conn == Conn::ForallSo ? GateKind::Forall
                                                        : GateKind::Exists,
                              std::move(vars), body);
      }
    }
    throw Error("translate: bad connective");
  }

 private:
  struct SoBinding {
    int arity = 0;
    VarId base = 0;
  };

  GateId tr_atom(const so::Formula& f) {
    std::vector<int> tup;
    tup.reserve(f->terms.size());
    for (const so::Term& t : f->terms) {
      if (t.is_var()) {
        auto it = fo_.find(t.name);
        if (it == fo_.end())
          throw Error("translate: unbound variable '" + t.name +
                      "' (sentences only)");
        tup.push_back(it->second);
      } else {
        tup.push_back(rs_.constant(t.name));
      }
    }
    if (f->pred.is_so_var()) {
      auto it = so_.find(f->pred.name);
      if (it == so_.end() || it->second.empty())
        throw Error("translate: unbound second-order variable '" +
                    f->pred.name + "' (sentences only)");
      const SoBinding& b = it->second.back();
      if (b.arity != static_cast<int>(tup.size()))
        throw Error("translate: arity mismatch at '" + f->pred.name + "'");
      std::uint64_t rank = 0;
      for (int e : tup)
        rank = rank * static_cast<std::uint64_t>(rs_.size()) +
               static_cast<std::uint64_t>(e);
      return circ_.mk_var(b.base + static_cast<VarId>(rank));
    }
    const so::Relation& rel = rs_.relation(f->pred.name);
    if (rel.arity != static_cast<int>(tup.size()))
      throw Error("translate: arity mismatch at '" + f->pred.name + "'");
    return circ_.mk_const(rel.contains(tup));
  }

  std::pair<bool, int> save_fo(const std::string& v) {
    auto it = fo_.find(v);
    if (it == fo_.end()) return {false, 0};
    return {true, it->second};
  }
  void restore_fo(const std::string& v, std::pair<bool, int> saved) {
    if (saved.first)
      fo_[v] = saved.second;
    else
      fo_.erase(v);
  }

  const so::RelStructure& rs_;
  Circuit& circ_;
  std::map<std::string, int> fo_;
  std::map<std::string, std::vector<SoBinding>> so_;
};

}  // namespace detail

inline Qbf translate(const so::RelStructure& rs, const so::Formula& f) {
  Qbf q;
  q.circuit = std::make_shared<Circuit>();
  detail::Translator t(rs, *q.circuit);
  q.root = t.tr(f);
  return q;
}

}  // namespace somm::qbf
