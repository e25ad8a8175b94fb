#pragma once

// Reference evaluator for second-order formulas over finite structures.
//
// This is the trusted-but-slow path: it follows the satisfaction relation
// clause by clause. First-order quantifiers loop over the universe.
// Second-order quantifiers of arity k enumerate all 2^(n^k) subsets of the
// tuple universe, by increasing cardinality and lexicographically within a
// cardinality, so that witnesses are found in a reproducible order and small
// witnesses are found early.
//
// Work is metered in clause evaluations. When the budget runs out the result
// is Infeasible, never a guess.

#include <cstdint>
#include <string>
#include <vector>

#include "somm/error.hpp"
#include "somm/so/formula.hpp"
#include "somm/so/structure.hpp"

namespace somm::oracle {

struct Budget {
  std::uint64_t max_evals = 20'000'000;
};

enum class Verdict { True, False, Infeasible };

struct Result {
  Verdict verdict = Verdict::Infeasible;
  std::uint64_t evals = 0;

  bool is_true() const { return verdict == Verdict::True; }
  bool is_false() const { return verdict == Verdict::False; }
  bool infeasible() const { return verdict == Verdict::Infeasible; }
};

namespace detail {

struct BudgetHit {};

class Evaluator {
 public:
  Evaluator(const so::RelStructure& rs, Budget budget)
      : rs_(rs), budget_(budget) {}

  std::uint64_t evals = 0;

  bool eval(const so::Formula& f, so::Environment& env) {
    if (++evals > budget_.max_evals) throw BudgetHit{};
    using so::Conn;
    switch (f->conn) {
      case Conn::Atom:
        return eval_atom(f, env);
      case Conn::Not:
        return !eval(f->kids[0], env);
      case Conn::And:
        for (const auto& k : f->kids)
          if (!eval(k, env)) return false;
        return true;
      case Conn::Or:
        for (const auto& k : f->kids)
          if (eval(k, env)) return true;
        return false;
      case Conn::Implies:
        return !eval(f->kids[0], env) || eval(f->kids[1], env);
      case Conn::Iff:
        return eval(f->kids[0], env) == eval(f->kids[1], env);
      case Conn::Nand:
        return !(eval(f->kids[0], env) && eval(f->kids[1], env));
      case Conn::ForallFo:
        return eval_fo_quant(true, f, env);
      case Conn::ExistsFo:
        return eval_fo_quant(false, f, env);
      case Conn::ForallSo:
        return eval_so_quant(true, f, env);
      case Conn::ExistsSo:
        return eval_so_quant(false, f, env);
    }
    throw Error("oracle: bad connective");
  }

 private:
  bool eval_atom(const so::Formula& f, so::Environment& env) {
    std::vector<int> tup;
    tup.reserve(f->terms.size());
    for (const so::Term& t : f->terms) {
      if (t.is_var()) {
        auto it = env.fo.find(t.name);
        if (it == env.fo.end())
          throw Error("oracle: unbound variable '" + t.name + "'");
        tup.push_back(it->second);
      } else {
        tup.push_back(rs_.constant(t.name));
      }
    }
    const so::Relation* rel = nullptr;
    if (f->pred.is_so_var()) {
      auto it = env.so.find(f->pred.name);
      if (it == env.so.end())
        throw Error("oracle: unbound second-order variable '" + f->pred.name +
                    "'");
      rel = &it->second;
    } else {
      rel = &rs_.relation(f->pred.name);
    }
    if (rel->arity != static_cast<int>(tup.size()))
      throw Error("oracle: arity mismatch at '" + f->pred.name + "'");
    return rel->contains(tup);
  }

  bool eval_fo_quant(bool is_forall, const so::Formula& f,
                     so::Environment& env) {
    auto prev = env.fo.find(f->var);
    bool had = prev != env.fo.end();
    int saved = had ? prev->second : 0;
    bool result = is_forall;
    for (int e = 0; e < rs_.size(); ++e) {
      env.fo[f->var] = e;
      bool v = eval(f->kids[0], env);
      if (v != is_forall) {
        result = v;
        break;
      }
    }
    if (had)
      env.fo[f->var] = saved;
    else
      env.fo.erase(f->var);
    return result;
  }

  bool eval_so_quant(bool is_forall, const so::Formula& f,
                     so::Environment& env) {
    const std::uint64_t m = tuple_count(f->arity);
    std::vector<std::vector<int>> universe = tuple_universe(f->arity, m);

    auto prev = env.so.find(f->var);
    bool had = prev != env.so.end();
    so::Relation saved;
    if (had) saved = prev->second;

    bool result = is_forall;
    bool done = false;
    std::vector<std::uint64_t> idx;
    for (std::uint64_t card = 0; card <= m && !done; ++card) {
      idx.resize(card);
      for (std::uint64_t i = 0; i < card; ++i) idx[i] = i;
      for (;;) {
        if (++evals > budget_.max_evals) {
          restore_so(env, f->var, had, saved);
          throw BudgetHit{};
        }
        so::Relation rel{f->arity, {}};
        for (std::uint64_t i : idx) rel.tuples.insert(universe[i]);
        env.so[f->var] = std::move(rel);
        bool v = eval(f->kids[0], env);
        if (v != is_forall) {
          result = v;
          done = true;
          break;
        }
        // Next index combination in lexicographic order.
        std::int64_t i = static_cast<std::int64_t>(card) - 1;
        while (i >= 0 && idx[i] == m - card + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (std::uint64_t j = i + 1; j < card; ++j) idx[j] = idx[j - 1] + 1;
      }
    }
    restore_so(env, f->var, had, saved);
    return result;
  }

  static void restore_so(so::Environment& env, const std::string& var,
                         bool had, const so::Relation& saved) {
    if (had)
      env.so[var] = saved;
    else
      env.so.erase(var);
  }

  std::uint64_t tuple_count(int arity) const {
    std::uint64_t m = 1;
    for (int i = 0; i < arity; ++i) {
      m *= static_cast<std::uint64_t>(rs_.size());
      if (m > kMaxTuples) throw BudgetHit{};
    }
    return m;
  }

  std::vector<std::vector<int>> tuple_universe(int arity,
                                               std::uint64_t m) const {
    std::vector<std::vector<int>> out;
    out.reserve(m);
    std::vector<int> t(arity, 0);
    for (;;) {
      out.push_back(t);
      int i = arity - 1;
      while (i >= 0 && t[i] == rs_.size() - 1) t[i--] = 0;
      if (i < 0) break;
      ++t[i];
    }
    return out;
  }

  // Tuple universes past this size cannot be enumerated within any sensible
  // budget, and materializing them would dominate memory.
  static constexpr std::uint64_t kMaxTuples = 4'000'000;

  const so::RelStructure& rs_;
  Budget budget_;
};

}  // namespace detail

// Evaluate under an initial environment (useful for checking open formulas
// against hand-picked bindings).
inline Result check_in(const so::RelStructure& rs, const so::Formula& f,
                       so::Environment env, Budget budget = {}) {
  detail::Evaluator ev(rs, budget);
  try {
    bool v = ev.eval(f, env);
    return {v ? Verdict::True : Verdict::False, ev.evals};
  } catch (detail::BudgetHit) {
    return {Verdict::Infeasible, ev.evals};
  }
}

inline Result check(const so::RelStructure& rs, const so::Formula& f,
                    Budget budget = {}) {
  return check_in(rs, f, so::Environment{}, budget);
}

}  // namespace somm::oracle
