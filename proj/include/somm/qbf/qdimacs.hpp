#pragma once

// QDIMACS output and a reader for round trips.
//
// The circuit is first put in negation normal form (quantifier kinds flip
// under negation) while the quantifier blocks are collected in preorder;
// variables are bound once each, so pulling blocks to the front in that
// order preserves every dependency. The quantifier-free matrix is then
// clausified the Tseitin way, one definition variable per connective gate.
// Definition variables land in the innermost existential block, or in a new
// trailing one when the prefix ends universally. A formula without
// universal blocks prints without quantifier lines at all, which makes the
// file plain DIMACS for SAT solvers.
//
// The reader accepts the emitted shape: a p-line, optional e/a lines, then
// clauses. Variables outside every block are read as outermost
// existentials, the usual DIMACS meaning.

#include <cstdint>
#include <cstdlib>
#include <memory>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "somm/error.hpp"
#include "somm/qbf/circuit.hpp"
#include "somm/qbf/simplify.hpp"

namespace somm::qbf {

namespace detail {

struct Prenex {
  std::shared_ptr<Circuit> circuit;       // holds the rewritten matrix
  GateId matrix = kFalse;                 // quantifier-free
  std::vector<std::pair<GateKind, std::vector<VarId>>> blocks;
};

// NNF rewrite that strips quantifier gates, logging their blocks outermost
// first. Shared gates are rewritten once per polarity; after the rewrite
// every context is monotone, so a block shared between same-polarity
// occurrences stays sound.
inline Prenex prenex(const Qbf& q) {
  const Circuit& src = *q.circuit;
  Prenex out;
  out.circuit = fresh_with_vars(src);
  Circuit& dst = *out.circuit;
  std::vector<char> recorded(src.var_count(), 0);

  std::unordered_map<std::uint64_t, GateId> memo;
  const auto key = [](GateId g, bool pol) {
    return (static_cast<std::uint64_t>(g) << 1) | (pol ? 1u : 0u);
  };

  // Explicit stack; frames run twice, first to queue children, then to
  // build. Quantifier blocks are recorded on the first visit so outer
  // blocks precede inner ones.
  struct Frame {
    GateId g;
    bool pol;
    bool ready = false;
  };
  std::vector<Frame> stack{{q.root, true}};
  while (!stack.empty()) {
    // Pushing children may move the stack; work from copies.
    const GateId g = stack.back().g;
    const bool pol = stack.back().pol;
    const bool ready = stack.back().ready;
    const std::uint64_t k = key(g, pol);
    if (memo.count(k)) {
      stack.pop_back();
      continue;
    }
    const Gate& gt = src.gate(g);
    if (!ready) {
      stack.back().ready = true;
      switch (gt.kind) {
        case GateKind::Not:
          stack.push_back({gt.a, !pol});
          break;
        case GateKind::And:
        case GateKind::Or:
          for (size_t i = gt.list.size(); i-- > 0;)
            stack.push_back({gt.list[i], pol});
          break;
        case GateKind::Exists:
        case GateKind::Forall: {
          const bool ex = (gt.kind == GateKind::Exists) == pol;
          for (VarId v : gt.list) {
            if (recorded[v])
              throw FormatError("qdimacs: variable bound twice");
            recorded[v] = 1;
          }
          out.blocks.emplace_back(ex ? GateKind::Exists : GateKind::Forall,
                                  gt.list);
          stack.push_back({gt.a, pol});
          break;
        }
        default:
          break;
      }
      continue;
    }
    GateId r;
    switch (gt.kind) {
      case GateKind::False_:
        r = pol ? kFalse : kTrue;
        break;
      case GateKind::True_:
        r = pol ? kTrue : kFalse;
        break;
      case GateKind::Var:
        r = dst.mk_var(gt.a);
        if (!pol) r = dst.mk_not(r);
        break;
      case GateKind::Not:
        r = memo.at(key(gt.a, !pol));
        break;
      case GateKind::And:
      case GateKind::Or: {
        std::vector<GateId> ops;
        ops.reserve(gt.list.size());
        for (GateId c : gt.list) ops.push_back(memo.at(key(c, pol)));
        const bool conj = (gt.kind == GateKind::And) == pol;
        r = conj ? dst.mk_and(std::move(ops)) : dst.mk_or(std::move(ops));
        break;
      }
      default:  // quantifier: the block is already out front
        r = memo.at(key(gt.a, pol));
        break;
    }
    memo.emplace(k, r);
    stack.pop_back();
  }

  out.matrix = memo.at(key(q.root, true));

  // Merge adjacent blocks of one kind; drop variables the matrix lost to
  // folding so the header stays tight.
  std::vector<char> used = used_vars(dst, out.matrix);
  std::vector<std::pair<GateKind, std::vector<VarId>>> merged;
  for (auto& [kind, vs] : out.blocks) {
    std::vector<VarId> kept;
    for (VarId v : vs)
      if (used[v]) kept.push_back(v);
    if (kept.empty()) continue;
    if (!merged.empty() && merged.back().first == kind)
      merged.back().second.insert(merged.back().second.end(), kept.begin(),
                                  kept.end());
    else
      merged.emplace_back(kind, std::move(kept));
  }
  out.blocks = std::move(merged);
  return out;
}

}  // namespace detail

inline std::string write_qdimacs(const Qbf& q) {
  detail::Prenex p = detail::prenex(q);
  const Circuit& c = *p.circuit;

  if (p.matrix == kTrue) return "p cnf 0 0\n";
  if (p.matrix == kFalse) return "p cnf 0 1\n0\n";

  // DIMACS numbers: prefix variables in block order, then one definition
  // variable per connective gate, assigned bottom-up.
  std::vector<int> var_num(c.var_count(), 0);
  int next = 1;
  for (const auto& [kind, vs] : p.blocks)
    for (VarId v : vs) var_num[v] = next++;
  const int first_aux = next;

  std::vector<int> gate_num(c.gate_count(), 0);
  std::vector<std::vector<int>> clauses;
  const auto lit = [&](GateId g) -> int {
    bool neg = false;
    if (c.gate(g).kind == GateKind::Not) {
      neg = true;
      g = c.gate(g).a;
    }
    int n = c.gate(g).kind == GateKind::Var ? var_num[c.gate(g).a]
                                            : gate_num[g];
    if (n == 0) throw FormatError("qdimacs: unbound variable in matrix");
    return neg ? -n : n;
  };

  // Post-order over the matrix; children are numbered before parents.
  std::vector<std::pair<GateId, bool>> stack{{p.matrix, false}};
  std::vector<bool> done(c.gate_count(), false);
  while (!stack.empty()) {
    auto [g, ready] = stack.back();
    stack.pop_back();
    if (done[g]) continue;
    const Gate& gt = c.gate(g);
    if (gt.kind == GateKind::Var) {
      done[g] = true;
      continue;
    }
    if (gt.kind == GateKind::Not) {
      if (!ready) {
        stack.emplace_back(g, true);
        stack.emplace_back(gt.a, false);
      } else {
        done[g] = true;
      }
      continue;
    }
    if (!ready) {
      stack.emplace_back(g, true);
      for (size_t i = gt.list.size(); i-- > 0;)
        stack.emplace_back(gt.list[i], false);
      continue;
    }
    done[g] = true;
    gate_num[g] = next++;
    const int me = gate_num[g];
    // me <-> and(l1..lk): (-me l1) ... (-me lk) (me -l1 ... -lk); or dual.
    std::vector<int> big{gt.kind == GateKind::And ? me : -me};
    for (GateId ch : gt.list) {
      const int l = lit(ch);
      clauses.push_back(gt.kind == GateKind::And ? std::vector<int>{-me, l}
                                                 : std::vector<int>{me, -l});
      big.push_back(gt.kind == GateKind::And ? -l : l);
    }
    clauses.push_back(std::move(big));
  }
  clauses.push_back({lit(p.matrix)});

  const int n_aux = next - first_aux;
  std::string out = "p cnf " + std::to_string(next - 1) + " " +
                    std::to_string(clauses.size()) + "\n";
  const bool any_forall = [&] {
    for (const auto& [kind, vs] : p.blocks)
      if (kind == GateKind::Forall) return true;
    return false;
  }();
  if (any_forall) {
    for (size_t i = 0; i < p.blocks.size(); ++i) {
      const auto& [kind, vs] = p.blocks[i];
      out += kind == GateKind::Forall ? "a" : "e";
      for (VarId v : vs) out += " " + std::to_string(var_num[v]);
      // Definition variables join the innermost existential block.
      if (i + 1 == p.blocks.size() && kind == GateKind::Exists)
        for (int x = 0; x < n_aux; ++x)
          out += " " + std::to_string(first_aux + x);
      out += " 0\n";
    }
    if (p.blocks.back().first == GateKind::Forall && n_aux > 0) {
      out += "e";
      for (int x = 0; x < n_aux; ++x)
        out += " " + std::to_string(first_aux + x);
      out += " 0\n";
    }
  }
  for (const auto& cl : clauses) {
    for (size_t i = 0; i < cl.size(); ++i)
      out += (i ? " " : "") + std::to_string(cl[i]);
    out += " 0\n";
  }
  return out;
}

inline Qbf read_qdimacs(const std::string& text) {
  auto circuit = std::make_shared<Circuit>();
  std::vector<VarId> vars;  // DIMACS number -> VarId, 1-based
  std::vector<char> in_block;
  const auto var_of = [&](int n) {
    if (n <= 0 || static_cast<size_t>(n) >= vars.size())
      throw FormatError("qdimacs: variable beyond header count");
    return vars[static_cast<size_t>(n)];
  };

  std::vector<std::pair<GateKind, std::vector<VarId>>> blocks;
  std::vector<GateId> clause_gates;
  std::vector<GateId> cur;
  bool have_header = false;
  long declared_clauses = -1;

  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok) || tok == "c") continue;
    if (tok == "p") {
      std::string fmt;
      long nv = -1, nc = -1;
      if (!(ls >> fmt >> nv >> nc) || fmt != "cnf" || nv < 0 || nc < 0)
        throw FormatError("qdimacs: bad p line");
      have_header = true;
      declared_clauses = nc;
      vars.assign(static_cast<size_t>(nv) + 1, 0);
      in_block.assign(static_cast<size_t>(nv) + 1, 0);
      for (long i = 1; i <= nv; ++i)
        vars[static_cast<size_t>(i)] =
            circuit->new_var("v" + std::to_string(i));
      continue;
    }
    if (!have_header) throw FormatError("qdimacs: clause before p line");
    if (tok == "e" || tok == "a") {
      std::vector<VarId> vs;
      long n;
      while (ls >> n && n != 0) {
        if (n < 0) throw FormatError("qdimacs: negative quantifier variable");
        if (in_block[static_cast<size_t>(n)])
          throw FormatError("qdimacs: variable quantified twice");
        in_block[static_cast<size_t>(n)] = 1;
        vs.push_back(var_of(static_cast<int>(n)));
      }
      blocks.emplace_back(tok == "a" ? GateKind::Forall : GateKind::Exists,
                          std::move(vs));
      continue;
    }
    // Clause literals; a clause may span lines until its 0.
    long n;
    try {
      n = std::stol(tok);
    } catch (const std::exception&) {
      throw FormatError("qdimacs: expected a literal, got '" + tok + "'");
    }
    do {
      if (n == 0) {
        clause_gates.push_back(circuit->mk_or(std::move(cur)));
        cur.clear();
      } else {
        GateId v = circuit->mk_var(var_of(static_cast<int>(std::labs(n))));
        cur.push_back(n < 0 ? circuit->mk_not(v) : v);
      }
    } while (ls >> n);
  }
  if (!cur.empty()) throw FormatError("qdimacs: unterminated clause");
  if (declared_clauses >= 0 &&
      static_cast<long>(clause_gates.size()) != declared_clauses)
    throw FormatError("qdimacs: clause count differs from header");

  GateId root = circuit->mk_and(std::move(clause_gates));
  // Unquantified variables are outermost existentials.
  std::vector<VarId> free;
  for (size_t n = 1; n < vars.size(); ++n)
    if (!in_block[n]) free.push_back(vars[n]);
  for (auto it = blocks.rbegin(); it != blocks.rend(); ++it)
    root = circuit->mk_quant(it->first, it->second, root);
  if (!free.empty()) root = circuit->mk_quant(GateKind::Exists, free, root);
  return Qbf{std::move(circuit), root};
}

}  // namespace somm::qbf
