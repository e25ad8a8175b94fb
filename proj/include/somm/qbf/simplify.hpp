#pragma once

// Circuit cleanup passes.
//
// `rebuild` copies a circuit bottom-up through the smart constructors, which
// re-applies constant folding, flattening, duplicate and complement removal,
// and interval-based dropping of quantified variables. `simplify` runs a
// rebuild and then, if any reachable quantifier block still binds a variable
// with no occurrence anywhere in the result, a second rebuild that filters
// those variables exactly.
//
// Rebuilds are iterative; gate pools can be large and DAG paths long enough
// that recursion is not safe.

#include <limits>
#include <memory>
#include <vector>

#include "somm/qbf/circuit.hpp"

namespace somm::qbf {

inline GateId rebuild(const Circuit& src, GateId root, Circuit& dst,
                      const std::vector<char>* keep_var = nullptr) {
  constexpr GateId kNone = std::numeric_limits<GateId>::max();
  std::vector<GateId> memo(src.gate_count(), kNone);
  memo[kFalse] = kFalse;
  memo[kTrue] = kTrue;
  std::vector<GateId> stack{root};
  while (!stack.empty()) {
    GateId g = stack.back();
    if (memo[g] != kNone) {
      stack.pop_back();
      continue;
    }
    const Gate& gate = src.gate(g);
    switch (gate.kind) {
      case GateKind::Var:
        memo[g] = dst.mk_var(gate.a);
        stack.pop_back();
        break;
      case GateKind::Not:
        if (memo[gate.a] == kNone) {
          stack.push_back(gate.a);
          break;
        }
        memo[g] = dst.mk_not(memo[gate.a]);
        stack.pop_back();
        break;
      case GateKind::And:
      case GateKind::Or: {
        bool ready = true;
        for (GateId c : gate.list)
          if (memo[c] == kNone) {
            stack.push_back(c);
            ready = false;
          }
        if (!ready) break;
        std::vector<GateId> ops;
        ops.reserve(gate.list.size());
        for (GateId c : gate.list) ops.push_back(memo[c]);
        memo[g] = (gate.kind == GateKind::And) ? dst.mk_and(std::move(ops))
                                               : dst.mk_or(std::move(ops));
        stack.pop_back();
        break;
      }
      case GateKind::Exists:
      case GateKind::Forall: {
        if (memo[gate.a] == kNone) {
          stack.push_back(gate.a);
          break;
        }
        std::vector<VarId> vs;
        vs.reserve(gate.list.size());
        for (VarId v : gate.list)
          if (!keep_var || (*keep_var)[v]) vs.push_back(v);
        memo[g] = dst.mk_quant(gate.kind, std::move(vs), memo[gate.a]);
        stack.pop_back();
        break;
      }
      default:  // constants were seeded into memo
        stack.pop_back();
        break;
    }
  }
  return memo[root];
}

// Variables with at least one Var gate reachable from `root`.
inline std::vector<char> used_vars(const Circuit& c, GateId root) {
  std::vector<char> seen(c.gate_count(), 0);
  std::vector<char> used(c.var_count(), 0);
  std::vector<GateId> stack{root};
  while (!stack.empty()) {
    GateId g = stack.back();
    stack.pop_back();
    if (seen[g]) continue;
    seen[g] = 1;
    const Gate& gate = c.gate(g);
    switch (gate.kind) {
      case GateKind::Var:
        used[gate.a] = 1;
        break;
      case GateKind::Not:
      case GateKind::Exists:
      case GateKind::Forall:
        stack.push_back(gate.a);
        break;
      case GateKind::And:
      case GateKind::Or:
        for (GateId ch : gate.list) stack.push_back(ch);
        break;
      default:
        break;
    }
  }
  return used;
}

namespace detail {

inline bool binds_unused(const Circuit& c, GateId root,
                         const std::vector<char>& used) {
  std::vector<char> seen(c.gate_count(), 0);
  std::vector<GateId> stack{root};
  while (!stack.empty()) {
    GateId g = stack.back();
    stack.pop_back();
    if (seen[g]) continue;
    seen[g] = 1;
    const Gate& gate = c.gate(g);
    switch (gate.kind) {
      case GateKind::Exists:
      case GateKind::Forall:
        for (VarId v : gate.list)
          if (!used[v]) return true;
        stack.push_back(gate.a);
        break;
      case GateKind::Not:
        stack.push_back(gate.a);
        break;
      case GateKind::And:
      case GateKind::Or:
        for (GateId ch : gate.list) stack.push_back(ch);
        break;
      default:
        break;
    }
  }
  return false;
}

inline std::shared_ptr<Circuit> fresh_with_vars(const Circuit& src) {
  auto out = std::make_shared<Circuit>();
  for (const VarInfo& vi : src.vars()) out->new_var(vi.name, vi.tuple);
  return out;
}

}  // namespace detail

inline Qbf simplify(const Qbf& q) {
  auto c1 = detail::fresh_with_vars(*q.circuit);
  GateId r1 = rebuild(*q.circuit, q.root, *c1);
  std::vector<char> used = used_vars(*c1, r1);
  if (!detail::binds_unused(*c1, r1, used)) return Qbf{c1, r1};
  auto c2 = detail::fresh_with_vars(*c1);
  GateId r2 = rebuild(*c1, r1, *c2, &used);
  return Qbf{c2, r2};
}

}  // namespace somm::qbf
