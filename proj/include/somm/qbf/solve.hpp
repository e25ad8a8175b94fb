#pragma once

// Embedded QBF evaluation by quantifier expansion.
//
// The circuit is evaluated recursively. Hitting a quantifier block, the
// solver eliminates its variables one at a time by substituting constants
// into the body, with three shortcuts before it resorts to branching:
//
//   - unit literals: for an existential block whose body is a conjunction, a
//     direct literal of a block variable forces that variable's value; dually
//     for a universal block over a disjunction. A literal of the opposite
//     polarity structure (existential over a disjunction, universal over a
//     conjunction) decides the whole block at once.
//   - vacuous variables: if substituting false and true yields the same gate,
//     the variable is eliminated without branching.
//   - constant folding: substitution runs through the smart constructors, so
//     bodies collapse as assignments accumulate.
//
// Substitution results and closed-gate values are cached. The gate pool of
// the input circuit grows during solving (hash-consing is append-only);
// existing gate ids stay valid.
//
// solve() reports a satisfying assignment for the outermost existential
// block when the instance is true and the root is existential.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <unordered_map>
#include <utility>
#include <vector>

#include "somm/error.hpp"
#include "somm/qbf/circuit.hpp"
#include "somm/qbf/simplify.hpp"

namespace somm::qbf {

struct TimeoutError : Error {
  TimeoutError() : Error("solver: time limit exceeded") {}
};

struct MemCapError : Error {
  MemCapError() : Error("solver: memory cap exceeded") {}
};

struct Limits {
  double timeout_seconds = 1800.0;
  std::uint64_t mem_cap_bytes = 4ull << 30;
  bool memoize = true;
};

struct SolveStats {
  std::uint64_t substitutions = 0;
  std::uint64_t branches = 0;
  std::uint64_t unit_props = 0;
  std::uint64_t vacuous_drops = 0;
  std::uint64_t memo_hits = 0;
  std::uint64_t peak_gates = 0;
  std::uint64_t elapsed_ms = 0;
};

struct SolveResult {
  bool value = false;
  // Assignment of the outermost existential block, ascending by variable id.
  // Filled only when value is true and the root gate is existential.
  // Variables the body stopped depending on may be omitted; their value does
  // not matter, so take false when reconstructing a relation.
  std::vector<std::pair<VarId, bool>> witness;
  SolveStats stats;
};

namespace detail {

class Solver {
 public:
  Solver(Circuit& c, const Limits& lim) : c_(c), lim_(lim) {
    start_ = std::chrono::steady_clock::now();
    deadline_ = start_ + std::chrono::duration_cast<
                             std::chrono::steady_clock::duration>(
                             std::chrono::duration<double>(lim.timeout_seconds));
  }

  SolveResult run(GateId root) {
    SolveResult res;
    const Gate& g = c_.gate(root);
    if (g.kind == GateKind::Exists) {
      res.value = eval_block(GateKind::Exists, g.list, g.a, &res.witness);
      if (!res.value) res.witness.clear();
      std::sort(res.witness.begin(), res.witness.end());
    } else {
      res.value = eval(root);
    }
    res.stats = stats_;
    res.stats.peak_gates = c_.gate_count();
    res.stats.elapsed_ms = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - start_)
            .count());
    return res;
  }

 private:
  using Assign = std::vector<std::pair<VarId, bool>>;

  void tick() {
    if ((++ticks_ & 255) != 1) return;
    if (std::chrono::steady_clock::now() >= deadline_) throw TimeoutError();
    // Map entries cost a node, bucket space and padding well beyond their
    // payload; charge them high so the cap trips before the machine does.
    std::uint64_t bytes = c_.approx_bytes() + 64 * subst_cache_.size() +
                          48 * memo_.size();
    if (bytes > lim_.mem_cap_bytes) throw MemCapError();
  }

  bool eval(GateId g) {
    tick();
    if (g == kFalse) return false;
    if (g == kTrue) return true;
    if (lim_.memoize) {
      auto it = memo_.find(g);
      if (it != memo_.end()) {
        ++stats_.memo_hits;
        return it->second;
      }
    }
    const Gate& gate = c_.gate(g);
    bool v = false;
    switch (gate.kind) {
      case GateKind::Var:
        throw Error("solver: free variable '" + c_.var(gate.a).origin() + "'");
      case GateKind::Not:
        v = !eval(gate.a);
        break;
      case GateKind::And: {
        v = true;
        // gate.list is copied: eval can grow the pool and move the gate.
        std::vector<GateId> kids = gate.list;
        for (GateId ch : kids)
          if (!eval(ch)) {
            v = false;
            break;
          }
        break;
      }
      case GateKind::Or: {
        v = false;
        std::vector<GateId> kids = gate.list;
        for (GateId ch : kids)
          if (eval(ch)) {
            v = true;
            break;
          }
        break;
      }
      case GateKind::Exists:
      case GateKind::Forall: {
        std::vector<VarId> vars = gate.list;
        v = eval_block(gate.kind, vars, gate.a, nullptr);
        break;
      }
      default:
        throw Error("solver: bad gate");
    }
    if (lim_.memoize) memo_[g] = v;
    return v;
  }

  // Eliminates the variables of one quantifier block, then evaluates what is
  // left of the body. `w`, when given, collects the assignment that made an
  // existential block true.
  bool eval_block(GateKind kind, std::vector<VarId> vars, GateId body,
                  Assign* w) {
    const bool exists = kind == GateKind::Exists;
    for (;;) {
      tick();
      if (body == kTrue || body == kFalse) break;
      const Gate& gb = c_.gate(body);
      // The body interval is exact enough to retire variables that can no
      // longer occur after earlier substitutions.
      {
        size_t kept = 0;
        for (VarId v : vars)
          if (v >= gb.var_lo && v < gb.var_hi) vars[kept++] = v;
        vars.resize(kept);
      }
      if (vars.empty()) break;

      // Literal scan over a conjunctive or disjunctive body. All forced
      // variables found in one scan are substituted in a single pass.
      forced_.clear();
      int scan = scan_literals(gb, vars, exists, forced_);
      if (scan > 0) {  // a literal decides the block
        if (w && exists && !forced_.empty()) w->push_back(forced_.front());
        return exists;
      }
      if (!forced_.empty()) {
        stats_.unit_props += forced_.size();
        for (const auto& [fv, fval] : forced_) {
          if (w) w->emplace_back(fv, fval);
          erase_var(vars, fv);
        }
        // A lone unit goes through the persistently cached path; only real
        // batches are worth a fresh single-pass rewrite.
        body = forced_.size() == 1
                   ? subst(body, forced_.front().first, forced_.front().second)
                   : subst_batch(body, forced_);
        continue;
      }

      VarId v = vars.front();
      GateId b0 = subst(body, v, false);
      erase_var(vars, v);
      ++stats_.branches;
      size_t mark = w ? w->size() : 0;
      if (w) w->emplace_back(v, false);
      // The true branch is not materialised until the false branch has
      // failed; on success its gates were never built.
      bool first = eval_block(kind, vars, b0, w);
      if (first == exists) return first;
      GateId b1 = subst(body, v, true);
      if (b0 == b1) {
        ++stats_.vacuous_drops;
        return first;
      }
      if (w) {
        w->resize(mark);
        w->emplace_back(v, true);
      }
      return eval_block(kind, vars, b1, w);
    }
    return eval(body);
  }

  // Returns +1 when a literal of a block variable decides the whole block
  // (its assignment, if useful for a witness, is the front of `forced`).
  // Otherwise fills `forced` with every variable the body's literals pin
  // down and returns 0.
  int scan_literals(const Gate& gb, const std::vector<VarId>& vars,
                    bool exists, Assign& forced) {
    const GateKind forcing = exists ? GateKind::And : GateKind::Or;
    const GateKind deciding = exists ? GateKind::Or : GateKind::And;
    if (gb.kind != forcing && gb.kind != deciding) return 0;
    for (GateId ch : gb.list) {
      const Gate& gc = c_.gate(ch);
      VarId v;
      bool positive;
      if (gc.kind == GateKind::Var) {
        v = gc.a;
        positive = true;
      } else if (gc.kind == GateKind::Not &&
                 c_.gate(gc.a).kind == GateKind::Var) {
        v = c_.gate(gc.a).a;
        positive = false;
      } else {
        continue;
      }
      if (!std::binary_search(vars.begin(), vars.end(), v)) continue;
      if (gb.kind == deciding) {
        // Or-rooted existential: satisfying the literal settles the block.
        forced.assign(1, {v, positive});
        return 1;
      }
      // And-rooted existential: the literal must hold. Or-rooted universal:
      // only the branch falsifying the literal is informative. Duplicate
      // occurrences are fine; complementary pairs cannot survive the smart
      // constructors.
      forced.emplace_back(v, exists ? positive : !positive);
    }
    if (!forced.empty()) {
      std::sort(forced.begin(), forced.end());
      forced.erase(std::unique(forced.begin(), forced.end()), forced.end());
    }
    return 0;
  }

  // One substitution pass applying a whole sorted assignment.
  GateId subst_batch(GateId g, const Assign& vals) {
    ++stats_.substitutions;
    batch_cache_.clear();
    return subst_batch_rec(g, vals);
  }

  GateId subst_batch_rec(GateId g, const Assign& vals) {
    if (g == kFalse || g == kTrue) return g;
    tick();
    {
      const Gate& gt = c_.gate(g);
      auto lo = std::lower_bound(vals.begin(), vals.end(),
                                 std::make_pair(gt.var_lo, false));
      if (lo == vals.end() || lo->first >= gt.var_hi) return g;
    }
    auto it = batch_cache_.find(g);
    if (it != batch_cache_.end()) return it->second;
    GateId out;
    const GateKind kind = c_.gate(g).kind;
    switch (kind) {
      case GateKind::Var: {
        const VarId v = c_.gate(g).a;
        auto at = std::lower_bound(vals.begin(), vals.end(),
                                   std::make_pair(v, false));
        if (at != vals.end() && at->first == v)
          out = c_.mk_const(at->second);
        else
          out = g;
        break;
      }
      case GateKind::Not:
        out = c_.mk_not(subst_batch_rec(c_.gate(g).a, vals));
        break;
      case GateKind::And:
      case GateKind::Or: {
        std::vector<GateId> kids = c_.gate(g).list;
        for (GateId& ch : kids) ch = subst_batch_rec(ch, vals);
        out = (kind == GateKind::And) ? c_.mk_and(std::move(kids))
                                      : c_.mk_or(std::move(kids));
        break;
      }
      case GateKind::Exists:
      case GateKind::Forall: {
        std::vector<VarId> vs = c_.gate(g).list;
        GateId body = subst_batch_rec(c_.gate(g).a, vals);
        out = c_.mk_quant(kind, std::move(vs), body);
        break;
      }
      default:
        throw Error("solver: bad gate");
    }
    batch_cache_.emplace(g, out);
    return out;
  }

  static void erase_var(std::vector<VarId>& vars, VarId v) {
    auto it = std::lower_bound(vars.begin(), vars.end(), v);
    if (it != vars.end() && *it == v) vars.erase(it);
  }

  GateId subst(GateId root, VarId v, bool val) {
    ++stats_.substitutions;
    return subst_rec(root, v, val);
  }

  GateId subst_rec(GateId g, VarId v, bool val) {
    if (g == kFalse || g == kTrue) return g;
    tick();
    const Gate* gate = &c_.gate(g);
    if (v < gate->var_lo || v >= gate->var_hi) return g;
    std::uint64_t key =
        (static_cast<std::uint64_t>(g) << 33) |
        (static_cast<std::uint64_t>(v) << 1) | (val ? 1u : 0u);
    auto it = subst_cache_.find(key);
    if (it != subst_cache_.end()) return it->second;
    GateId out;
    switch (gate->kind) {
      case GateKind::Var:
        out = c_.mk_const(val);
        break;
      case GateKind::Not:
        out = c_.mk_not(subst_rec(gate->a, v, val));
        break;
      case GateKind::And:
      case GateKind::Or: {
        GateKind kind = gate->kind;
        std::vector<GateId> kids = gate->list;
        std::vector<GateId> ops;
        ops.reserve(kids.size());
        for (GateId ch : kids) ops.push_back(subst_rec(ch, v, val));
        gate = nullptr;  // the pool may have moved
        out = (kind == GateKind::And) ? c_.mk_and(std::move(ops))
                                      : c_.mk_or(std::move(ops));
        break;
      }
      case GateKind::Exists:
      case GateKind::Forall: {
        GateKind kind = gate->kind;
        std::vector<VarId> vs = gate->list;
        GateId body = subst_rec(gate->a, v, val);
        gate = nullptr;
        out = c_.mk_quant(kind, std::move(vs), body);
        break;
      }
      default:
        throw Error("solver: bad gate");
    }
    subst_cache_.emplace(key, out);
    return out;
  }

  Circuit& c_;
  const Limits& lim_;
  SolveStats stats_;
  Assign forced_;
  std::unordered_map<std::uint64_t, GateId> subst_cache_;
  std::unordered_map<GateId, GateId> batch_cache_;
  std::unordered_map<GateId, bool> memo_;
  std::uint64_t ticks_ = 0;
  std::chrono::steady_clock::time_point start_;
  std::chrono::steady_clock::time_point deadline_;
};

}  // namespace detail

namespace detail {

// Substitution for the splitting driver below. Unlike the solver-internal
// version this one carries no persistent caches; the result is meant to be
// compacted right away.
inline GateId ground_var(Circuit& c, GateId g, VarId v, bool val,
                         std::unordered_map<GateId, GateId>& cache) {
  if (g == kFalse || g == kTrue) return g;
  {
    const Gate& gt = c.gate(g);
    if (v < gt.var_lo || v >= gt.var_hi) return g;
  }
  auto it = cache.find(g);
  if (it != cache.end()) return it->second;
  GateId out;
  const GateKind kind = c.gate(g).kind;
  switch (kind) {
    case GateKind::Var:
      out = c.mk_const(val);
      break;
    case GateKind::Not:
      out = c.mk_not(ground_var(c, c.gate(g).a, v, val, cache));
      break;
    case GateKind::And:
    case GateKind::Or: {
      std::vector<GateId> kids = c.gate(g).list;
      for (GateId& ch : kids) ch = ground_var(c, ch, v, val, cache);
      out = (kind == GateKind::And) ? c.mk_and(std::move(kids))
                                    : c.mk_or(std::move(kids));
      break;
    }
    case GateKind::Exists:
    case GateKind::Forall: {
      std::vector<VarId> vs = c.gate(g).list;
      GateId body = ground_var(c, c.gate(g).a, v, val, cache);
      out = c.mk_quant(kind, std::move(vs), body);
      break;
    }
    default:
      throw Error("solver: bad gate");
  }
  cache.emplace(g, out);
  return out;
}

inline void merge_stats(SolveStats& into, const SolveStats& part) {
  into.substitutions += part.substitutions;
  into.branches += part.branches;
  into.unit_props += part.unit_props;
  into.vacuous_drops += part.vacuous_drops;
  into.memo_hits += part.memo_hits;
  into.peak_gates = std::max(into.peak_gates, part.peak_gates);
}

// Alternating instances are decomposed at the root before the expansion
// solver sees them. Since every variable is bound by exactly one quantifier
// gate, the children of a root connective are closed subproblems; each is
// rebuilt into a fresh circuit and solved on its own, so the work of a
// finished branch is reclaimed instead of accumulating in one pool for the
// whole run. Root quantifier blocks are ground one variable at a time the
// same way.
//
// Decomposition continues while any universal gate is reachable; the
// expansion solver only ever sees purely existential residues. Distinct
// cofactors share almost no structure, so pooling them does not pay and
// isolating them keeps each branch's growth reclaimable. Gate counts say
// little about how hard an alternating circuit is, so the universal check
// is the whole heuristic. Should an expansion run outgrow the memory cap
// anyway, the grown pool is thrown away and the node is decomposed instead.
inline bool has_forall(const Circuit& c, GateId root) {
  if (root < 2) return false;
  std::vector<bool> seen(static_cast<size_t>(root) + 1, false);
  std::vector<GateId> stack{root};
  while (!stack.empty()) {
    const GateId g = stack.back();
    stack.pop_back();
    if (g < 2 || seen[g]) continue;
    seen[g] = true;
    const Gate& gt = c.gate(g);
    switch (gt.kind) {
      case GateKind::Forall:
        return true;
      case GateKind::Not:
      case GateKind::Exists:
        stack.push_back(gt.a);
        break;
      case GateKind::And:
      case GateKind::Or:
        for (GateId kid : gt.list) stack.push_back(kid);
        break;
      default:
        break;
    }
  }
  return false;
}

inline bool trace_enabled() {
  static const bool on = std::getenv("SOMM_SOLVE_TRACE") != nullptr;
  return on;
}

inline const char* kind_name(GateKind k) {
  switch (k) {
    case GateKind::False_:
    case GateKind::True_: return "const";
    case GateKind::Var: return "var";
    case GateKind::Not: return "not";
    case GateKind::And: return "and";
    case GateKind::Or: return "or";
    case GateKind::Exists: return "ex";
    case GateKind::Forall: return "all";
  }
  return "?";
}

inline SolveResult solve_steered(Qbf q, const Limits& lim,
                                 std::chrono::steady_clock::time_point deadline,
                                 bool top, int depth = 0) {
  const auto remaining = [&] {
    const double left = std::chrono::duration<double>(
                            deadline - std::chrono::steady_clock::now())
                            .count();
    if (left <= 0) throw TimeoutError();
    Limits sub = lim;
    sub.timeout_seconds = left;
    return sub;
  };

  SolveResult total;
  if (q.root == kFalse || q.root == kTrue) {
    total.value = q.root == kTrue;
    return total;
  }

  if (!has_forall(*q.circuit, q.root)) {
    if (trace_enabled())
      std::fprintf(stderr, "[solve] d=%d leaf  gates=%zu\n", depth,
                   q.circuit->gate_count());
    const Limits sub = remaining();
    try {
      Solver s(*q.circuit, sub);
      return s.run(q.root);
    } catch (const MemCapError&) {
      if (q.circuit->gate(q.root).kind == GateKind::Var) throw;
      // Drop the grown pool before decomposing.
      q = simplify(q);
      if (trace_enabled())
        std::fprintf(stderr, "[solve] d=%d capped, splitting gates=%zu\n",
                     depth, q.circuit->gate_count());
    }
  } else if (trace_enabled()) {
    std::fprintf(stderr, "[solve] d=%d %-5s gates=%zu\n", depth,
                 kind_name(q.circuit->gate(q.root).kind),
                 q.circuit->gate_count());
  }

  const Gate& root = q.circuit->gate(q.root);
  if (root.kind == GateKind::And || root.kind == GateKind::Or) {
    const bool conj = root.kind == GateKind::And;
    // Cheap children first: contradictions tend to live in the small ones.
    // Only the sizes are kept; each child is rebuilt when its turn comes, so
    // at most one grown child pool is alive at a time.
    std::vector<std::pair<size_t, GateId>> kids;
    kids.reserve(root.list.size());
    for (GateId kid : root.list)
      kids.emplace_back(simplify(Qbf{q.circuit, kid}).circuit->gate_count(),
                        kid);
    std::stable_sort(kids.begin(), kids.end(),
                     [](const auto& a, const auto& b) {
                       return a.first < b.first;
                     });
    total.value = conj;
    for (const auto& [size, kid] : kids) {
      SolveResult r = solve_steered(simplify(Qbf{q.circuit, kid}), lim,
                                    deadline, false, depth + 1);
      merge_stats(total.stats, r.stats);
      if (r.value != conj) {
        total.value = r.value;
        break;
      }
    }
  } else if (root.kind == GateKind::Not) {
    SolveResult r =
        solve_steered(simplify(Qbf{q.circuit, root.a}), lim, deadline, false,
                      depth + 1);
    total.stats = r.stats;
    total.value = !r.value;
  } else {
    // Interning new gates can move the pool; the root gate is copied out
    // before any grounding happens.
    const GateKind rkind = root.kind;
    const bool exists = rkind == GateKind::Exists;
    const VarId v = root.list.front();
    std::vector<VarId> rest(root.list.begin() + 1, root.list.end());
    GateId branch_root[2];
    for (int i = 0; i < 2; ++i) {
      std::unordered_map<GateId, GateId> cache;
      GateId body = ground_var(*q.circuit, q.root, v, i == 1, cache);
      // ground_var rewrote the block gate itself; rebind what is left in
      // case the block collapsed.
      const GateKind bkind = (body == kFalse || body == kTrue)
                                 ? GateKind::False_
                                 : q.circuit->gate(body).kind;
      branch_root[i] =
          bkind == rkind ? body : q.circuit->mk_quant(rkind, rest, body);
    }
    const int n_branches = branch_root[0] == branch_root[1] ? 1 : 2;
    total.value = !exists;
    for (int i = 0; i < n_branches; ++i) {
      SolveResult r = solve_steered(simplify(Qbf{q.circuit, branch_root[i]}),
                                    lim, deadline, top, depth + 1);
      merge_stats(total.stats, r.stats);
      if (r.value == exists) {
        total.value = r.value;
        if (top && exists) {
          total.witness = std::move(r.witness);
          total.witness.emplace_back(v, i == 1);
        }
        break;
      }
    }
  }

  return total;
}

}  // namespace detail

inline SolveResult solve(const Qbf& q, const Limits& lim = {}) {
  const auto start = std::chrono::steady_clock::now();
  const auto deadline =
      start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                  std::chrono::duration<double>(lim.timeout_seconds));
  // Shared caches make whole-instance expansion the fastest route whenever
  // the instance fits in memory, so it goes first, on a private copy whose
  // pool can be released if it does not fit. Only then is the instance
  // decomposed.
  SolveResult res;
  try {
    Qbf mine = simplify(q);
    detail::Solver s(*mine.circuit, lim);
    res = s.run(mine.root);
  } catch (const MemCapError&) {
    if (detail::trace_enabled())
      std::fprintf(stderr, "[solve] whole-instance pass capped, splitting\n");
    res = detail::solve_steered(simplify(q), lim, deadline, true);
  }
  std::sort(res.witness.begin(), res.witness.end());
  res.stats.elapsed_ms = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - start)
          .count());
  return res;
}

}  // namespace somm::qbf
