#pragma once

// Quantified boolean circuits. Gates live in a pool owned by a Circuit and
// are identified by index; structurally identical gates are shared
// (hash-consed), which both deduplicates the expansion work of the
// translation and lets solver caches key on gate identity.
//
// Gate 0 is constant false, gate 1 constant true. Smart constructors fold
// constants, flatten nested and/or, drop duplicate operands, and detect
// complementary pairs, so a gate never holds a trivially reducible shape.
// Quantifier gates bind a block of variables over a body gate; adjacent
// blocks of the same kind are merged on construction. Every variable is
// allocated once and bound by exactly one quantifier gate.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "somm/error.hpp"

namespace somm::qbf {

enum class GateKind : std::uint8_t {
  False_,
  True_,
  Var,
  Not,
  And,
  Or,
  Exists,
  Forall,
};

using GateId = std::uint32_t;
using VarId = std::uint32_t;

constexpr GateId kFalse = 0;
constexpr GateId kTrue = 1;

struct Gate {
  GateKind kind = GateKind::False_;
  std::uint32_t a = 0;             // Var: variable; Not/Exists/Forall: operand
  std::vector<std::uint32_t> list; // And/Or: operands; quantifier: variables
  VarId var_lo = std::numeric_limits<VarId>::max();  // ids occurring below,
  VarId var_hi = 0;                                  // interval [lo, hi)
};

struct VarInfo {
  std::string name;
  std::vector<int> tuple;  // element tuple for second-order instances

  std::string origin() const {
    if (tuple.empty()) return name;
    std::string s = name + "(";
    for (size_t i = 0; i < tuple.size(); ++i)
      s += (i ? "," : "") + std::to_string(tuple[i]);
    return s + ")";
  }
};

class Circuit {
 public:
  Circuit() {
    gates_.emplace_back();
    gates_.back().kind = GateKind::False_;
    gates_.emplace_back();
    gates_.back().kind = GateKind::True_;
    bytes_ = 2 * sizeof(Gate);
  }

  const Gate& gate(GateId g) const { return gates_[g]; }
  size_t gate_count() const { return gates_.size(); }
  size_t var_count() const { return vars_.size(); }
  const VarInfo& var(VarId v) const { return vars_[v]; }
  const std::vector<VarInfo>& vars() const { return vars_; }
  std::uint64_t approx_bytes() const { return bytes_; }

  VarId new_var(std::string name, std::vector<int> tuple = {}) {
    vars_.push_back(VarInfo{std::move(name), std::move(tuple)});
    bytes_ += sizeof(VarInfo) + 24;
    return static_cast<VarId>(vars_.size() - 1);
  }

  GateId mk_const(bool b) { return b ? kTrue : kFalse; }

  GateId mk_var(VarId v) {
    if (v >= vars_.size()) throw Error("circuit: unknown variable");
    Gate g{GateKind::Var, v, {}, v, v + 1};
    return intern(std::move(g));
  }

  GateId mk_not(GateId x) {
    if (x == kFalse) return kTrue;
    if (x == kTrue) return kFalse;
    const Gate& gx = gates_[x];
    if (gx.kind == GateKind::Not) return gx.a;
    Gate g{GateKind::Not, x, {}, gx.var_lo, gx.var_hi};
    return intern(std::move(g));
  }

  GateId mk_and(std::vector<GateId> ops) { return mk_nary(GateKind::And, std::move(ops)); }
  GateId mk_or(std::vector<GateId> ops) { return mk_nary(GateKind::Or, std::move(ops)); }

  GateId mk_and(GateId a, GateId b) { return mk_and(std::vector<GateId>{a, b}); }
  GateId mk_or(GateId a, GateId b) { return mk_or(std::vector<GateId>{a, b}); }

  // A quantifier block over `vars`. Order of `vars` does not matter; they are
  // stored ascending. Binding a variable twice on one path is a logic error
  // upstream and is not checked here.
  GateId mk_quant(GateKind kind, std::vector<VarId> vars, GateId body) {
    if (kind != GateKind::Exists && kind != GateKind::Forall)
      throw Error("circuit: mk_quant needs a quantifier kind");
    if (body == kFalse || body == kTrue) return body;
    const Gate* gb = &gates_[body];
    // Drop variables that cannot occur in the body.
    std::vector<VarId> kept;
    kept.reserve(vars.size());
    for (VarId v : vars)
      if (v >= gb->var_lo && v < gb->var_hi) kept.push_back(v);
    if (gb->kind == kind) {  // merge adjacent blocks of the same kind
      kept.insert(kept.end(), gb->list.begin(), gb->list.end());
      body = gb->a;
      gb = &gates_[body];
    }
    if (kept.empty()) return body;
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    Gate g{kind, body, std::move(kept), gb->var_lo, gb->var_hi};
    for (VarId v : g.list) {
      g.var_lo = std::min(g.var_lo, v);
      g.var_hi = std::max(g.var_hi, v + 1);
    }
    return intern(std::move(g));
  }

 private:
  GateId mk_nary(GateKind kind, std::vector<GateId> ops) {
    const GateId absorbing = (kind == GateKind::And) ? kFalse : kTrue;
    const GateId neutral = (kind == GateKind::And) ? kTrue : kFalse;
    std::vector<GateId> out;
    out.reserve(ops.size());
    // (id, polarity) pairs already present, for dedup and complement checks.
    std::unordered_set<std::uint64_t> seen;
    auto key = [](GateId g, bool pol) {
      return (static_cast<std::uint64_t>(g) << 1) | (pol ? 1u : 0u);
    };
    for (size_t i = 0; i < ops.size(); ++i) {
      GateId x = ops[i];
      if (x == absorbing) return absorbing;
      if (x == neutral) continue;
      const Gate& gx = gates_[x];
      if (gx.kind == kind) {  // flatten; nested gates are already flat
        for (GateId y : gx.list) ops.push_back(y);
        continue;
      }
      bool pol = true;
      GateId core = x;
      if (gx.kind == GateKind::Not) {
        pol = false;
        core = gx.a;
      }
      if (seen.count(key(core, !pol))) return absorbing;  // x and not(x)
      if (!seen.insert(key(core, pol)).second) continue;  // duplicate
      out.push_back(x);
    }
    if (out.empty()) return neutral;
    if (out.size() == 1) return out[0];
    Gate g{kind, 0, std::move(out)};
    for (GateId x : g.list) {
      g.var_lo = std::min(g.var_lo, gates_[x].var_lo);
      g.var_hi = std::max(g.var_hi, gates_[x].var_hi);
    }
    return intern(std::move(g));
  }

  GateId intern(Gate&& g) {
    std::uint64_t h = hash_gate(g);
    auto [it, _] = cons_.try_emplace(h);
    for (GateId cand : it->second)
      if (same(gates_[cand], g)) return cand;
    gates_.push_back(std::move(g));
    GateId id = static_cast<GateId>(gates_.size() - 1);
    it->second.push_back(id);
    // Beyond the gate itself: pool slack, the interner entry, and the
    // allocator's rounding on the operand vector. Undercounting here lets
    // real memory outrun the cap, so the estimate leans high.
    bytes_ += 2 * sizeof(Gate) + 4 * gates_.back().list.capacity() + 80;
    return id;
  }

  static std::uint64_t hash_gate(const Gate& g) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t x) {
      h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    };
    mix(static_cast<std::uint64_t>(g.kind));
    mix(g.a);
    mix(g.list.size());
    for (std::uint32_t x : g.list) mix(x);
    return h;
  }

  static bool same(const Gate& a, const Gate& b) {
    return a.kind == b.kind && a.a == b.a && a.list == b.list;
  }

  std::vector<Gate> gates_;
  std::vector<VarInfo> vars_;
  std::unordered_map<std::uint64_t, std::vector<GateId>> cons_;
  std::uint64_t bytes_ = 0;
};

// A circuit plus the root gate of interest.
struct Qbf {
  std::shared_ptr<Circuit> circuit;
  GateId root = kFalse;
};

}  // namespace somm::qbf
