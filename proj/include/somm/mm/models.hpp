#pragma once

// Memory model sentences over the relational form of an event structure.
// Each generator returns a closed sentence asking whether an execution of
// interest exists under that model's consistency laws; deciding the litmus
// question is then model checking the sentence on the structure. The
// vocabulary is the one to_rel_structure emits: read, write, final
// (arity 1); le, lt, conflict, justifies, sloc (arity 2).
//
// The C++ generator is a documented approximation: its validity laws reuse
// the release-acquire happens-before skeleton plus per-location coherence
// acyclicity, and its race detector looks for two same-location accesses,
// at least one a write, unrelated both ways by the happens-before witness.
// Both live behind CppOptions so a finer formulation can be swapped in.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "somm/error.hpp"
#include "somm/es/event_structure.hpp"
#include "somm/so/combinators.hpp"
#include "somm/so/formula.hpp"
#include "somm/so/structure.hpp"

namespace somm::mm {

enum class ModelId { Sc, Ra, Cpp, Jr };

inline const char* to_string(ModelId m) {
  switch (m) {
    case ModelId::Sc:
      return "sc";
    case ModelId::Ra:
      return "ra";
    case ModelId::Cpp:
      return "c11";
    case ModelId::Jr:
      return "jr";
  }
  return "?";
}

struct ModelSentence {
  ModelId model = ModelId::Sc;
  so::Formula sentence;
  std::map<std::string, int> params;
};

namespace detail {

inline void require_vocabulary(const so::RelStructure& rs) {
  static constexpr std::pair<const char*, int> kNeeded[] = {
      {"read", 1},     {"write", 1},     {"final", 1}, {"le", 2},
      {"lt", 2},       {"conflict", 2},  {"sloc", 2},  {"justifies", 2}};
  const auto& rels = rs.relations();
  for (const auto& [name, arity] : kNeeded) {
    const auto it = rels.find(name);
    if (it == rels.end() || it->second.arity != arity)
      throw Error(std::string("memory model: structure lacks relation '") +
                  name + "' of arity " + std::to_string(arity));
  }
}

}  // namespace detail

// Yco is a candidate coherence order: it relates, one way or the other,
// exactly the distinct same-location writes inside the execution.
inline so::Formula mk_co(const so::PredFn& x, const so::PredFn& yco) {
  using namespace so;
  if (x.arity != 1 || yco.arity != 2)
    throw Error("mk_co: expected arities 1 and 2");
  const std::string a = fresh_fo_name();
  const std::string b = fresh_fo_name();
  const Term ta = Term::var(a);
  const Term tb = Term::var(b);
  Formula lhs = mk_and({x(ta), x(tb), rel_atom("write", {ta}),
                        rel_atom("write", {tb}), rel_atom("sloc", {ta, tb}),
                        mk_not(eq_atom(ta, tb))});
  Formula rhs = mk_or(yco(ta, tb), yco(tb, ta));
  return forall_fo(a, forall_fo(b, iff(std::move(lhs), std::move(rhs))));
}

// Yrf is a candidate reads-from relation: injective, within justifies, and
// covering every read of the execution with a write of the execution.
inline so::Formula mk_rf(const so::PredFn& x, const so::PredFn& yrf) {
  using namespace so;
  if (x.arity != 1 || yrf.arity != 2)
    throw Error("mk_rf: expected arities 1 and 2");
  Formula injective = inj(yrf);
  Formula within = subset(yrf, rel_pred("justifies", 2));
  const std::string b = fresh_fo_name();
  const std::string a = fresh_fo_name();
  const Term tb = Term::var(b);
  const Term ta = Term::var(a);
  Formula covered = forall_fo(
      b, implies(mk_and(rel_atom("read", {tb}), x(tb)),
                 exists_fo(a, mk_and({rel_atom("write", {ta}), x(ta),
                                      yrf(ta, tb)}))));
  return mk_and(
      {std::move(injective), std::move(within), std::move(covered)});
}

// The union of strict program order, coherence, reads-from, and from-reads.
inline so::PredFn mk_r(const so::PredFn& yco, const so::PredFn& yrf) {
  using namespace so;
  if (yco.arity != 2 || yrf.arity != 2)
    throw Error("mk_r: expected arity 2");
  return {2, [yco, yrf](const std::vector<Term>& ts) {
            const std::string c = fresh_fo_name();
            const Term tc = Term::var(c);
            Formula fr = exists_fo(
                c, mk_and(yco(tc, ts[1]), yrf(tc, ts[0])));
            return mk_or({rel_atom("lt", ts), yco(ts[0], ts[1]),
                          yrf(ts[0], ts[1]), std::move(fr)});
          }};
}

// The happens-before laws shared by release-acquire and the C++
// approximation: Yhb contains program order and reads-from, is a strict
// order, and stays consistent with coherence both directly and through
// from-reads.
inline so::Formula mk_hb_laws(const so::PredFn& yco, const so::PredFn& yrf,
                              const so::PredFn& yhb) {
  using namespace so;
  Formula po_in = subset(rel_pred("lt", 2), yhb);
  Formula rf_in = subset(yrf, yhb);
  Formula transitive = trans(yhb);
  Formula strict = irrefl(yhb);
  Formula co_hb = irrefl(seq(yco, yhb));
  Formula fr_hb = irrefl(seq(inv(yrf), seq(yco, yhb)));
  return mk_and({std::move(po_in), std::move(rf_in), std::move(transitive),
                 std::move(strict), std::move(co_hb), std::move(fr_hb)});
}

// Two distinct same-location accesses of the execution, at least one a
// write, unrelated either way by the happens-before witness.
inline so::Formula mk_race(const so::PredFn& x, const so::PredFn& yhb) {
  using namespace so;
  const std::string a = fresh_fo_name();
  const std::string b = fresh_fo_name();
  const Term ta = Term::var(a);
  const Term tb = Term::var(b);
  return exists_fo(
      a, exists_fo(
             b, mk_and({x(ta), x(tb), rel_atom("sloc", {ta, tb}),
                        mk_not(eq_atom(ta, tb)),
                        mk_or(rel_atom("write", {ta}), rel_atom("write", {tb})),
                        mk_not(yhb(ta, tb)), mk_not(yhb(tb, ta))})));
}

// Sequential consistency: some execution of interest has coherence,
// reads-from, and an acyclic union relation.
inline ModelSentence gen_sc(const so::RelStructure& rs) {
  using namespace so;
  detail::require_vocabulary(rs);
  reset_fresh_names();
  PredFn x = so_pred("X", 1);
  PredFn yco = so_pred("Yco", 2);
  PredFn yrf = so_pred("Yrf", 2);
  Formula fin = es::mk_final_config(x);
  Formula co = mk_co(x, yco);
  Formula rf = mk_rf(x, yrf);
  Formula acyc = acyclic(mk_r(yco, yrf));
  Formula body = mk_and({std::move(fin), std::move(co), std::move(rf),
                         std::move(acyc)});
  Formula s = exists_so(
      "X", 1, exists_so("Yco", 2, exists_so("Yrf", 2, std::move(body))));
  return {ModelId::Sc, std::move(s), {}};
}

// Release-acquire: coherence is acyclic on its own, and a happens-before
// witness over-approximates the usual derived order.
inline ModelSentence gen_ra(const so::RelStructure& rs) {
  using namespace so;
  detail::require_vocabulary(rs);
  reset_fresh_names();
  PredFn x = so_pred("X", 1);
  PredFn yco = so_pred("Yco", 2);
  PredFn yrf = so_pred("Yrf", 2);
  PredFn yhb = so_pred("Yhb", 2);
  Formula fin = es::mk_final_config(x);
  Formula co = mk_co(x, yco);
  Formula rf = mk_rf(x, yrf);
  Formula acyc = acyclic(yco);
  Formula hb = exists_so("Yhb", 2, mk_hb_laws(yco, yrf, yhb));
  Formula body = mk_and({std::move(fin), std::move(co), std::move(rf),
                         std::move(acyc), std::move(hb)});
  Formula s = exists_so(
      "X", 1, exists_so("Yco", 2, exists_so("Yrf", 2, std::move(body))));
  return {ModelId::Ra, std::move(s), {}};
}

struct CppOptions {
  // When false the catch-fire disjunct is dropped and only race-free
  // executions of interest count.
  bool race_arm = true;
};

// Catch-fire semantics: the outcome is allowed if a valid execution shows
// it, or if any valid execution races at all. The race disjunct shares the
// happens-before witness with the validity laws.
inline ModelSentence gen_cpp(const so::RelStructure& rs,
                             const CppOptions& opts = {}) {
  using namespace so;
  detail::require_vocabulary(rs);
  reset_fresh_names();
  PredFn x = so_pred("X", 1);
  PredFn yco = so_pred("Yco", 2);
  PredFn yrf = so_pred("Yrf", 2);
  PredFn yhb = so_pred("Yhb", 2);
  Formula valid = es::mk_valid_config(x);
  Formula co = mk_co(x, yco);
  Formula rf = mk_rf(x, yrf);
  Formula acyc = acyclic(yco);
  Formula laws = mk_hb_laws(yco, yrf, yhb);
  Formula fin = es::mk_final_config(x);
  Formula goal = std::move(fin);
  if (opts.race_arm) {
    Formula race = mk_race(x, yhb);
    goal = mk_or(std::move(goal), std::move(race));
  }
  Formula inner =
      exists_so("Yhb", 2, mk_and(std::move(laws), std::move(goal)));
  Formula body = mk_and({std::move(valid), std::move(co), std::move(rf),
                         std::move(acyc), std::move(inner)});
  Formula s = exists_so(
      "X", 1, exists_so("Yco", 2, exists_so("Yrf", 2, std::move(body))));
  return {ModelId::Cpp, std::move(s), {}};
}

struct JrOptions {
  // Iteration bound for the stepwise justification; defaults to the
  // universe size, which the bounded closure's monotonicity makes enough.
  std::optional<int> n;
  // Keep the inner justification conjunct as write(y) instead of write(x).
  // With write(y) a justified read would itself have to be a write, which
  // the structure laws forbid, so the default emits write(x).
  bool mj_write_on_read = false;
};

// One set justifies another when every new read has a justifying write
// already present.
inline so::Formula mk_j(const so::PredFn& p, const so::PredFn& q,
                        bool write_on_read = false) {
  using namespace so;
  if (p.arity != 1 || q.arity != 1)
    throw Error("mk_j: unary predicates required");
  const std::string b = fresh_fo_name();
  const std::string a = fresh_fo_name();
  const Term tb = Term::var(b);
  const Term ta = Term::var(a);
  Formula lhs = mk_and({mk_not(p(tb)), q(tb), rel_atom("read", {tb})});
  Formula rhs = exists_fo(
      a, mk_and({p(ta), rel_atom("write", {write_on_read ? tb : ta}),
                 rel_atom("justifies", {ta, tb})}));
  return forall_fo(b, implies(std::move(lhs), std::move(rhs)));
}

// Always justifies: justification between valid configurations that grow.
inline so::Formula mk_aj(const so::PredFn& p, const so::PredFn& q,
                         bool write_on_read = false) {
  using namespace so;
  Formula j = mk_j(p, q, write_on_read);
  Formula grow = subset(p, q);
  Formula vp = es::mk_valid_config(p);
  Formula vq = es::mk_valid_config(q);
  return mk_and(
      {std::move(j), std::move(grow), std::move(vp), std::move(vq)});
}

// Always eventually justifies: wherever the n-step closure of
// always-justifies leads from P, it can be extended to justify Q.
inline so::Formula mk_aej(int n, const so::PredFn& p, const so::PredFn& q,
                          bool write_on_read = false) {
  using namespace so;
  if (n < 0) throw Error("mk_aej: bound must be >= 0");
  Formula grow = subset(p, q);
  Formula vp = es::mk_valid_config(p);
  Formula vq = es::mk_valid_config(q);
  const TcStep aj = [write_on_read](const PredFn& s, const PredFn& t) {
    return mk_aj(s, t, write_on_read);
  };
  const std::string xn = fresh_so_name();
  const PredFn xp = so_pred(xn, 1);
  Formula reach = tc(n, aj, p, xp);
  const std::string yn = fresh_so_name();
  const PredFn yp = so_pred(yn, 1);
  Formula extend = tc(n, aj, xp, yp);
  Formula just = mk_j(yp, q, write_on_read);
  Formula inner = exists_so(yn, 1, mk_and(std::move(extend), std::move(just)));
  Formula quant =
      forall_so(xn, 1, implies(std::move(reach), std::move(inner)));
  return mk_and(
      {std::move(grow), std::move(vp), std::move(vq), std::move(quant)});
}

// Stepwise justification: an execution of interest is reachable from the
// empty set through the bounded closure of always-eventually-justifies.
inline ModelSentence gen_jr(const so::RelStructure& rs,
                            const JrOptions& opts = {}) {
  using namespace so;
  detail::require_vocabulary(rs);
  const int n = opts.n.value_or(rs.size());
  if (n < 0) throw Error("jr: bound must be >= 0");
  reset_fresh_names();
  const PredFn x = so_pred("X", 1);
  const PredFn none = rel_pred("empty", 1);
  const bool wor = opts.mj_write_on_read;
  const TcStep aej = [n, wor](const PredFn& p, const PredFn& q) {
    return mk_aej(n, p, q, wor);
  };
  Formula chain = tc(n, aej, none, x);
  Formula fin = es::mk_final_config(x);
  Formula s = exists_so("X", 1, mk_and(std::move(chain), std::move(fin)));
  ModelSentence out{ModelId::Jr, std::move(s), {}};
  out.params["n"] = n;
  return out;
}

inline ModelSentence generate(ModelId m, const so::RelStructure& rs) {
  switch (m) {
    case ModelId::Sc:
      return gen_sc(rs);
    case ModelId::Ra:
      return gen_ra(rs);
    case ModelId::Cpp:
      return gen_cpp(rs);
    case ModelId::Jr:
      return gen_jr(rs);
  }
  throw Error("memory model: unknown model id");
}

}  // namespace somm::mm
