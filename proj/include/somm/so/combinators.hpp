#pragma once

// Combinator library over formulas. A PredFn is a k-ary predicate in the
// macro sense: anything that yields a formula when applied to k terms. Plain
// relation symbols and second-order variables lift to PredFns, and seq/inv/id
// build derived ones, so the set-level combinators compose freely:
//
//   subset(P,Q)  =  forall x..  P(x..) -> Q(x..)
//   eq(P,Q)      =  forall x..  P(x..) <-> Q(x..)
//   irrefl(P)    =  forall x. not P(x,x)
//   inv(P)       =  (x,y) |-> P(y,x)
//   id           =  (x,y) |-> x = y
//   seq(P,Q)     =  (x,z) |-> exists y. P(x,y) and Q(y,z)
//   inj(P)       =  subset(seq(P, inv(P)), id)
//   trans(P)     =  subset(seq(P,P), P)
//   acyclic(P)   =  exists X. subset(P,X) and trans(X) and irrefl(X)
//
// tc(n, R, P, Q) is the n-bounded transitive closure of a binary combinator
// R over unary predicates:
//
//   tc(0, R)(P,Q)   = eq(P,Q)
//   tc(n+1, R)(P,Q) = eq(P,Q) or exists X. R(P,X) and tc(n, R)(X,Q)
//
// Combinators are macro expansions: each call copies its expansion with
// fresh bound variables drawn from a counter, so nothing is ever captured.
// reset_fresh_names() makes expansions reproducible run to run.

#include <functional>
#include <string>
#include <vector>

#include "somm/error.hpp"
#include "somm/so/formula.hpp"

namespace somm::so {

namespace detail {
inline thread_local int fo_counter = 0;
inline thread_local int so_counter = 0;
}  // namespace detail

inline void reset_fresh_names() {
  detail::fo_counter = 0;
  detail::so_counter = 0;
}

inline std::string fresh_fo_name() {
  return "_x" + std::to_string(++detail::fo_counter);
}

inline std::string fresh_so_name() {
  return "_X" + std::to_string(++detail::so_counter);
}

struct PredFn {
  int arity = 0;
  std::function<Formula(const std::vector<Term>&)> apply;

  Formula operator()(const std::vector<Term>& ts) const {
    if (static_cast<int>(ts.size()) != arity)
      throw Error("predicate applied to " + std::to_string(ts.size()) +
                  " terms, arity is " + std::to_string(arity));
    return apply(ts);
  }
  Formula operator()(const Term& a) const {
    return (*this)(std::vector<Term>{a});
  }
  Formula operator()(const Term& a, const Term& b) const {
    return (*this)(std::vector<Term>{a, b});
  }
};

inline PredFn so_pred(std::string name, int arity) {
  return {arity, [name = std::move(name)](const std::vector<Term>& ts) {
            return so_atom(name, ts);
          }};
}

inline PredFn rel_pred(std::string name, int arity) {
  return {arity, [name = std::move(name)](const std::vector<Term>& ts) {
            return rel_atom(name, ts);
          }};
}

namespace detail {

inline std::vector<Term> fresh_tuple(int k, std::vector<std::string>& names) {
  std::vector<Term> xs;
  for (int i = 0; i < k; ++i) {
    names.push_back(fresh_fo_name());
    xs.push_back(Term::var(names.back()));
  }
  return xs;
}

inline Formula close_forall(const std::vector<std::string>& names,
                            Formula body) {
  for (auto it = names.rbegin(); it != names.rend(); ++it)
    body = forall_fo(*it, std::move(body));
  return body;
}

}  // namespace detail

inline Formula subset(const PredFn& p, const PredFn& q) {
  if (p.arity != q.arity) throw Error("subset: arity mismatch");
  std::vector<std::string> names;
  std::vector<Term> xs = detail::fresh_tuple(p.arity, names);
  Formula lhs = p(xs);  // sequenced so fresh names read left to right
  Formula rhs = q(xs);
  return detail::close_forall(names, implies(std::move(lhs), std::move(rhs)));
}

inline Formula eq(const PredFn& p, const PredFn& q) {
  if (p.arity != q.arity) throw Error("eq: arity mismatch");
  std::vector<std::string> names;
  std::vector<Term> xs = detail::fresh_tuple(p.arity, names);
  Formula lhs = p(xs);
  Formula rhs = q(xs);
  return detail::close_forall(names, iff(std::move(lhs), std::move(rhs)));
}

inline Formula irrefl(const PredFn& p) {
  if (p.arity != 2) throw Error("irrefl: binary predicate required");
  std::string x = fresh_fo_name();
  Term tx = Term::var(x);
  return forall_fo(x, mk_not(p(tx, tx)));
}

inline PredFn inv(const PredFn& p) {
  if (p.arity != 2) throw Error("inv: binary predicate required");
  return {2, [p](const std::vector<Term>& ts) { return p(ts[1], ts[0]); }};
}

inline PredFn id() {
  return {2, [](const std::vector<Term>& ts) {
            return eq_atom(ts[0], ts[1]);
          }};
}

inline PredFn seq(const PredFn& p, const PredFn& q) {
  if (p.arity != 2 || q.arity != 2)
    throw Error("seq: binary predicates required");
  return {2, [p, q](const std::vector<Term>& ts) {
            std::string y = fresh_fo_name();
            Term ty = Term::var(y);
            Formula lhs = p(ts[0], ty);
            Formula rhs = q(ty, ts[1]);
            return exists_fo(y, mk_and(std::move(lhs), std::move(rhs)));
          }};
}

inline Formula inj(const PredFn& p) {
  return subset(seq(p, inv(p)), id());
}

inline Formula trans(const PredFn& p) {
  return subset(seq(p, p), p);
}

inline Formula acyclic(const PredFn& p) {
  if (p.arity != 2) throw Error("acyclic: binary predicate required");
  std::string x = fresh_so_name();
  PredFn xp = so_pred(x, 2);
  return exists_so(x, 2,
                   mk_and({subset(p, xp), trans(xp), irrefl(xp)}));
}

using TcStep = std::function<Formula(const PredFn&, const PredFn&)>;

inline Formula tc(int n, const TcStep& step, const PredFn& p,
                  const PredFn& q) {
  if (n < 0) throw Error("tc: bound must be >= 0");
  if (p.arity != 1 || q.arity != 1)
    throw Error("tc: unary predicates required");
  Formula base = eq(p, q);
  if (n == 0) return base;
  std::string x = fresh_so_name();
  PredFn xp = so_pred(x, 1);
  Formula first = step(p, xp);
  Formula rest = tc(n - 1, step, xp, q);
  return mk_or(std::move(base),
               exists_so(x, 1, mk_and(std::move(first), std::move(rest))));
}

}  // namespace somm::so
