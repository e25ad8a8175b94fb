#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "somm/oracle/oracle.hpp"
#include "somm/so/formula.hpp"
#include "somm/so/structure.hpp"

using namespace somm;
using namespace somm::so;
using oracle::Budget;
using oracle::check;
using oracle::check_in;
using oracle::Verdict;

namespace {

RelStructure triangle() {
  RelStructure rs(3);
  rs.set_relation("edge", 2, {{0, 1}, {1, 2}, {2, 0}});
  return rs;
}

}  // namespace

TEST_CASE("propositional evaluation") {
  RelStructure rs(1);
  rs.set_relation("p", 1, {{0}});
  rs.set_relation("q", 1, {});
  auto p = rel_atom("p", {Term::cnst("a1")});
  auto q = rel_atom("q", {Term::cnst("a1")});
  CHECK(check(rs, p).is_true());
  CHECK(check(rs, q).is_false());
  CHECK(check(rs, mk_not(q)).is_true());
  CHECK(check(rs, mk_and(p, q)).is_false());
  CHECK(check(rs, mk_or(p, q)).is_true());
  CHECK(check(rs, implies(q, p)).is_true());
  CHECK(check(rs, implies(p, q)).is_false());
  CHECK(check(rs, iff(p, q)).is_false());
  CHECK(check(rs, iff(q, q)).is_true());
  CHECK(check(rs, nand(p, q)).is_true());
  CHECK(check(rs, nand(p, p)).is_false());
}

TEST_CASE("first order quantifiers range over the universe") {
  RelStructure rs = triangle();
  auto e = [](const char* x, const char* y) {
    return rel_atom("edge", {Term::var(x), Term::var(y)});
  };
  CHECK(check(rs, forall_fo("x", exists_fo("y", e("x", "y")))).is_true());
  CHECK(check(rs, exists_fo("x", forall_fo("y", e("x", "y")))).is_false());
  CHECK(check(rs, exists_fo("x", e("x", "x"))).is_false());
}

TEST_CASE("identity relation") {
  RelStructure rs(2);
  auto same = eq_atom(Term::var("x"), Term::var("y"));
  CHECK(check(rs, forall_fo("x", exists_fo("y", same))).is_true());
  CHECK(check(rs, forall_fo("x", forall_fo("y", same))).is_false());
  CHECK(check(rs, eq_atom(Term::cnst("a1"), Term::cnst("a1"))).is_true());
  CHECK(check(rs, eq_atom(Term::cnst("a1"), Term::cnst("a2"))).is_false());
}

TEST_CASE("second order quantifiers range over relations") {
  RelStructure rs(2);
  auto xa1 = so_atom("X", {Term::cnst("a1")});
  auto xa2 = so_atom("X", {Term::cnst("a2")});
  CHECK(check(rs, exists_so("X", 1, mk_and(xa1, mk_not(xa2)))).is_true());
  CHECK(check(rs, forall_so("X", 1, xa1)).is_false());
  CHECK(check(rs, forall_so("X", 1, mk_or(xa1, mk_not(xa1)))).is_true());
}

TEST_CASE("an arity two witness can invert a relation") {
  RelStructure rs = triangle();
  auto body = forall_fo(
      "x", forall_fo("y", iff(so_atom("Y", {Term::var("x"), Term::var("y")}),
                              rel_atom("edge", {Term::var("y"), Term::var("x")}))));
  CHECK(check(rs, exists_so("Y", 2, body)).is_true());
}

TEST_CASE("subsets are tried small first") {
  RelStructure rs(3);
  auto none = forall_fo("x", mk_not(so_atom("X", {Term::var("x")})));
  auto r = check(rs, exists_so("X", 1, none));
  CHECK(r.is_true());
  CHECK(r.evals < 20);
}

TEST_CASE("evaluation budget turns into infeasible") {
  RelStructure rs(4);
  auto body = forall_fo(
      "x", forall_fo("y", mk_or(so_atom("Y", {Term::var("x"), Term::var("y")}),
                                mk_not(eq_atom(Term::var("x"), Term::var("x"))))));
  auto r = check(rs, forall_so("Y", 2, mk_or(body, mk_not(body))), Budget{50});
  CHECK(r.infeasible());
  CHECK(r.evals >= 50);
}

TEST_CASE("oversized tuple spaces are infeasible") {
  RelStructure rs(2001);
  auto f = exists_so("Y", 2, so_atom("Y", {Term::cnst("a1"), Term::cnst("a1")}));
  CHECK(check(rs, f).infeasible());
}

TEST_CASE("environments supply free variables") {
  RelStructure rs = triangle();
  so::Environment env;
  env.fo["x"] = 0;
  auto f = rel_atom("edge", {Term::var("x"), Term::cnst("a2")});
  CHECK(check_in(rs, f, env).is_true());
  env.fo["x"] = 1;
  CHECK(check_in(rs, f, env).is_false());
}

TEST_CASE("unbound names are errors") {
  RelStructure rs(2);
  CHECK_THROWS_AS(check(rs, rel_atom("nope", {Term::cnst("a1")})), Error);
  CHECK_THROWS_AS(check(rs, rel_atom("=", {Term::var("x"), Term::var("x")})),
                  Error);
  CHECK_THROWS_AS(check(rs, so_atom("X", {Term::cnst("a1")})), Error);
  CHECK_THROWS_AS(check(rs, rel_atom("empty", {Term::cnst("a7")})), Error);
}

TEST_CASE("desugaring preserves truth") {
  RelStructure rs = triangle();
  rs.set_relation("mark", 1, {{0}, {2}});
  auto e = rel_atom("edge", {Term::var("x"), Term::var("y")});
  auto m = rel_atom("mark", {Term::var("x")});
  std::vector<Formula> cases = {
      forall_fo("x", exists_fo("y", mk_and(e, m))),
      forall_fo("x", implies(m, exists_fo("y", e))),
      exists_so("X", 1,
                forall_fo("x", iff(so_atom("X", {Term::var("x")}), m))),
      forall_so("X", 1,
                mk_or(exists_fo("x", so_atom("X", {Term::var("x")})),
                      forall_fo("x", mk_not(so_atom("X", {Term::var("x")}))))),
  };
  for (const auto& f : cases) {
    auto a = check(rs, f);
    auto b = check(rs, desugar_to_nand(f));
    REQUIRE_FALSE(a.infeasible());
    REQUIRE_FALSE(b.infeasible());
    CHECK(a.is_true() == b.is_true());
  }
}
