#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "somm/oracle/oracle.hpp"
#include "somm/so/combinators.hpp"
#include "somm/so/structure.hpp"

using namespace somm;
using namespace somm::so;

namespace {

bool holds(const RelStructure& rs, const Formula& f) {
  auto r = oracle::check(rs, f);
  REQUIRE_FALSE(r.infeasible());
  return r.is_true();
}

RelStructure chain3() {
  RelStructure rs(3);
  rs.set_relation("edge", 2, {{0, 1}, {1, 2}});
  return rs;
}

}  // namespace

TEST_CASE("subset and eq compare extensions") {
  RelStructure rs(3);
  rs.set_relation("p", 1, {{0}});
  rs.set_relation("q", 1, {{0}, {2}});
  CHECK(holds(rs, subset(rel_pred("p", 1), rel_pred("q", 1))));
  CHECK_FALSE(holds(rs, subset(rel_pred("q", 1), rel_pred("p", 1))));
  CHECK_FALSE(holds(rs, eq(rel_pred("p", 1), rel_pred("q", 1))));
  CHECK(holds(rs, eq(rel_pred("q", 1), rel_pred("q", 1))));
  CHECK(holds(rs, subset(rel_pred("empty", 1), rel_pred("p", 1))));
}

TEST_CASE("irreflexivity") {
  RelStructure rs(2);
  rs.set_relation("r", 2, {{0, 1}});
  rs.set_relation("s", 2, {{0, 1}, {1, 1}});
  CHECK(holds(rs, irrefl(rel_pred("r", 2))));
  CHECK_FALSE(holds(rs, irrefl(rel_pred("s", 2))));
}

TEST_CASE("inverse and identity applications") {
  RelStructure rs = chain3();
  auto edge = rel_pred("edge", 2);
  CHECK(holds(rs, inv(edge)(Term::cnst("a2"), Term::cnst("a1"))));
  CHECK_FALSE(holds(rs, inv(edge)(Term::cnst("a1"), Term::cnst("a2"))));
  CHECK(holds(rs, id()(Term::cnst("a1"), Term::cnst("a1"))));
  CHECK_FALSE(holds(rs, id()(Term::cnst("a1"), Term::cnst("a2"))));
}

TEST_CASE("relational composition") {
  RelStructure rs = chain3();
  auto edge = rel_pred("edge", 2);
  CHECK(holds(rs, seq(edge, edge)(Term::cnst("a1"), Term::cnst("a3"))));
  CHECK_FALSE(holds(rs, seq(edge, edge)(Term::cnst("a1"), Term::cnst("a2"))));
}

TEST_CASE("injectivity") {
  RelStructure rs(3);
  rs.set_relation("f", 2, {{0, 1}, {1, 2}});
  rs.set_relation("g", 2, {{0, 1}, {2, 1}});
  CHECK(holds(rs, inj(rel_pred("f", 2))));
  CHECK_FALSE(holds(rs, inj(rel_pred("g", 2))));
}

TEST_CASE("transitivity") {
  RelStructure rs(3);
  rs.set_relation("t", 2, {{0, 1}, {1, 2}, {0, 2}});
  rs.set_relation("u", 2, {{0, 1}, {1, 2}});
  CHECK(holds(rs, trans(rel_pred("t", 2))));
  CHECK_FALSE(holds(rs, trans(rel_pred("u", 2))));
}

TEST_CASE("acyclicity goes through a transitive witness") {
  RelStructure chain = chain3();
  CHECK(holds(chain, acyclic(rel_pred("edge", 2))));
  RelStructure cyc(3);
  cyc.set_relation("edge", 2, {{0, 1}, {1, 2}, {2, 0}});
  CHECK_FALSE(holds(cyc, acyclic(rel_pred("edge", 2))));
  RelStructure loop(1);
  loop.set_relation("edge", 2, {{0, 0}});
  CHECK_FALSE(holds(loop, acyclic(rel_pred("edge", 2))));
}

TEST_CASE("arity checks on combinator arguments") {
  CHECK_THROWS_AS(subset(rel_pred("p", 1), rel_pred("q", 2)), Error);
  CHECK_THROWS_AS(irrefl(rel_pred("p", 1)), Error);
  CHECK_THROWS_AS(rel_pred("p", 2)(Term::var("x")), Error);
  CHECK_THROWS_AS(tc(-1, subset, rel_pred("p", 1), rel_pred("q", 1)), Error);
  CHECK_THROWS_AS(tc(1, subset, rel_pred("p", 2), rel_pred("q", 2)), Error);
}

TEST_CASE("fresh names restart deterministically") {
  reset_fresh_names();
  auto f1 = acyclic(rel_pred("edge", 2));
  reset_fresh_names();
  auto f2 = acyclic(rel_pred("edge", 2));
  CHECK(dump(f1) == dump(f2));
  auto f3 = acyclic(rel_pred("edge", 2));
  CHECK(dump(f3) != dump(f2));
}

TEST_CASE("bounded closure unrolls the step relation") {
  reset_fresh_names();
  auto f = tc(1, subset, rel_pred("p", 1), rel_pred("q", 1));
  CHECK(dump(f) ==
        "(or (forall ?_x1 (iff (p ?_x1) (q ?_x1)))"
        " (exists-so %_X1 1"
        " (and (forall ?_x2 (implies (p ?_x2) (%_X1 ?_x2)))"
        " (forall ?_x3 (iff (%_X1 ?_x3) (q ?_x3))))))");
}

TEST_CASE("bounded closure semantics") {
  RelStructure rs(2);
  rs.set_relation("u", 1, {{0}, {1}});
  rs.set_relation("none", 1, {});
  auto empty = rel_pred("empty", 1);
  auto u = rel_pred("u", 1);
  CHECK_FALSE(holds(rs, tc(0, subset, empty, u)));
  CHECK(holds(rs, tc(0, subset, empty, rel_pred("none", 1))));
  CHECK(holds(rs, tc(1, subset, empty, u)));
  CHECK(holds(rs, tc(3, subset, empty, u)));
}
