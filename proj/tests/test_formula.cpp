#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <string>

#include "somm/so/formula.hpp"

using namespace somm;
using namespace somm::so;

namespace {

bool nand_only(const Formula& f) {
  switch (f->conn) {
    case Conn::Atom:
      return true;
    case Conn::Not:
    case Conn::Nand:
    case Conn::ForallFo:
    case Conn::ExistsFo:
    case Conn::ForallSo:
    case Conn::ExistsSo:
      break;
    default:
      return false;
  }
  for (const auto& k : f->kids)
    if (!nand_only(k)) return false;
  return true;
}

}  // namespace

TEST_CASE("atoms and connectives print in s-expression form") {
  auto f = implies(rel_atom("edge", {Term::var("x"), Term::cnst("a1")}),
                   so_atom("X", {Term::var("x")}));
  CHECK(dump(f) == "(implies (edge ?x a1) (%X ?x))");
  CHECK(dump(eq_atom(Term::var("x"), Term::var("y"))) == "(= ?x ?y)");
}

TEST_CASE("variadic conjunction needs operands and collapses singletons") {
  auto a = rel_atom("p", {Term::var("x")});
  CHECK(mk_and({a}) == a);
  CHECK(mk_or({a}) == a);
  CHECK_THROWS_AS(mk_and({}), Error);
  CHECK_THROWS_AS(mk_or({}), Error);
  auto f = mk_and({a, a, a});
  CHECK(f->kids.size() == 3);
}

TEST_CASE("names with delimiters are rejected") {
  CHECK_THROWS_AS(rel_atom("bad name", {Term::var("x")}), Error);
  CHECK_THROWS_AS(so_atom("%X", {Term::var("x")}), Error);
  CHECK_THROWS_AS(forall_fo("?x", rel_atom("p", {Term::var("x")})), Error);
}

TEST_CASE("second order quantifiers need positive arity") {
  auto body = so_atom("X", {Term::var("x")});
  CHECK_THROWS_AS(forall_so("X", 0, body), Error);
  CHECK_THROWS_AS(exists_so("X", -1, body), Error);
}

TEST_CASE("free variable collection tracks binders") {
  auto f = exists_fo(
      "x", mk_and(so_atom("X", {Term::var("x")}),
                  rel_atom("edge", {Term::var("x"), Term::var("y")})));
  auto fv = free_vars(f);
  CHECK(fv.fo == std::set<std::string>{"y"});
  REQUIRE(fv.so.count("X") == 1);
  CHECK(fv.so.at("X") == 1);
  CHECK_FALSE(is_sentence(f));
  CHECK(is_sentence(forall_fo("y", forall_so("X", 1, f))));
}

TEST_CASE("inconsistent predicate arity is an error") {
  auto g = mk_and(so_atom("X", {Term::var("x")}),
                  so_atom("X", {Term::var("x"), Term::var("x")}));
  CHECK_THROWS_AS(free_vars(g), Error);
}

TEST_CASE("constants are not variables") {
  auto f = rel_atom("p", {Term::cnst("a2")});
  CHECK(is_sentence(f));
}

TEST_CASE("dump and parse round trip") {
  auto f = forall_fo(
      "x",
      iff(eq_atom(Term::var("x"), Term::cnst("a1")),
          exists_so("X", 2,
                    nand(so_atom("X", {Term::var("x"), Term::var("x")}),
                         mk_not(rel_atom("p", {Term::var("x")}))))));
  auto g = parse_formula(dump(f));
  CHECK(dump(g) == dump(f));
}

TEST_CASE("parse rejects malformed input") {
  CHECK_THROWS_AS(parse_formula("(and (p ?x)"), FormatError);
  CHECK_THROWS_AS(parse_formula("(not (p ?x) (q ?x))"), FormatError);
  CHECK_THROWS_AS(parse_formula("(p ?x) trailing"), FormatError);
  CHECK_THROWS_AS(parse_formula("(forall x (p ?x))"), FormatError);
  CHECK_THROWS_AS(parse_formula("(exists-so %X two (%X ?x))"), FormatError);
}

TEST_CASE("desugaring eliminates derived connectives") {
  auto f = forall_fo(
      "x", iff(mk_or(rel_atom("p", {Term::var("x")}),
                     rel_atom("q", {Term::var("x")})),
               implies(rel_atom("q", {Term::var("x")}),
                       mk_and(rel_atom("p", {Term::var("x")}),
                              rel_atom("r", {Term::var("x")})))));
  CHECK(nand_only(desugar_to_nand(f)));
}
