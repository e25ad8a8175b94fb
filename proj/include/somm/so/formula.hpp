#pragma once

// Formulas of second-order logic over finite relational structures.
//
// Terms are first-order variables or named constants. An atom applies a
// predicate to terms; the predicate is either a second-order variable or a
// relation symbol of the structure, and the two are kept apart syntactically
// so that a formula can be inspected without a structure at hand.
//
// The connective set is deliberately rich (and/or/not/implies/iff/nand plus
// first- and second-order quantifiers). desugar_to_nand() rewrites the
// propositional part into nand alone; evaluation and translation handle the
// full set directly.

#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "somm/error.hpp"
#include "somm/so/sexpr.hpp"

namespace somm::so {

struct Term {
  enum class Kind { Var, Const };
  Kind kind = Kind::Const;
  std::string name;

  static Term var(std::string n) { return {Kind::Var, std::move(n)}; }
  static Term cnst(std::string n) { return {Kind::Const, std::move(n)}; }
  bool is_var() const { return kind == Kind::Var; }
  friend bool operator==(const Term&, const Term&) = default;
};

struct Pred {
  enum class Kind { SoVar, Rel };
  Kind kind = Kind::Rel;
  std::string name;

  static Pred so_var(std::string n) { return {Kind::SoVar, std::move(n)}; }
  static Pred rel(std::string n) { return {Kind::Rel, std::move(n)}; }
  bool is_so_var() const { return kind == Kind::SoVar; }
  friend bool operator==(const Pred&, const Pred&) = default;
};

enum class Conn {
  Atom,
  Not,
  And,
  Or,
  Implies,
  Iff,
  Nand,
  ForallFo,
  ExistsFo,
  ForallSo,
  ExistsSo,
};

class FormulaNode;
using Formula = std::shared_ptr<const FormulaNode>;

class FormulaNode {
 public:
  Conn conn = Conn::Atom;

  // Atom
  Pred pred;
  std::vector<Term> terms;

  // Quantifiers: bound variable, and for second order its arity.
  std::string var;
  int arity = 0;

  std::vector<Formula> kids;
};

namespace detail {

// Names appear verbatim in the textual dump format, so keep them free of the
// characters that format reserves.
inline void check_name(const std::string& n, const char* what) {
  if (n.empty()) throw Error(std::string(what) + ": empty name");
  for (char c : n) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' ||
        c == '%' || c == '?' || c == ';')
      throw Error(std::string(what) + ": bad character in name '" + n + "'");
  }
}

inline Formula mk(FormulaNode&& n) {
  return std::make_shared<FormulaNode>(std::move(n));
}

}  // namespace detail

inline Formula atom(Pred p, std::vector<Term> terms) {
  detail::check_name(p.name, "predicate");
  if (terms.empty()) throw Error("atom: predicates have arity >= 1");
  for (const Term& t : terms) detail::check_name(t.name, "term");
  FormulaNode n;
  n.conn = Conn::Atom;
  n.pred = std::move(p);
  n.terms = std::move(terms);
  return detail::mk(std::move(n));
}

inline Formula rel_atom(std::string rel, std::vector<Term> terms) {
  return atom(Pred::rel(std::move(rel)), std::move(terms));
}

inline Formula so_atom(std::string so_var, std::vector<Term> terms) {
  return atom(Pred::so_var(std::move(so_var)), std::move(terms));
}

// x = y, via the built-in identity relation of every structure.
inline Formula eq_atom(Term a, Term b) {
  return rel_atom("=", {std::move(a), std::move(b)});
}

inline Formula mk_not(Formula f) {
  FormulaNode n;
  n.conn = Conn::Not;
  n.kids = {std::move(f)};
  return detail::mk(std::move(n));
}

inline Formula mk_and(std::vector<Formula> kids) {
  if (kids.empty()) throw Error("and: needs at least one operand");
  if (kids.size() == 1) return kids[0];
  FormulaNode n;
  n.conn = Conn::And;
  n.kids = std::move(kids);
  return detail::mk(std::move(n));
}

inline Formula mk_or(std::vector<Formula> kids) {
  if (kids.empty()) throw Error("or: needs at least one operand");
  if (kids.size() == 1) return kids[0];
  FormulaNode n;
  n.conn = Conn::Or;
  n.kids = std::move(kids);
  return detail::mk(std::move(n));
}

inline Formula mk_and(Formula a, Formula b) {
  return mk_and(std::vector<Formula>{std::move(a), std::move(b)});
}

inline Formula mk_or(Formula a, Formula b) {
  return mk_or(std::vector<Formula>{std::move(a), std::move(b)});
}

inline Formula implies(Formula a, Formula b) {
  FormulaNode n;
  n.conn = Conn::Implies;
  n.kids = {std::move(a), std::move(b)};
  return detail::mk(std::move(n));
}

inline Formula iff(Formula a, Formula b) {
  FormulaNode n;
  n.conn = Conn::Iff;
  n.kids = {std::move(a), std::move(b)};
  return detail::mk(std::move(n));
}

inline Formula nand(Formula a, Formula b) {
  FormulaNode n;
  n.conn = Conn::Nand;
  n.kids = {std::move(a), std::move(b)};
  return detail::mk(std::move(n));
}

namespace detail {

inline Formula quant(Conn c, std::string var, int arity, Formula body) {
  check_name(var, "bound variable");
  FormulaNode n;
  n.conn = c;
  n.var = std::move(var);
  n.arity = arity;
  n.kids = {std::move(body)};
  return mk(std::move(n));
}

}  // namespace detail

inline Formula forall_fo(std::string var, Formula body) {
  return detail::quant(Conn::ForallFo, std::move(var), 0, std::move(body));
}

inline Formula exists_fo(std::string var, Formula body) {
  return detail::quant(Conn::ExistsFo, std::move(var), 0, std::move(body));
}

inline Formula forall_so(std::string var, int arity, Formula body) {
  if (arity < 1) throw Error("forall-so: arity must be >= 1");
  return detail::quant(Conn::ForallSo, std::move(var), arity, std::move(body));
}

inline Formula exists_so(std::string var, int arity, Formula body) {
  if (arity < 1) throw Error("exists-so: arity must be >= 1");
  return detail::quant(Conn::ExistsSo, std::move(var), arity, std::move(body));
}

// ---------------------------------------------------------------------------
// Free variables.

struct FreeVars {
  std::set<std::string> fo;
  std::map<std::string, int> so;  // name -> arity
};

namespace detail {

inline void free_vars_rec(const Formula& f, std::set<std::string>& bound_fo,
                          std::set<std::string>& bound_so, FreeVars& out) {
  switch (f->conn) {
    case Conn::Atom: {
      if (f->pred.is_so_var() && !bound_so.count(f->pred.name)) {
        int arity = static_cast<int>(f->terms.size());
        auto [it, inserted] = out.so.emplace(f->pred.name, arity);
        if (!inserted && it->second != arity)
          throw Error("free_vars: second-order variable '" + f->pred.name +
                      "' used with arities " + std::to_string(it->second) +
                      " and " + std::to_string(arity));
      }
      for (const Term& t : f->terms)
        if (t.is_var() && !bound_fo.count(t.name)) out.fo.insert(t.name);
      return;
    }
    case Conn::ForallFo:
    case Conn::ExistsFo: {
      bool fresh = bound_fo.insert(f->var).second;
      free_vars_rec(f->kids[0], bound_fo, bound_so, out);
      if (fresh) bound_fo.erase(f->var);
      return;
    }
    case Conn::ForallSo:
    case Conn::ExistsSo: {
      bool fresh = bound_so.insert(f->var).second;
      free_vars_rec(f->kids[0], bound_fo, bound_so, out);
      if (fresh) bound_so.erase(f->var);
      return;
    }
    default:
      for (const Formula& k : f->kids)
        free_vars_rec(k, bound_fo, bound_so, out);
      return;
  }
}

}  // namespace detail

inline FreeVars free_vars(const Formula& f) {
  FreeVars out;
  std::set<std::string> bfo, bso;
  detail::free_vars_rec(f, bfo, bso, out);
  return out;
}

inline bool is_sentence(const Formula& f) {
  FreeVars fv = free_vars(f);
  return fv.fo.empty() && fv.so.empty();
}

// ---------------------------------------------------------------------------
// Desugaring the propositional connectives into nand.

inline Formula desugar_to_nand(const Formula& f) {
  auto neg = [](Formula a) { return nand(a, a); };
  switch (f->conn) {
    case Conn::Atom:
      return f;
    case Conn::Not:
      return neg(desugar_to_nand(f->kids[0]));
    case Conn::Nand:
      return nand(desugar_to_nand(f->kids[0]), desugar_to_nand(f->kids[1]));
    case Conn::And: {
      Formula acc = desugar_to_nand(f->kids[0]);
      for (size_t i = 1; i < f->kids.size(); ++i) {
        Formula ab = nand(acc, desugar_to_nand(f->kids[i]));
        acc = nand(ab, ab);
      }
      return acc;
    }
    case Conn::Or: {
      Formula acc = desugar_to_nand(f->kids[0]);
      for (size_t i = 1; i < f->kids.size(); ++i)
        acc = nand(neg(acc), neg(desugar_to_nand(f->kids[i])));
      return acc;
    }
    case Conn::Implies:
      return nand(desugar_to_nand(f->kids[0]),
                  neg(desugar_to_nand(f->kids[1])));
    case Conn::Iff: {
      // (a -> b) and (b -> a), each already in nand form.
      Formula a = desugar_to_nand(f->kids[0]);
      Formula b = desugar_to_nand(f->kids[1]);
      Formula ab = nand(a, neg(b));
      Formula ba = nand(b, neg(a));
      Formula both = nand(ab, ba);
      return nand(both, both);
    }
    case Conn::ForallFo:
      return forall_fo(f->var, desugar_to_nand(f->kids[0]));
    case Conn::ExistsFo:
      return exists_fo(f->var, desugar_to_nand(f->kids[0]));
    case Conn::ForallSo:
      return forall_so(f->var, f->arity, desugar_to_nand(f->kids[0]));
    case Conn::ExistsSo:
      return exists_so(f->var, f->arity, desugar_to_nand(f->kids[0]));
  }
  throw Error("desugar_to_nand: bad connective");
}

// ---------------------------------------------------------------------------
// Textual dump & parse. Round-trips exactly; used by golden tests.
//
//   term:        ?x (variable) | a1 (constant)
//   atom:        (ord ?x ?y) | (%X ?x)       '%' marks a second-order variable
//   connectives: (not f) (and f...) (or f...) (implies f g) (iff f g)
//                (nand f g)
//   quantifiers: (forall ?x f) (exists ?x f)
//                (forall-so %X 2 f) (exists-so %X 2 f)

namespace detail {

inline void dump_rec(const Formula& f, std::ostream& os) {
  switch (f->conn) {
    case Conn::Atom: {
      os << '(';
      if (f->pred.is_so_var()) os << '%';
      os << f->pred.name;
      for (const Term& t : f->terms) {
        os << ' ';
        if (t.is_var()) os << '?';
        os << t.name;
      }
      os << ')';
      return;
    }
    case Conn::Not:
    case Conn::And:
    case Conn::Or:
    case Conn::Implies:
    case Conn::Iff:
    case Conn::Nand: {
      static const std::map<Conn, const char*> names = {
          {Conn::Not, "not"},         {Conn::And, "and"},
          {Conn::Or, "or"},           {Conn::Implies, "implies"},
          {Conn::Iff, "iff"},         {Conn::Nand, "nand"},
      };
      os << '(' << names.at(f->conn);
      for (const Formula& k : f->kids) {
        os << ' ';
        dump_rec(k, os);
      }
      os << ')';
      return;
    }
    case Conn::ForallFo:
    case Conn::ExistsFo:
      os << '(' << (f->conn == Conn::ForallFo ? "forall" : "exists") << " ?"
         << f->var << ' ';
      dump_rec(f->kids[0], os);
      os << ')';
      return;
    case Conn::ForallSo:
    case Conn::ExistsSo:
      os << '(' << (f->conn == Conn::ForallSo ? "forall-so" : "exists-so")
         << " %" << f->var << ' ' << f->arity << ' ';
      dump_rec(f->kids[0], os);
      os << ')';
      return;
  }
}

inline Term parse_term(const Sexpr& e) {
  const std::string& a = e.as_atom();
  if (a.size() > 1 && a[0] == '?') return Term::var(a.substr(1));
  return Term::cnst(a);
}

inline std::string strip_fo(const Sexpr& e) {
  const std::string& a = e.as_atom();
  if (a.size() < 2 || a[0] != '?')
    throw FormatError("formula: expected ?var, got '" + a + "'");
  return a.substr(1);
}

inline std::string strip_so(const Sexpr& e) {
  const std::string& a = e.as_atom();
  if (a.size() < 2 || a[0] != '%')
    throw FormatError("formula: expected %Var, got '" + a + "'");
  return a.substr(1);
}

inline Formula parse_formula_rec(const Sexpr& e) {
  if (e.is_atom) throw FormatError("formula: bare atom '" + e.atom + "'");
  const std::string& h = e.head();
  auto need = [&](size_t k) {
    if (e.size() != k + 1)
      throw FormatError("formula: '" + h + "' expects " + std::to_string(k) +
                        " operands");
  };
  auto kid = [&](size_t i) { return parse_formula_rec(e.at(i)); };
  if (h == "not") {
    need(1);
    return mk_not(kid(1));
  }
  if (h == "and" || h == "or") {
    if (e.size() < 2) throw FormatError("formula: empty '" + h + "'");
    std::vector<Formula> kids;
    for (size_t i = 1; i < e.size(); ++i) kids.push_back(kid(i));
    return h == "and" ? mk_and(std::move(kids)) : mk_or(std::move(kids));
  }
  if (h == "implies") {
    need(2);
    return implies(kid(1), kid(2));
  }
  if (h == "iff") {
    need(2);
    return iff(kid(1), kid(2));
  }
  if (h == "nand") {
    need(2);
    return nand(kid(1), kid(2));
  }
  if (h == "forall" || h == "exists") {
    need(2);
    std::string v = strip_fo(e.at(1));
    return h == "forall" ? forall_fo(v, kid(2)) : exists_fo(v, kid(2));
  }
  if (h == "forall-so" || h == "exists-so") {
    need(3);
    std::string v = strip_so(e.at(1));
    int arity = 0;
    try {
      arity = std::stoi(e.at(2).as_atom());
    } catch (const std::exception&) {
      throw FormatError("formula: bad arity '" + e.at(2).as_atom() + "'");
    }
    return h == "forall-so" ? forall_so(v, arity, kid(3))
                            : exists_so(v, arity, kid(3));
  }
  // Anything else is an atom.
  std::string pname = h;
  Pred p = (pname.size() > 1 && pname[0] == '%') ? Pred::so_var(pname.substr(1))
                                                 : Pred::rel(pname);
  std::vector<Term> terms;
  for (size_t i = 1; i < e.size(); ++i) terms.push_back(parse_term(e.at(i)));
  return atom(std::move(p), std::move(terms));
}

}  // namespace detail

inline std::string dump(const Formula& f) {
  std::ostringstream os;
  detail::dump_rec(f, os);
  return os.str();
}

inline Formula parse_formula(std::string_view text) {
  return detail::parse_formula_rec(parse_sexpr(text));
}

}  // namespace somm::so
