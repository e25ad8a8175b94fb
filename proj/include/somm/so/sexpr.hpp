#pragma once

// Minimal s-expression reader used by the textual dump formats.
// A node is either an atom (token without whitespace or parens) or a list.

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "somm/error.hpp"

namespace somm::so {

struct Sexpr {
  bool is_atom = false;
  std::string atom;
  std::vector<Sexpr> items;

  static Sexpr make_atom(std::string s) {
    Sexpr e;
    e.is_atom = true;
    e.atom = std::move(s);
    return e;
  }
  static Sexpr make_list(std::vector<Sexpr> items) {
    Sexpr e;
    e.items = std::move(items);
    return e;
  }

  const Sexpr& at(size_t i) const {
    if (is_atom || i >= items.size())
      throw FormatError("s-expression: missing item " + std::to_string(i));
    return items[i];
  }
  size_t size() const { return is_atom ? 0 : items.size(); }
  const std::string& head() const {
    const Sexpr& h = at(0);
    if (!h.is_atom) throw FormatError("s-expression: list head is not an atom");
    return h.atom;
  }
  const std::string& as_atom() const {
    if (!is_atom) throw FormatError("s-expression: expected an atom");
    return atom;
  }
};

namespace detail {

inline void skip_space(std::string_view s, size_t& i) {
  while (i < s.size()) {
    if (s[i] == ';') {  // comment to end of line
      while (i < s.size() && s[i] != '\n') ++i;
    } else if (std::isspace(static_cast<unsigned char>(s[i]))) {
      ++i;
    } else {
      break;
    }
  }
}

inline Sexpr parse_sexpr_at(std::string_view s, size_t& i) {
  skip_space(s, i);
  if (i >= s.size()) throw FormatError("s-expression: unexpected end of input");
  if (s[i] == '(') {
    ++i;
    std::vector<Sexpr> items;
    for (;;) {
      skip_space(s, i);
      if (i >= s.size()) throw FormatError("s-expression: unbalanced '('");
      if (s[i] == ')') {
        ++i;
        return Sexpr::make_list(std::move(items));
      }
      items.push_back(parse_sexpr_at(s, i));
    }
  }
  if (s[i] == ')') throw FormatError("s-expression: unexpected ')'");
  size_t start = i;
  while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) &&
         s[i] != '(' && s[i] != ')' && s[i] != ';')
    ++i;
  return Sexpr::make_atom(std::string(s.substr(start, i - start)));
}

}  // namespace detail

inline Sexpr parse_sexpr(std::string_view s) {
  size_t i = 0;
  Sexpr e = detail::parse_sexpr_at(s, i);
  detail::skip_space(s, i);
  if (i != s.size()) throw FormatError("s-expression: trailing input");
  return e;
}

}  // namespace somm::so
