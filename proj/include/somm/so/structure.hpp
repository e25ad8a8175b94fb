#pragma once

// Finite relational structures: a universe {0, .., n-1}, named constants and
// named relations of fixed arity. Every structure carries
//   - one constant a1..an per element,
//   - "=" as the identity relation,
//   - "empty" as an always-empty unary relation.

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "somm/error.hpp"
#include "somm/so/formula.hpp"
#include "somm/so/sexpr.hpp"

namespace somm::so {

struct Relation {
  int arity = 1;
  std::set<std::vector<int>> tuples;

  bool contains(const std::vector<int>& t) const { return tuples.count(t) > 0; }
};

// Assignment of first-order variables to elements and second-order variables
// to relation values.
struct Environment {
  std::map<std::string, int> fo;
  std::map<std::string, Relation> so;
};

class RelStructure {
 public:
  explicit RelStructure(int universe_size) : n_(universe_size) {
    if (universe_size < 1)
      throw Error("structure: universe must have at least one element");
    for (int i = 0; i < n_; ++i)
      constants_["a" + std::to_string(i + 1)] = i;
    Relation id{2, {}};
    for (int i = 0; i < n_; ++i) id.tuples.insert({i, i});
    relations_["="] = std::move(id);
    relations_["empty"] = Relation{1, {}};
  }

  int size() const { return n_; }

  void add_constant(const std::string& name, int elem) {
    detail::check_name(name, "constant");
    check_elem(elem);
    auto [it, inserted] = constants_.emplace(name, elem);
    if (!inserted && it->second != elem)
      throw Error("structure: constant '" + name + "' already bound");
  }

  void set_relation(const std::string& name, int arity,
                    std::set<std::vector<int>> tuples) {
    detail::check_name(name, "relation");
    if (name == "=" || name == "empty")
      throw Error("structure: relation '" + name + "' is built in");
    if (arity < 1) throw Error("structure: arity must be >= 1");
    for (const auto& t : tuples) {
      if (static_cast<int>(t.size()) != arity)
        throw Error("structure: tuple arity mismatch in '" + name + "'");
      for (int e : t) check_elem(e);
    }
    relations_[name] = Relation{arity, std::move(tuples)};
  }

  bool has_constant(const std::string& name) const {
    return constants_.count(name) > 0;
  }
  int constant(const std::string& name) const {
    auto it = constants_.find(name);
    if (it == constants_.end())
      throw Error("structure: unknown constant '" + name + "'");
    return it->second;
  }

  bool has_relation(const std::string& name) const {
    return relations_.count(name) > 0;
  }
  const Relation& relation(const std::string& name) const {
    auto it = relations_.find(name);
    if (it == relations_.end())
      throw Error("structure: unknown relation '" + name + "'");
    return it->second;
  }

  const std::map<std::string, int>& constants() const { return constants_; }
  const std::map<std::string, Relation>& relations() const {
    return relations_;
  }

 private:
  void check_elem(int e) const {
    if (e < 0 || e >= n_)
      throw Error("structure: element " + std::to_string(e) +
                  " outside universe of size " + std::to_string(n_));
  }

  int n_;
  std::map<std::string, int> constants_;
  std::map<std::string, Relation> relations_;
};

// ---------------------------------------------------------------------------
// Textual dump & parse. Built-in constants and relations are omitted.
//
//   (structure 3
//     (constants (root 0))
//     (relations
//       (ord 2 (0 1) (0 2))
//       (conflict 2 (1 2))))

inline std::string dump(const RelStructure& rs) {
  std::ostringstream os;
  os << "(structure " << rs.size() << "\n  (constants";
  for (const auto& [name, elem] : rs.constants()) {
    if (name.size() >= 2 && name[0] == 'a') {
      // Skip the automatic a<i> constant for element i.
      try {
        if (std::stoi(name.substr(1)) == elem + 1) continue;
      } catch (const std::exception&) {
      }
    }
    os << " (" << name << ' ' << elem << ')';
  }
  os << ")\n  (relations";
  for (const auto& [name, rel] : rs.relations()) {
    if (name == "=" || name == "empty") continue;
    os << "\n    (" << name << ' ' << rel.arity;
    for (const auto& t : rel.tuples) {
      os << " (";
      for (size_t i = 0; i < t.size(); ++i) os << (i ? " " : "") << t[i];
      os << ')';
    }
    os << ')';
  }
  os << "))";
  return os.str();
}

inline RelStructure parse_structure(std::string_view text) {
  Sexpr e = parse_sexpr(text);
  if (e.is_atom || e.head() != "structure")
    throw FormatError("structure: expected (structure n ...)");
  int n = 0;
  try {
    n = std::stoi(e.at(1).as_atom());
  } catch (const std::exception&) {
    throw FormatError("structure: bad universe size");
  }
  RelStructure rs(n);
  for (size_t i = 2; i < e.size(); ++i) {
    const Sexpr& sec = e.at(i);
    const std::string& h = sec.head();
    if (h == "constants") {
      for (size_t j = 1; j < sec.size(); ++j) {
        const Sexpr& c = sec.at(j);
        rs.add_constant(c.at(0).as_atom(), std::stoi(c.at(1).as_atom()));
      }
    } else if (h == "relations") {
      for (size_t j = 1; j < sec.size(); ++j) {
        const Sexpr& r = sec.at(j);
        int arity = std::stoi(r.at(1).as_atom());
        std::set<std::vector<int>> tuples;
        for (size_t k = 2; k < r.size(); ++k) {
          const Sexpr& t = r.at(k);
          std::vector<int> tup;
          for (size_t m = 0; m < t.size(); ++m)
            tup.push_back(std::stoi(t.at(m).as_atom()));
          tuples.insert(std::move(tup));
        }
        rs.set_relation(r.at(0).as_atom(), arity, std::move(tuples));
      }
    } else {
      throw FormatError("structure: unknown section '" + h + "'");
    }
  }
  return rs;
}

}  // namespace somm::so
