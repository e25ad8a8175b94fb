#pragma once

// Event structures: a universe of read/write events carrying a program
// order, a conflict relation, a justification relation between writes and
// reads, and a same-location equivalence on memory accesses. A subset of
// events is marked final to single out the behaviour of interest.
//
// The laws checked by validate():
//
//   po-reflexive, po-antisymmetric, po-transitive
//     program order is a partial order, stored reflexively
//   read-write-exclusive
//     no event is both a read and a write
//   justifies-write-read
//     justification pairs go from a write to a read
//   conflict-symmetric, conflict-irreflexive
//   conflict-forward-closed
//     conflict(x,y) and y <= z imply conflict(x,z)
//   conflict-inherits-predecessors
//     conflict(x,y) and z < y imply z < x or conflict(z,x)
//   conflict-semi-transitive
//     conflict(x,y) and conflict(y,z) imply conflict(x,z) or that x and z
//     are ordered
//
// The last two are stated here in a weaker form than their usual
// presentation. Under forward closure, the stronger forms reject structures
// as plain as two conflicting loads followed by dependent stores, so they
// cannot have been intended to apply to the closed relation; the versions
// above hold for every structure the litmus frontend can produce.

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "somm/error.hpp"
#include "somm/so/combinators.hpp"
#include "somm/so/formula.hpp"
#include "somm/so/structure.hpp"

namespace somm::es {

struct Event {
  bool is_read = false;
  bool is_write = false;
  bool is_final = false;
  std::string loc;  // empty when no memory location is touched
  int value = 0;
  int tid = -1;  // -1 for initialisation events
  std::string label;
};

struct Violation {
  std::string law;
  std::vector<int> witness;
};

class EventStructure {
 public:
  int size() const { return static_cast<int>(events_.size()); }
  const Event& event(int i) const { return events_.at(i); }
  const std::vector<Event>& events() const { return events_; }

  bool po(int a, int b) const { return po_.count({a, b}) > 0; }
  bool lt(int a, int b) const { return a != b && po(a, b); }
  bool conflict(int a, int b) const { return conflict_.count({a, b}) > 0; }
  bool justifies(int w, int r) const { return justifies_.count({w, r}) > 0; }
  bool is_access(int a) const {
    const Event& e = events_[a];
    return (e.is_read || e.is_write) && !e.loc.empty();
  }
  bool sloc(int a, int b) const {
    return is_access(a) && is_access(b) && events_[a].loc == events_[b].loc;
  }

  const std::set<std::pair<int, int>>& po_pairs() const { return po_; }
  const std::set<std::pair<int, int>>& conflict_pairs() const {
    return conflict_;
  }
  const std::set<std::pair<int, int>>& justifies_pairs() const {
    return justifies_;
  }

  // One violation per broken law, with the lexicographically first witness.
  std::vector<Violation> validate() const {
    std::vector<Violation> out;
    const int n = size();
    auto report = [&](const char* law, std::vector<int> w) {
      for (const auto& v : out)
        if (v.law == law) return;
      out.push_back(Violation{law, std::move(w)});
    };
    for (int x = 0; x < n; ++x)
      if (!po(x, x)) report("po-reflexive", {x});
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        if (x != y && po(x, y) && po(y, x)) report("po-antisymmetric", {x, y});
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) {
        if (!po(x, y)) continue;
        for (int z = 0; z < n; ++z)
          if (po(y, z) && !po(x, z)) report("po-transitive", {x, y, z});
      }
    for (int x = 0; x < n; ++x)
      if (events_[x].is_read && events_[x].is_write)
        report("read-write-exclusive", {x});
    for (const auto& [w, r] : justifies_)
      if (!events_[w].is_write || !events_[r].is_read)
        report("justifies-write-read", {w, r});
    for (const auto& [x, y] : conflict_) {
      if (!conflict(y, x)) report("conflict-symmetric", {x, y});
      if (x == y) report("conflict-irreflexive", {x});
    }
    for (const auto& [x, y] : conflict_)
      for (int z = 0; z < n; ++z)
        if (po(y, z) && !conflict(x, z))
          report("conflict-forward-closed", {x, y, z});
    for (const auto& [x, y] : conflict_)
      for (int z = 0; z < n; ++z)
        if (lt(z, y) && !lt(z, x) && !conflict(z, x))
          report("conflict-inherits-predecessors", {x, y, z});
    for (const auto& [x, y] : conflict_)
      for (int z = 0; z < n; ++z)
        if (conflict(y, z) && !conflict(x, z) && !po(x, z) && !po(z, x))
          report("conflict-semi-transitive", {x, y, z});
    return out;
  }

  // Relations: final, read, write (arity 1); conflict, justifies, sloc, le,
  // lt (arity 2). Event i is universe element i.
  so::RelStructure to_rel_structure() const {
    auto bad = validate();
    if (!bad.empty()) {
      std::string msg = "event structure: " + std::to_string(bad.size()) +
                        " law(s) violated; first: " + bad.front().law + " at (";
      for (size_t i = 0; i < bad.front().witness.size(); ++i)
        msg += (i ? "," : "") + std::to_string(bad.front().witness[i]);
      throw Error(msg + ")");
    }
    so::RelStructure rs(size());
    std::set<std::vector<int>> rd, wr, fin, lt_rel, sl;
    for (int i = 0; i < size(); ++i) {
      if (events_[i].is_read) rd.insert({i});
      if (events_[i].is_write) wr.insert({i});
      if (events_[i].is_final) fin.insert({i});
    }
    std::set<std::vector<int>> le_rel, cnf, just;
    for (const auto& [a, b] : po_) {
      le_rel.insert({a, b});
      if (a != b) lt_rel.insert({a, b});
    }
    for (const auto& [a, b] : conflict_) cnf.insert({a, b});
    for (const auto& [a, b] : justifies_) just.insert({a, b});
    for (int a = 0; a < size(); ++a)
      for (int b = 0; b < size(); ++b)
        if (sloc(a, b)) sl.insert({a, b});
    rs.set_relation("read", 1, std::move(rd));
    rs.set_relation("write", 1, std::move(wr));
    rs.set_relation("final", 1, std::move(fin));
    rs.set_relation("le", 2, std::move(le_rel));
    rs.set_relation("lt", 2, std::move(lt_rel));
    rs.set_relation("conflict", 2, std::move(cnf));
    rs.set_relation("justifies", 2, std::move(just));
    rs.set_relation("sloc", 2, std::move(sl));
    return rs;
  }

  // Builds a structure exactly as given, with no closure applied. validate()
  // reports whatever laws the raw relations break.
  static EventStructure from_raw(std::vector<Event> events,
                                 std::set<std::pair<int, int>> po,
                                 std::set<std::pair<int, int>> conflict,
                                 std::set<std::pair<int, int>> justifies) {
    if (events.empty()) throw Error("event structure: no events");
    const int n = static_cast<int>(events.size());
    auto check = [n](const std::set<std::pair<int, int>>& rel) {
      for (const auto& [a, b] : rel)
        if (a < 0 || a >= n || b < 0 || b >= n)
          throw Error("event structure: pair out of range");
    };
    check(po);
    check(conflict);
    check(justifies);
    EventStructure es;
    es.events_ = std::move(events);
    es.po_ = std::move(po);
    es.conflict_ = std::move(conflict);
    es.justifies_ = std::move(justifies);
    return es;
  }

 private:
  friend class Builder;
  std::vector<Event> events_;
  std::set<std::pair<int, int>> po_;         // reflexive
  std::set<std::pair<int, int>> conflict_;   // symmetric, closed
  std::set<std::pair<int, int>> justifies_;  // (write, read)
};

class Builder {
 public:
  int add_event(Event e) {
    events_.push_back(std::move(e));
    return static_cast<int>(events_.size()) - 1;
  }

  // a comes before b in program order.
  void order(int a, int b) {
    check(a);
    check(b);
    po_edges_.emplace(a, b);
  }

  void conflict(int a, int b) {
    check(a);
    check(b);
    if (a == b) throw Error("event structure: self-conflict seeded");
    conflict_seeds_.emplace(a, b);
  }

  void justify(int w, int r) {
    check(w);
    check(r);
    justifies_.emplace(w, r);
  }

  // Marks an already added event as final.
  void set_final(int e) {
    check(e);
    events_[static_cast<std::size_t>(e)].is_final = true;
  }

  // Closes program order reflexively and transitively, then closes conflict
  // under symmetry and forward propagation along program order.
  EventStructure build() const {
    if (events_.empty()) throw Error("event structure: no events");
    const int n = static_cast<int>(events_.size());
    EventStructure es;
    es.events_ = events_;
    std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
    for (int i = 0; i < n; ++i) reach[i][i] = 1;
    for (const auto& [a, b] : po_edges_) reach[a][b] = 1;
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) {
        if (!reach[i][k]) continue;
        for (int j = 0; j < n; ++j)
          if (reach[k][j]) reach[i][j] = 1;
      }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (reach[i][j]) es.po_.emplace(i, j);
    std::set<std::pair<int, int>> cnf;
    for (const auto& [a, b] : conflict_seeds_) {
      cnf.emplace(a, b);
      cnf.emplace(b, a);
    }
    for (bool grew = true; grew;) {
      grew = false;
      std::set<std::pair<int, int>> next = cnf;
      for (const auto& [x, y] : cnf)
        for (int z = 0; z < n; ++z)
          if (reach[y][z]) {
            if (next.emplace(x, z).second) grew = true;
            if (next.emplace(z, x).second) grew = true;
          }
      cnf.swap(next);
    }
    es.conflict_ = std::move(cnf);
    es.justifies_ = justifies_;
    return es;
  }

 private:
  void check(int e) const {
    if (e < 0 || e >= static_cast<int>(events_.size()))
      throw Error("event structure: unknown event " + std::to_string(e));
  }

  std::vector<Event> events_;
  std::set<std::pair<int, int>> po_edges_;
  std::set<std::pair<int, int>> conflict_seeds_;
  std::set<std::pair<int, int>> justifies_;
};

// A set is a configuration when it contains no conflicting pair and is
// downward closed under program order.
inline so::Formula mk_valid_config(const so::PredFn& x) {
  using namespace so;
  if (x.arity != 1) throw Error("valid config: unary predicate required");
  std::string a = fresh_fo_name();
  std::string b = fresh_fo_name();
  Term ta = Term::var(a);
  Term tb = Term::var(b);
  Formula no_conflict = forall_fo(
      a, forall_fo(b, implies(mk_and(x(ta), x(tb)),
                              mk_not(rel_atom("conflict", {ta, tb})))));
  std::string d = fresh_fo_name();
  std::string c = fresh_fo_name();
  Term td = Term::var(d);
  Term tc = Term::var(c);
  Formula downward = forall_fo(
      d, implies(x(td), forall_fo(c, implies(rel_atom("le", {tc, td}), x(tc)))));
  return mk_and(std::move(no_conflict), std::move(downward));
}

inline so::Formula mk_valid_config(const std::string& name) {
  return mk_valid_config(so::so_pred(name, 1));
}

// A configuration is an execution of interest when every final event is in
// the set or in conflict with a final event in the set.
inline so::Formula mk_final_config(const so::PredFn& x) {
  using namespace so;
  if (x.arity != 1) throw Error("final config: unary predicate required");
  Formula valid = mk_valid_config(x);
  std::string a = fresh_fo_name();
  std::string b = fresh_fo_name();
  Term ta = Term::var(a);
  Term tb = Term::var(b);
  Formula coverage = forall_fo(
      a, implies(mk_and(rel_atom("final", {ta}), mk_not(x(ta))),
                 exists_fo(b, mk_and({rel_atom("conflict", {ta, tb}),
                                      rel_atom("final", {tb}), x(tb)}))));
  return mk_and(std::move(valid), std::move(coverage));
}

inline so::Formula mk_final_config(const std::string& name) {
  return mk_final_config(so::so_pred(name, 1));
}

}  // namespace somm::es
