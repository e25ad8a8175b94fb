#pragma once

// Expansion of a litmus test into an event structure. Each thread becomes a
// tree below the initialisation writes: a load forks one read per value the
// location can hold (siblings pairwise in conflict), a store adds a single
// write, and a conditional follows the branch selected by the registers on
// the current path. Writes justify the reads that match their location and
// value. The last event of every control path whose registers satisfy the
// final condition is marked final.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "somm/error.hpp"
#include "somm/es/event_structure.hpp"
#include "somm/litmus/litmus.hpp"

namespace somm::litmus {

struct BuildOptions {
  // When set, every location draws read values from this domain instead of
  // its initial value plus every constant stored to it. Must cover those.
  std::optional<std::set<int>> values;
  int event_cap = 10000;
};

// Expansion grew past BuildOptions::event_cap.
struct EventCapError : Error {
  using Error::Error;
};

namespace detail {

inline void collect_store_values(const std::vector<Stmt>& body,
                                 std::map<std::string, std::set<int>>& doms) {
  for (const Stmt& s : body) {
    if (s.kind == StmtKind::Store) doms[s.loc].insert(s.value);
    if (s.kind == StmtKind::If) {
      collect_store_values(s.then_body, doms);
      collect_store_values(s.else_body, doms);
    }
  }
}

}  // namespace detail

inline es::EventStructure build_event_structure(const LitmusTest& t,
                                                const BuildOptions& opts = {}) {
  if (t.threads.empty()) throw Error("litmus: no threads");

  std::map<std::string, std::set<int>> doms;
  for (const auto& [loc, v] : t.init) doms[loc].insert(v);
  for (const auto& th : t.threads) detail::collect_store_values(th, doms);
  if (opts.values) {
    for (const auto& [loc, dom] : doms)
      for (int v : dom)
        if (!opts.values->count(v))
          throw Error("litmus: value domain override omits " +
                      std::to_string(v) + ", used at location '" + loc + "'");
    for (auto& [loc, dom] : doms) dom = *opts.values;
  }

  es::Builder b;
  std::vector<es::Event> evs;  // mirror of the builder, for justifies
  auto add = [&](const es::Event& e) {
    if (static_cast<int>(evs.size()) >= opts.event_cap)
      throw EventCapError("litmus: event count exceeds the cap of " +
                          std::to_string(opts.event_cap));
    evs.push_back(e);
    return b.add_event(e);
  };

  int last_init = -1;
  for (const auto& [loc, v] : t.init) {
    es::Event e;
    e.is_write = true;
    e.loc = loc;
    e.value = v;
    const int id = add(e);
    if (last_init >= 0) b.order(last_init, id);
    last_init = id;
  }

  struct Leaf {
    int last = -1;  // last event on the path, -1 when the path is empty
    std::map<std::string, int> env;
  };
  struct Frame {
    const std::vector<Stmt>* body;
    std::size_t idx;
  };

  std::vector<std::vector<Leaf>> leaves(t.threads.size());
  int tid = 0;

  std::function<void(std::vector<Frame>, int, std::map<std::string, int>)>
      expand = [&](std::vector<Frame> stack, int last,
                   std::map<std::string, int> env) {
        while (!stack.empty() && stack.back().idx >= stack.back().body->size())
          stack.pop_back();
        if (stack.empty()) {
          leaves[tid].push_back(Leaf{last, std::move(env)});
          return;
        }
        const Stmt& s = (*stack.back().body)[stack.back().idx++];
        switch (s.kind) {
          case StmtKind::Store: {
            es::Event e;
            e.is_write = true;
            e.loc = s.loc;
            e.value = s.value;
            e.tid = tid;
            const int id = add(e);
            const int parent = last >= 0 ? last : last_init;
            if (parent >= 0) b.order(parent, id);
            expand(std::move(stack), id, std::move(env));
            break;
          }
          case StmtKind::Load: {
            const std::set<int>& dom = doms.at(s.loc);
            std::vector<int> siblings;
            for (int v : dom) {
              es::Event e;
              e.is_read = true;
              e.loc = s.loc;
              e.value = v;
              e.tid = tid;
              const int id = add(e);
              const int parent = last >= 0 ? last : last_init;
              if (parent >= 0) b.order(parent, id);
              siblings.push_back(id);
            }
            for (std::size_t i = 0; i < siblings.size(); ++i)
              for (std::size_t j = i + 1; j < siblings.size(); ++j)
                b.conflict(siblings[i], siblings[j]);
            std::size_t k = 0;
            for (int v : dom) {
              auto env2 = env;
              env2[s.reg] = v;
              expand(stack, siblings[k], std::move(env2));
              ++k;
            }
            break;
          }
          case StmtKind::If: {
            const auto it = env.find(s.reg);
            if (it == env.end())
              throw ParseError(s.line, s.col,
                               "register '" + s.reg +
                                   "' used before assignment");
            const std::vector<Stmt>& body =
                it->second == s.value ? s.then_body : s.else_body;
            stack.push_back(Frame{&body, 0});
            expand(std::move(stack), last, std::move(env));
            break;
          }
        }
      };

  for (tid = 0; tid < static_cast<int>(t.threads.size()); ++tid)
    expand({Frame{&t.threads[tid], 0}}, -1, {});

  for (int w = 0; w < static_cast<int>(evs.size()); ++w)
    for (int r = 0; r < static_cast<int>(evs.size()); ++r)
      if (evs[w].is_write && evs[r].is_read && evs[w].loc == evs[r].loc &&
          evs[w].value == evs[r].value)
        b.justify(w, r);

  // A final condition clause constrains the thread owning its register;
  // threads not mentioned satisfy it on every path.
  std::map<std::string, int> owner;
  for (int i = 0; i < static_cast<int>(t.threads.size()); ++i) {
    std::set<std::string> loads;
    detail::collect_loads(t.threads[i], loads);
    for (const auto& r : loads) owner.emplace(r, i);
  }
  for (int i = 0; i < static_cast<int>(t.threads.size()); ++i) {
    std::vector<std::pair<std::string, int>> clauses;
    for (const auto& [reg, v] : t.finals) {
      const auto it = owner.find(reg);
      if (it == owner.end())
        throw Error("litmus: register '" + reg +
                    "' in the final condition is never assigned");
      if (it->second == i) clauses.emplace_back(reg, v);
    }
    bool any = false;
    for (const Leaf& leaf : leaves[i]) {
      bool sat = true;
      for (const auto& [reg, v] : clauses) {
        const auto it = leaf.env.find(reg);
        if (it == leaf.env.end() || it->second != v) {
          sat = false;
          break;
        }
      }
      if (!sat) continue;
      any = true;
      if (leaf.last >= 0) b.set_final(leaf.last);
    }
    if (!clauses.empty() && !any)
      throw Error("litmus: the final condition cannot be met on thread " +
                  std::to_string(i + 1));
  }

  return b.build();
}

// The n-thread store buffer test: thread i stores 1 to x_i and then reads
// x_{i-1} (thread 1 reads x_n) into r_i; the question is whether every read
// can see the initial zero.
inline LitmusTest gen_store_buffer(int n) {
  if (n < 2) throw Error("store buffer generator needs at least 2 threads");
  LitmusTest t;
  t.name = "SB(" + std::to_string(n) + ")";
  for (int i = 1; i <= n; ++i)
    t.init.emplace_back("x" + std::to_string(i), 0);
  for (int i = 1; i <= n; ++i) {
    const int prev = i == 1 ? n : i - 1;
    Stmt store;
    store.kind = StmtKind::Store;
    store.loc = "x" + std::to_string(i);
    store.value = 1;
    Stmt load;
    load.kind = StmtKind::Load;
    load.reg = "r" + std::to_string(i);
    load.loc = "x" + std::to_string(prev);
    t.threads.push_back({store, load});
  }
  for (int i = 1; i <= n; ++i)
    t.finals.emplace_back("r" + std::to_string(i), 0);
  return t;
}

}  // namespace somm::litmus
