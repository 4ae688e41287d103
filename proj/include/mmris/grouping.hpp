#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "mmris/channel.hpp"
#include "mmris/path_select.hpp"
#include "mmris/scenario.hpp"

namespace mmris {

/// Undirected interference graph, one vertex per served user path.
class ConflictGraph {
 public:
  ConflictGraph() = default;
  explicit ConflictGraph(std::vector<int> users)
      : users_(std::move(users)), adj_(users_.size() * users_.size(), 0) {}

  int size() const { return static_cast<int>(users_.size()); }
  int user(int v) const { return users_[static_cast<std::size_t>(v)]; }
  const std::vector<int>& users() const { return users_; }

  bool adjacent(int a, int b) const { return adj_[idx(a, b)] != 0; }
  void add_edge(int a, int b) {
    if (a == b) return;
    adj_[idx(a, b)] = 1;
    adj_[idx(b, a)] = 1;
  }
  int degree(int v) const {
    int d = 0;
    for (int u = 0; u < size(); ++u) d += adjacent(v, u) ? 1 : 0;
    return d;
  }
  std::size_t num_edges() const {
    std::size_t e = 0;
    for (int a = 0; a < size(); ++a)
      for (int b = a + 1; b < size(); ++b) e += adjacent(a, b) ? 1 : 0;
    return e;
  }

 private:
  std::size_t idx(int a, int b) const {
    return static_cast<std::size_t>(a) * users_.size() + static_cast<std::size_t>(b);
  }
  std::vector<int> users_;
  std::vector<char> adj_;
};

/// Two paths conflict when they share a node or any pair of their non-BS
/// nodes (RISs and the users themselves) has LoS.
inline bool paths_conflict(const ReflectionPath& a, const ReflectionPath& b, const Scenario& s) {
  auto nodes_of = [&](const ReflectionPath& p) {
    std::vector<int> v = p.ris_sequence;
    v.push_back(s.user_node(p.user));
    return v;
  };
  for (int x : nodes_of(a))
    for (int y : nodes_of(b))
      if (x == y || visibility(x, y, s) == 1) return true;
  return false;
}

inline ConflictGraph build_conflict_graph(const std::vector<ReflectionPath>& paths,
                                          const Scenario& s) {
  std::vector<int> users;
  users.reserve(paths.size());
  for (const auto& p : paths) users.push_back(p.user);
  ConflictGraph g(std::move(users));
  for (int a = 0; a < g.size(); ++a)
    for (int b = a + 1; b < g.size(); ++b)
      if (paths_conflict(paths[static_cast<std::size_t>(a)], paths[static_cast<std::size_t>(b)], s))
        g.add_edge(a, b);
  return g;
}

/// Vertices by ascending degree (highest scheduling priority first); ties by
/// ascending user index.
inline std::vector<int> scheduling_index_order(const ConflictGraph& g) {
  std::vector<int> order(static_cast<std::size_t>(g.size()));
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> deg(order.size());
  for (int v = 0; v < g.size(); ++v) deg[static_cast<std::size_t>(v)] = g.degree(v);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const int da = deg[static_cast<std::size_t>(a)];
    const int db = deg[static_cast<std::size_t>(b)];
    if (da != db) return da < db;
    return g.user(a) < g.user(b);
  });
  return order;
}

struct ActivationGroup {
  int index = 0;             // 1-based q
  std::vector<int> members;  // user ordinals, ascending
};

struct GroupCover {
  std::vector<ActivationGroup> groups;
  std::vector<int> membership;  // v_k, indexed k-1; 0 for uncovered users

  int num_groups() const { return static_cast<int>(groups.size()); }
};

/// v_k = number of groups containing user k.
inline std::vector<int> membership_counts(const std::vector<ActivationGroup>& groups,
                                          int num_users) {
  std::vector<int> v(static_cast<std::size_t>(num_users), 0);
  for (const auto& g : groups)
    for (int k : g.members) ++v[static_cast<std::size_t>(k - 1)];
  return v;
}

/// Greedy MIS cover. Stage one: while uncovered paths remain, anchor on the
/// highest-priority uncovered path and add every path of `order` that is
/// non-adjacent to the set so far. Stage two: extend each set to maximality.
inline GroupCover cover_with_mis(const std::vector<int>& order, const ConflictGraph& g,
                                 int num_users) {
  if (order.empty()) return {{}, std::vector<int>(static_cast<std::size_t>(num_users), 0)};
  std::vector<char> uncovered(static_cast<std::size_t>(g.size()), 1);
  std::size_t remaining = order.size();
  std::vector<std::vector<int>> sets;

  auto independent_with = [&](const std::vector<int>& set, int v) {
    return std::none_of(set.begin(), set.end(), [&](int u) { return u == v || g.adjacent(u, v); });
  };

  while (remaining > 0) {
    int anchor = -1;
    for (int v : order)
      if (uncovered[static_cast<std::size_t>(v)]) {
        anchor = v;
        break;
      }
    std::vector<int> set{anchor};
    for (int v : order)
      if (v != anchor && independent_with(set, v)) set.push_back(v);
    for (int v : set) {
      if (uncovered[static_cast<std::size_t>(v)]) {
        uncovered[static_cast<std::size_t>(v)] = 0;
        --remaining;
      }
    }
    sets.push_back(std::move(set));
  }

  for (auto& set : sets)
    for (int v : order)
      if (independent_with(set, v)) set.push_back(v);

  GroupCover cover;
  for (std::size_t q = 0; q < sets.size(); ++q) {
    ActivationGroup group{static_cast<int>(q) + 1, {}};
    for (int v : sets[q]) group.members.push_back(g.user(v));
    std::sort(group.members.begin(), group.members.end());
    cover.groups.push_back(std::move(group));
  }
  cover.membership = membership_counts(cover.groups, num_users);
  return cover;
}

}  // namespace mmris
