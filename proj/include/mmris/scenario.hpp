#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mmris/common.hpp"

namespace mmris {

enum class NodeKind { BS, RIS, User };

inline const char* to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::BS: return "bs";
    case NodeKind::RIS: return "ris";
    case NodeKind::User: return "user";
  }
  return "?";
}

struct Node {
  int index = 0;
  NodeKind kind = NodeKind::User;
  Vec3 position = Vec3::Zero();
  // RIS only.
  int elements_x = 0;
  int elements_y = 0;
  Vec3 facing_normal = Vec3::UnitX();

  int elements() const { return kind == NodeKind::RIS ? elements_x * elements_y : 1; }
};

struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
};

/// Supplies the LoS indicator l(i,j). Geometry rules apply first, then
/// overrides: an override of 1 forces visibility, 0 forces blockage.
struct VisibilityRule {
  double max_range = std::numeric_limits<double>::infinity();
  std::vector<Box> obstacles;
  std::map<std::pair<int, int>, bool> overrides;  // keyed with first < second

  void set_override(int i, int j, bool visible) {
    overrides[{std::min(i, j), std::max(i, j)}] = visible;
  }
  std::optional<bool> override_for(int i, int j) const {
    auto it = overrides.find({std::min(i, j), std::max(i, j)});
    if (it == overrides.end()) return std::nullopt;
    return it->second;
  }
};

/// Full system description. Node indices: BS = 0, RISs 1..J, users J+1..J+K.
struct Scenario {
  std::string name;
  std::vector<Node> nodes;
  int bs_antennas = 1;
  double antenna_spacing = 0.03;
  double element_spacing = 0.03;
  double wavelength = 0.06;
  double ref_gain = 1.0;     // β0, linear
  double noise_power = 1.0;  // σ0², watts
  double tx_power = 1.0;     // P_T, watts
  Vec3 bs_boresight = Vec3::UnitX();
  VisibilityRule visibility;
  std::uint64_t rng_seed = 0;

  int num_ris() const {
    int j = 0;
    for (const auto& n : nodes) j += n.kind == NodeKind::RIS ? 1 : 0;
    return j;
  }
  int num_users() const {
    int k = 0;
    for (const auto& n : nodes) k += n.kind == NodeKind::User ? 1 : 0;
    return k;
  }
  int num_nodes() const { return static_cast<int>(nodes.size()); }

  /// Node index of user k (1-based user ordinal).
  int user_node(int k) const { return num_ris() + k; }
  /// User ordinal (1-based) of a user node index.
  int user_of_node(int node) const { return node - num_ris(); }

  const Node& node(int index) const {
    if (index < 0 || index >= num_nodes())
      throw std::invalid_argument("node index " + std::to_string(index) + " out of range");
    return nodes[static_cast<std::size_t>(index)];
  }
  bool is_ris(int index) const { return node(index).kind == NodeKind::RIS; }
  bool is_user(int index) const { return node(index).kind == NodeKind::User; }

  double distance(int i, int j) const { return (node(i).position - node(j).position).norm(); }
};

/// Splits an element count into a near-square URA (elements_x ≤ elements_y).
inline std::pair<int, int> split_elements(int count) {
  if (count < 1) throw std::invalid_argument("element count must be positive");
  int x = static_cast<int>(std::sqrt(static_cast<double>(count)));
  while (x > 1 && count % x != 0) --x;
  return {x, count / x};
}

/// Checks every Scenario/Node invariant. Messages start with the field path.
inline void validate(const Scenario& s) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (s.bs_antennas < 1) fail("bs_antennas: must be >= 1");
  if (!(s.wavelength > 0.0)) fail("wavelength_m: must be > 0");
  if (!(s.ref_gain > 0.0)) fail("ref_gain: must be > 0");
  if (!(s.noise_power > 0.0)) fail("noise_power: must be > 0");
  if (!(s.tx_power > 0.0)) fail("tx_power: must be > 0");
  if (!(s.antenna_spacing > 0.0)) fail("antenna_spacing_m: must be > 0");
  if (!(s.element_spacing > 0.0)) fail("element_spacing_m: must be > 0");
  if (std::fabs(s.bs_boresight.norm() - 1.0) > 1e-9) fail("bs_boresight: must have unit norm");
  if (s.nodes.empty()) fail("nodes: empty");

  int bs_count = 0;
  const int j_count = s.num_ris();
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    const Node& n = s.nodes[i];
    const std::string where = "nodes[" + std::to_string(i) + "]";
    if (n.index != static_cast<int>(i)) fail(where + ".index: expected " + std::to_string(i));
    if (!n.position.allFinite()) fail(where + ".position_m: not finite");
    const int idx = static_cast<int>(i);
    switch (n.kind) {
      case NodeKind::BS:
        ++bs_count;
        if (idx != 0) fail(where + ".kind: BS must be node 0");
        break;
      case NodeKind::RIS:
        if (idx < 1 || idx > j_count) fail(where + ".kind: RISs must occupy indices 1..J");
        if (n.elements_x < 1 || n.elements_y < 1) fail(where + ".elements: must be positive");
        if (std::fabs(n.facing_normal.norm() - 1.0) > 1e-9)
          fail(where + ".facing_normal: must have unit norm");
        break;
      case NodeKind::User:
        if (idx <= j_count) fail(where + ".kind: users must follow all RISs");
        break;
    }
  }
  if (bs_count != 1) fail("nodes: exactly one BS required, found " + std::to_string(bs_count));
  if (!(s.visibility.max_range > 0.0)) fail("visibility.max_range_m: must be > 0");
  for (std::size_t b = 0; b < s.visibility.obstacles.size(); ++b) {
    const Box& box = s.visibility.obstacles[b];
    if (!(box.min.array() <= box.max.array()).all())
      fail("visibility.obstacles[" + std::to_string(b) + "]: min must not exceed max");
  }
  for (const auto& [key, _] : s.visibility.overrides) {
    if (key.first < 0 || key.second >= s.num_nodes() || key.first == key.second)
      fail("visibility.overrides: invalid pair (" + std::to_string(key.first) + "," +
           std::to_string(key.second) + ")");
  }
}

}  // namespace mmris
