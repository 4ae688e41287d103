#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mmris/mmris.hpp"

namespace testing_support {

using namespace mmris;

inline std::string scenario_path(const std::string& name) {
  return std::string(MMRIS_SCENARIO_DIR) + "/" + name;
}

/// Builds a scenario with the BS at `bs`, RISs and users in the given order.
struct ScenarioBuilder {
  Scenario s;

  explicit ScenarioBuilder(int bs_antennas = 4, Vec3 bs = Vec3::Zero()) {
    s.bs_antennas = bs_antennas;
    s.wavelength = 0.06;
    s.antenna_spacing = 0.03;
    s.element_spacing = 0.03;
    s.ref_gain = 1e-4;
    s.noise_power = 1e-10;
    s.tx_power = 1.0;
    Node b;
    b.index = 0;
    b.kind = NodeKind::BS;
    b.position = bs;
    s.nodes.push_back(b);
  }
  ScenarioBuilder& ris(Vec3 pos, Vec3 normal, int mx, int my) {
    Node n;
    n.index = static_cast<int>(s.nodes.size());
    n.kind = NodeKind::RIS;
    n.position = pos;
    n.facing_normal = normal.normalized();
    n.elements_x = mx;
    n.elements_y = my;
    s.nodes.push_back(n);
    return *this;
  }
  ScenarioBuilder& user(Vec3 pos) {
    Node n;
    n.index = static_cast<int>(s.nodes.size());
    n.kind = NodeKind::User;
    n.position = pos;
    s.nodes.push_back(n);
    return *this;
  }
  Scenario build() const {
    validate(s);
    return s;
  }
};

inline Vec3 random_point(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

inline CRowVector random_row(std::mt19937_64& rng, int m, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  CRowVector h(m);
  for (int i = 0; i < m; ++i) h(i) = Complex(n(rng), n(rng));
  return h;
}

/// A random chain BS → RIS_1 → … → RIS_n → user in free space, each RIS
/// turned so both neighbours sit in front of it. Element counts vary.
inline std::pair<Scenario, ReflectionPath> random_chain(std::mt19937_64& rng, int hops) {
  std::uniform_int_distribution<int> dim(1, 5);
  std::uniform_int_distribution<int> ant(1, 8);
  std::vector<Vec3> pts{random_point(rng, 0.0, 20.0)};
  for (int n = 0; n <= hops; ++n) {
    Vec3 p;
    do {
      p = random_point(rng, 0.0, 20.0);
    } while ((p - pts.back()).norm() < 1.0);
    pts.push_back(p);
  }
  ScenarioBuilder b(ant(rng), pts[0]);
  b.s.ref_gain = db_to_linear(-46.4);
  for (int n = 1; n <= hops; ++n) {
    const Vec3 to_prev = (pts[static_cast<std::size_t>(n - 1)] - pts[static_cast<std::size_t>(n)]).normalized();
    const Vec3 to_next = (pts[static_cast<std::size_t>(n + 1)] - pts[static_cast<std::size_t>(n)]).normalized();
    Vec3 normal = to_prev + to_next;
    if (normal.norm() < 1e-3) normal = to_prev.cross(Vec3::UnitZ()) + 0.5 * to_prev;
    b.ris(pts[static_cast<std::size_t>(n)], normal, dim(rng), dim(rng));
  }
  b.user(pts.back());
  ReflectionPath p;
  p.user = 1;
  for (int n = 1; n <= hops; ++n) p.ris_sequence.push_back(n);
  return {b.build(), p};
}

/// Random positions, element counts and normals; LoS decided entirely by
/// overrides with probability `density` per pair.
inline Scenario random_override_scenario(std::mt19937_64& rng, int j, int k, double density) {
  std::uniform_int_distribution<int> dim(1, 6);
  std::bernoulli_distribution coin(density);
  ScenarioBuilder b(4, random_point(rng, 0.0, 20.0));
  b.s.ref_gain = db_to_linear(-46.4);
  for (int r = 0; r < j; ++r) b.ris(random_point(rng, 0.0, 20.0), random_point(rng, -1.0, 1.0) + Vec3(0.01, 0, 0), dim(rng), dim(rng));
  for (int u = 0; u < k; ++u) b.user(random_point(rng, 0.0, 20.0));
  for (int a = 0; a < b.s.num_nodes(); ++a)
    for (int c = a + 1; c < b.s.num_nodes(); ++c) b.s.visibility.set_override(a, c, coin(rng));
  return b.build();
}

/// Minimum total weight and lexicographically smallest vertex sequence over
/// every simple BS → RIS… → user path, by depth-first enumeration.
struct BrutePath {
  double weight = std::numeric_limits<double>::infinity();
  std::vector<int> vertices;
  bool found() const { return std::isfinite(weight); }
};

inline BrutePath brute_force_best_path(int user, const Scenario& s, int max_hops = 1 << 20) {
  const int target = s.user_node(user);
  BrutePath best;
  std::vector<int> stack{0};
  std::vector<char> used(static_cast<std::size_t>(s.num_nodes()), 0);
  std::function<void(double)> walk = [&](double w) {
    const int at = stack.back();
    if (at != 0 && visibility(at, target, s) == 1) {
      const double total = w + link_weight(at, target, s);
      std::vector<int> seq = stack;
      seq.push_back(target);
      if (total < best.weight || (total == best.weight && seq < best.vertices)) {
        best.weight = total;
        best.vertices = seq;
      }
    }
    if (static_cast<int>(stack.size()) - 1 >= max_hops) return;
    for (int r = 1; r <= s.num_ris(); ++r) {
      if (used[static_cast<std::size_t>(r)] || visibility(at, r, s) != 1) continue;
      used[static_cast<std::size_t>(r)] = 1;
      stack.push_back(r);
      walk(w + link_weight(at, r, s));
      stack.pop_back();
      used[static_cast<std::size_t>(r)] = 0;
    }
  };
  walk(0.0);
  return best;
}

inline ConflictGraph random_conflict_graph(std::mt19937_64& rng, int k, double density) {
  std::vector<int> users(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) users[static_cast<std::size_t>(i)] = i + 1;
  ConflictGraph g(users);
  std::bernoulli_distribution coin(density);
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b)
      if (coin(rng)) g.add_edge(a, b);
  return g;
}

inline bool is_independent(const ConflictGraph& g, const std::vector<int>& vertices) {
  for (std::size_t a = 0; a < vertices.size(); ++a)
    for (std::size_t b = a + 1; b < vertices.size(); ++b)
      if (vertices[a] == vertices[b] || g.adjacent(vertices[a], vertices[b])) return false;
  return true;
}

inline bool is_maximal(const ConflictGraph& g, const std::vector<int>& vertices) {
  for (int v = 0; v < g.size(); ++v) {
    if (std::find(vertices.begin(), vertices.end(), v) != vertices.end()) continue;
    std::vector<int> grown = vertices;
    grown.push_back(v);
    if (is_independent(g, grown)) return false;
  }
  return true;
}

/// Every maximal independent set as a sorted list of user ordinals.
inline std::vector<std::vector<int>> all_maximal_independent_sets(const ConflictGraph& g) {
  std::vector<std::vector<int>> out;
  const int n = g.size();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<int> vs;
    for (int v = 0; v < n; ++v)
      if (mask & (1u << v)) vs.push_back(v);
    if (!is_independent(g, vs) || !is_maximal(g, vs)) continue;
    std::vector<int> users;
    for (int v : vs) users.push_back(g.user(v));
    std::sort(users.begin(), users.end());
    out.push_back(users);
  }
  return out;
}

/// Vertex index of each group member; groups store user ordinals.
inline std::vector<int> vertices_of(const ConflictGraph& g, const ActivationGroup& group) {
  std::vector<int> vs;
  for (int u : group.members)
    for (int v = 0; v < g.size(); ++v)
      if (g.user(v) == u) vs.push_back(v);
  return vs;
}

/// Minimum powers meeting both targets with fixed unit directions, or +inf.
inline double powers_for_directions(const CRowVector& h1, const CRowVector& h2, const CVector& u1,
                                    const CVector& u2, double g1, double g2, double noise) {
  const double a11 = std::norm((h1 * u1)(0)), a12 = std::norm((h1 * u2)(0));
  const double a21 = std::norm((h2 * u1)(0)), a22 = std::norm((h2 * u2)(0));
  // p1 a11 = g1 (p2 a12 + σ²), p2 a22 = g2 (p1 a21 + σ²)
  const double det = a11 * a22 - g1 * g2 * a12 * a21;
  if (det <= 0.0) return std::numeric_limits<double>::infinity();
  const double p1 = g1 * noise * (a22 + g2 * a12) / det;
  const double p2 = g2 * noise * (a11 + g1 * a21) / det;
  if (!(p1 > 0.0) || !(p2 > 0.0)) return std::numeric_limits<double>::infinity();
  return p1 + p2;
}

inline CVector direction(double alpha, double phi) {
  CVector u(2);
  u << std::cos(alpha), std::sin(alpha) * std::polar(1.0, phi);
  return u;
}

/// Brute-force minimum total power for two users on a two-antenna BS: a
/// 24×48 grid over each user's direction (cos α, sin α e^{jφ}), then three
/// rounds of a shrinking local grid around the incumbent.
inline double grid_min_power_2x2(const CRowVector& h1, const CRowVector& h2, double g1, double g2,
                                 double noise) {
  const int na = 24, np = 48;
  std::vector<CVector> dirs;
  std::vector<std::pair<double, double>> params;
  for (int a = 0; a <= na; ++a)
    for (int p = 0; p < np; ++p) {
      const double alpha = 0.5 * kPi * a / na;
      const double phi = kTwoPi * p / np;
      dirs.push_back(direction(alpha, phi));
      params.emplace_back(alpha, phi);
      if (a == 0) break;
    }
  double best = std::numeric_limits<double>::infinity();
  std::array<double, 4> arg{};
  for (std::size_t i = 0; i < dirs.size(); ++i)
    for (std::size_t j = 0; j < dirs.size(); ++j) {
      const double p = powers_for_directions(h1, h2, dirs[i], dirs[j], g1, g2, noise);
      if (p < best) {
        best = p;
        arg = {params[i].first, params[i].second, params[j].first, params[j].second};
      }
    }
  double da = 0.5 * kPi / na, dp = kTwoPi / np;
  for (int round = 0; round < 6; ++round) {
    const std::array<double, 4> centre = arg;
    const int steps = 8;
    for (int a1 = -steps; a1 <= steps; ++a1)
      for (int p1 = -steps; p1 <= steps; ++p1) {
        const CVector u1 = direction(centre[0] + da * a1 / steps, centre[1] + dp * p1 / steps);
        for (int a2 = -steps; a2 <= steps; ++a2)
          for (int p2 = -steps; p2 <= steps; ++p2) {
            const double al2 = centre[2] + da * a2 / steps, ph2 = centre[3] + dp * p2 / steps;
            const double p = powers_for_directions(h1, h2, u1, direction(al2, ph2), g1, g2, noise);
            if (p < best) {
              best = p;
              arg = {centre[0] + da * a1 / steps, centre[1] + dp * p1 / steps, al2, ph2};
            }
          }
      }
    da *= 0.25;
    dp *= 0.25;
  }
  return best;
}

}  // namespace testing_support
