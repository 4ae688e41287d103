#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "mmris/channel.hpp"
#include "mmris/common.hpp"
#include "mmris/scenario.hpp"

namespace mmris {

/// Ordered RIS sequence carrying the BS signal to one user.
struct ReflectionPath {
  int user = 0;                   // 1-based user ordinal
  std::vector<int> ris_sequence;  // a_1..a_N
  double total_weight = 0.0;
  double predicted_gain = 0.0;    // closed-form ‖h‖² under continuous phases

  int hops() const { return static_cast<int>(ris_sequence.size()); }

  /// Full vertex sequence 0, a_1, …, a_N, J+k.
  std::vector<int> vertices(const Scenario& s) const {
    std::vector<int> v{0};
    v.insert(v.end(), ris_sequence.begin(), ris_sequence.end());
    v.push_back(s.user_node(user));
    return v;
  }
};

/// Phase quantization policy. No bits means continuous phases.
struct PhaseMode {
  std::optional<int> bits;
  bool rotation_refine = false;

  static PhaseMode continuous() { return {}; }
  static PhaseMode discrete(int b, bool refine = false) { return {b, refine}; }
};

struct PhaseConfig {
  int ris = 0;
  std::vector<double> phases;  // radians, [0, 2π)
  std::optional<int> bits;

  CVector coefficients() const {
    CVector phi(static_cast<Eigen::Index>(phases.size()));
    for (std::size_t m = 0; m < phases.size(); ++m)
      phi(static_cast<Eigen::Index>(m)) = std::polar(1.0, phases[m]);
    return phi;
  }
};

/// Checks the no-loop and consecutive-LoS constraints of a path.
inline bool is_valid_path(const ReflectionPath& p, const Scenario& s) {
  if (p.ris_sequence.empty() || p.user < 1 || p.user > s.num_users()) return false;
  std::vector<int> sorted = p.ris_sequence;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return false;
  for (int a : p.ris_sequence)
    if (a < 1 || a > s.num_ris()) return false;
  const auto v = p.vertices(s);
  for (std::size_t n = 0; n + 1 < v.size(); ++n)
    if (visibility(v[n], v[n + 1], s) != 1) return false;
  return true;
}

/// ρ for hop n (1-based): outgoing response ⊙ conj(incoming response) at RIS a_n.
/// The hop coefficient equals conj(φ^H ρ), so |A| is maximized by θ_m = ∠ρ_m.
inline CVector hop_alignment_vector(const ReflectionPath& path, int n, const Scenario& s) {
  if (n < 1 || n > path.hops())
    throw std::invalid_argument("hop index " + std::to_string(n) + " outside 1.." +
                                std::to_string(path.hops()));
  const auto v = path.vertices(s);
  const int prev = v[static_cast<std::size_t>(n - 1)];
  const int ris = v[static_cast<std::size_t>(n)];
  const int next = v[static_cast<std::size_t>(n + 1)];
  if (visibility(prev, ris, s) != 1 || visibility(ris, next, s) != 1)
    throw PreconditionError("hop " + std::to_string(n) + " of user " +
                            std::to_string(path.user) + " lacks a LoS link");
  const CVector incoming = node_response(s, ris, prev);
  const CVector outgoing = node_response(s, ris, next);
  return outgoing.cwiseProduct(incoming.conjugate());
}

inline PhaseConfig phases_from_alignment(int ris, const CVector& rho) {
  PhaseConfig cfg{ris, {}, std::nullopt};
  cfg.phases.reserve(static_cast<std::size_t>(rho.size()));
  for (Eigen::Index m = 0; m < rho.size(); ++m) cfg.phases.push_back(wrap_two_pi(std::arg(rho(m))));
  return cfg;
}

/// Nearest codebook angle in {0, Δθ, …, (B−1)Δθ}; ties go to the smaller angle.
inline double quantize_phase(double angle, int bits) {
  const int levels = 1 << bits;
  const double step = kTwoPi / levels;
  const double a = wrap_two_pi(angle);
  const int lo = static_cast<int>(std::floor(a / step)) % levels;
  const int hi = (lo + 1) % levels;
  const double d_lo = circular_distance(a, lo * step);
  const double d_hi = circular_distance(a, hi * step);
  if (d_lo < d_hi) return lo * step;
  if (d_hi < d_lo) return hi * step;
  return std::min(lo, hi) * step;
}

inline PhaseConfig optimal_phase_continuous(const ReflectionPath& path, int n, const Scenario& s) {
  return phases_from_alignment(path.ris_sequence[static_cast<std::size_t>(n - 1)],
                               hop_alignment_vector(path, n, s));
}

/// Per-element nearest-angle quantization of the continuous optimum. With
/// `rotation_refine`, 64 common offsets within one codebook step are tried and
/// the one maximizing |φ^H ρ| is kept.
inline PhaseConfig quantized_phases(int ris, const CVector& rho, int bits, bool rotation_refine) {
  if (bits < 1) throw std::invalid_argument("quantization bits must be >= 1");
  if (bits > 30) throw std::invalid_argument("quantization bits must be <= 30");
  const double step = kTwoPi / (1 << bits);
  const int offsets = rotation_refine ? 64 : 1;
  PhaseConfig best{ris, {}, bits};
  double best_gain = -1.0;
  for (int o = 0; o < offsets; ++o) {
    const double shift = step * o / offsets;
    PhaseConfig cfg{ris, {}, bits};
    Complex acc{0.0, 0.0};
    for (Eigen::Index m = 0; m < rho.size(); ++m) {
      const double theta = quantize_phase(std::arg(rho(m)) + shift, bits);
      cfg.phases.push_back(theta);
      acc += std::polar(1.0, -theta) * rho(m);
    }
    if (std::abs(acc) > best_gain) {
      best_gain = std::abs(acc);
      best = std::move(cfg);
    }
  }
  return best;
}

inline PhaseConfig optimal_phase_discrete(const ReflectionPath& path, int n, int bits,
                                          const Scenario& s, bool rotation_refine = false) {
  if (bits < 1) throw std::invalid_argument("optimal_phase_discrete: bits must be >= 1");
  return quantized_phases(path.ris_sequence[static_cast<std::size_t>(n - 1)],
                          hop_alignment_vector(path, n, s), bits, rotation_refine);
}

inline PhaseConfig hop_phases(const ReflectionPath& path, int n, const PhaseMode& mode,
                              const Scenario& s) {
  if (mode.bits) return optimal_phase_discrete(path, n, *mode.bits, s, mode.rotation_refine);
  return optimal_phase_continuous(path, n, s);
}

/// Link weight ln(1 + d²/(β0 M_j²)) toward a RIS, ln(1 + d²/β0) toward a user.
inline double link_weight(int i, int j, const Scenario& s) {
  if (visibility(i, j, s) != 1)
    throw PreconditionError("link_weight: nodes " + std::to_string(i) + " and " +
                            std::to_string(j) + " are not in LoS");
  const Node& rx = s.node(j);
  const double d2 = std::pow(s.distance(i, j), 2);
  switch (rx.kind) {
    case NodeKind::RIS: {
      const double m = rx.elements();
      return std::log1p(d2 / (s.ref_gain * m * m));
    }
    case NodeKind::User: return std::log1p(d2 / s.ref_gain);
    case NodeKind::BS: break;
  }
  throw std::invalid_argument("link_weight: receiver must be a RIS or a user");
}

/// Closed-form gain M0 · (β0/d²_last) · Π β0 M²_{a_n}/d²_{a_{n-1},a_n}.
inline double closed_form_gain(const ReflectionPath& path, const Scenario& s) {
  const auto v = path.vertices(s);
  double gain = s.bs_antennas;
  for (std::size_t n = 1; n + 1 < v.size(); ++n) {
    const double m = s.node(v[n]).elements();
    gain *= s.ref_gain * m * m / std::pow(s.distance(v[n - 1], v[n]), 2);
  }
  gain *= s.ref_gain / std::pow(s.distance(v[v.size() - 2], v.back()), 2);
  return gain;
}

struct Edge {
  int to = 0;
  double weight = 0.0;
};

/// Directed weighted LoS graph over all nodes: BS→RIS, RIS↔RIS, RIS→user.
struct ConnectionGraph {
  std::vector<std::vector<Edge>> out;  // sorted by destination

  int num_vertices() const { return static_cast<int>(out.size()); }
  std::size_t num_edges() const {
    std::size_t e = 0;
    for (const auto& a : out) e += a.size();
    return e;
  }
  std::optional<double> weight(int i, int j) const {
    for (const Edge& e : out[static_cast<std::size_t>(i)])
      if (e.to == j) return e.weight;
    return std::nullopt;
  }
};

inline ConnectionGraph build_connection_graph(const Scenario& s) {
  const int j_count = s.num_ris();
  ConnectionGraph g;
  g.out.resize(static_cast<std::size_t>(s.num_nodes()));
  for (int i = 0; i <= j_count; ++i) {
    for (int j = 1; j < s.num_nodes(); ++j) {
      if (i == j) continue;
      if (i == 0 && !s.is_ris(j)) continue;  // no direct BS→user edge
      if (visibility(i, j, s) == 1)
        g.out[static_cast<std::size_t>(i)].push_back({j, link_weight(i, j, s)});
    }
  }
  return g;
}

/// Minimum-weight path from the BS to user k (Dijkstra). Among equal-weight
/// paths the lexicographically smallest vertex sequence wins. `max_hops`
/// bounds the number of RISs. Returns nullopt when the user is unreachable.
inline std::optional<ReflectionPath> best_path(int user, const ConnectionGraph& g,
                                               const Scenario& s,
                                               std::optional<int> max_hops = std::nullopt) {
  const int target = s.user_node(user);
  const int n_vert = g.num_vertices();
  if (target < 0 || target >= n_vert) throw std::invalid_argument("best_path: user out of range");
  // State = (vertex, RISs used so far); without a cap the layer index is 0.
  const int layers = max_hops ? *max_hops + 1 : 1;
  const auto id = [&](int v, int h) { return static_cast<std::size_t>(h * n_vert + v); };
  struct Label {
    double dist = std::numeric_limits<double>::infinity();
    std::vector<int> seq;
    bool done = false;
  };
  std::vector<Label> label(static_cast<std::size_t>(layers * n_vert));
  label[id(0, 0)].dist = 0.0;
  label[id(0, 0)].seq = {0};

  const auto better = [](double d, const std::vector<int>& seq, const Label& l) {
    return d < l.dist || (d == l.dist && seq < l.seq);
  };
  while (true) {
    // Dense selection keeps the tie rule simple; graphs have tens of vertices.
    std::size_t pick = label.size();
    for (std::size_t st = 0; st < label.size(); ++st) {
      if (label[st].done || !std::isfinite(label[st].dist)) continue;
      if (pick == label.size() || better(label[st].dist, label[st].seq, label[pick])) pick = st;
    }
    if (pick == label.size()) break;
    label[pick].done = true;
    const int v = static_cast<int>(pick % static_cast<std::size_t>(n_vert));
    const int h = static_cast<int>(pick / static_cast<std::size_t>(n_vert));
    if (v == target) continue;
    for (const Edge& e : g.out[static_cast<std::size_t>(v)]) {
      const bool to_ris = s.is_ris(e.to);
      if (!to_ris && e.to != target) continue;  // users are sinks
      int nh = h;
      if (max_hops && to_ris) {
        if (h + 1 > *max_hops) continue;
        nh = h + 1;
      }
      Label& dst = label[id(e.to, nh)];
      if (dst.done) continue;
      const double nd = label[pick].dist + e.weight;
      std::vector<int> seq = label[pick].seq;
      seq.push_back(e.to);
      if (better(nd, seq, dst)) {
        dst.dist = nd;
        dst.seq = std::move(seq);
      }
    }
  }
  const Label* best = nullptr;
  for (int h = 0; h < layers; ++h) {
    const Label& l = label[id(target, h)];
    if (!std::isfinite(l.dist)) continue;
    if (best == nullptr || better(l.dist, l.seq, *best)) best = &l;
  }
  if (best == nullptr) return std::nullopt;
  ReflectionPath p;
  p.user = user;
  p.ris_sequence.assign(best->seq.begin() + 1, best->seq.end() - 1);
  p.total_weight = best->dist;
  p.predicted_gain = closed_form_gain(p, s);
  return p;
}

/// End-to-end 1×M0 row h = g^H Φ_N (Π S Φ) H and its squared norm.
struct EffectiveChannel {
  int user = 0;
  CRowVector row;
  double gain = 0.0;
};

inline EffectiveChannel cascade_channel(const ReflectionPath& path, const PhaseMode& mode,
                                        const Scenario& s) {
  const auto v = path.vertices(s);
  CMatrix acc = los_channel(v[0], v[1], s);  // M_{a1} × M0
  for (int n = 1; n <= path.hops(); ++n) {
    const PhaseConfig cfg = hop_phases(path, n, mode, s);
    const CVector phi = cfg.coefficients();
    if (phi.size() != acc.rows()) throw std::logic_error("cascade_channel: dimension mismatch");
    acc = phi.asDiagonal() * acc;
    acc = los_channel(v[static_cast<std::size_t>(n)], v[static_cast<std::size_t>(n + 1)], s) * acc;
  }
  if (acc.rows() != 1 || acc.cols() != s.bs_antennas)
    throw std::logic_error("cascade_channel: result is not 1×M0");
  EffectiveChannel out;
  out.user = path.user;
  out.row = acc.row(0);
  out.gain = out.row.squaredNorm();
  return out;
}

/// Direct BS→user channel √β0/d · α_B^H, ignoring blockage.
inline EffectiveChannel direct_channel(int user, const Scenario& s) {
  EffectiveChannel out;
  out.user = user;
  out.row = los_channel_unchecked(0, s.user_node(user), s).row(0);
  out.gain = out.row.squaredNorm();
  return out;
}

}  // namespace mmris
