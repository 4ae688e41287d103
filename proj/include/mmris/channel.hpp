#pragma once

#include <algorithm>
#include <string>

#include "mmris/common.hpp"
#include "mmris/scenario.hpp"

namespace mmris {

/// e(δ, N): element n (0-based) is exp(-j·n·π·δ).
inline CVector steering_vector(double delta, int count) {
  if (count < 1) throw std::invalid_argument("steering_vector: element count must be >= 1");
  CVector e(count);
  for (int n = 0; n < count; ++n) e(n) = std::polar(1.0, -kPi * delta * n);
  return e;
}

/// ULA response at the BS for an angle of departure measured from boresight.
inline CVector bs_array_response(double aod, const Scenario& s) {
  return steering_vector(s.antenna_spacing / s.wavelength * std::sin(aod), s.bs_antennas);
}

/// URA response of a RIS panel: horizontal steering vector ⊗ vertical steering vector.
/// Element (ix, iy) sits at position ix·elements_y + iy.
inline CVector ris_array_response(double polar, double azimuth, const Node& panel,
                                  const Scenario& s) {
  if (panel.kind != NodeKind::RIS)
    throw std::invalid_argument("ris_array_response: node " + std::to_string(panel.index) +
                                " is not a RIS");
  const double scale = s.element_spacing / s.wavelength * std::sin(polar);
  const CVector horizontal = steering_vector(scale * std::cos(azimuth), panel.elements_x);
  const CVector vertical = steering_vector(scale * std::sin(azimuth), panel.elements_y);
  CVector out(panel.elements_x * panel.elements_y);
  for (int ix = 0; ix < panel.elements_x; ++ix)
    for (int iy = 0; iy < panel.elements_y; ++iy)
      out(ix * panel.elements_y + iy) = horizontal(ix) * vertical(iy);
  return out;
}

// Frames. All orientations are derived from a fixed world up-vector (0,0,1).
namespace frame {

inline Vec3 up() { return Vec3::UnitZ(); }

/// Horizontal in-plane axis of a panel or array whose broadside is `normal`.
inline Vec3 horizontal_axis(const Vec3& normal) {
  Vec3 h = up().cross(normal);
  if (h.norm() < 1e-12) h = Vec3::UnitX().cross(normal);  // normal parallel to up
  return h.normalized();
}

inline Vec3 unit_direction(const Vec3& from, const Vec3& to) {
  const Vec3 d = to - from;
  const double n = d.norm();
  if (n == 0.0) throw SingularGeometryError("coincident node positions");
  return d / n;
}

}  // namespace frame

struct PanelAngles {
  double polar = 0.0;    // angle off the panel normal (ϑa)
  double azimuth = 0.0;  // in-plane angle from the horizontal axis (ϑe)
};

/// Angles of node `other` as seen from RIS `ris`, in the panel's local frame.
inline PanelAngles ris_angles(const Scenario& s, int ris, int other) {
  const Node& panel = s.node(ris);
  const Vec3 r = frame::unit_direction(panel.position, s.node(other).position);
  const Vec3& n = panel.facing_normal;
  const Vec3 h = frame::horizontal_axis(n);
  const Vec3 v = n.cross(h);
  return {std::acos(std::clamp(r.dot(n), -1.0, 1.0)), std::atan2(r.dot(v), r.dot(h))};
}

/// Angle of departure from the BS toward `target`, relative to boresight.
inline double bs_departure_angle(const Scenario& s, int target) {
  const Vec3 r = frame::unit_direction(s.node(0).position, s.node(target).position);
  const Vec3 axis = frame::horizontal_axis(s.bs_boresight);
  return std::asin(std::clamp(r.dot(axis), -1.0, 1.0));
}

/// Array response of node `self` pointed at node `other` (BS, RIS, or a
/// single-antenna user whose response is the scalar 1).
inline CVector node_response(const Scenario& s, int self, int other) {
  const Node& n = s.node(self);
  switch (n.kind) {
    case NodeKind::BS: return bs_array_response(bs_departure_angle(s, other), s);
    case NodeKind::RIS: {
      const PanelAngles a = ris_angles(s, self, other);
      return ris_array_response(a.polar, a.azimuth, n, s);
    }
    case NodeKind::User: return CVector::Ones(1);
  }
  return {};
}

namespace detail {

inline bool segment_hits_box(const Vec3& p0, const Vec3& p1, const Box& box) {
  double t_min = 0.0;
  double t_max = 1.0;
  const Vec3 d = p1 - p0;
  for (int a = 0; a < 3; ++a) {
    if (std::fabs(d(a)) < 1e-15) {
      if (p0(a) < box.min(a) || p0(a) > box.max(a)) return false;
      continue;
    }
    double t0 = (box.min(a) - p0(a)) / d(a);
    double t1 = (box.max(a) - p0(a)) / d(a);
    if (t0 > t1) std::swap(t0, t1);
    t_min = std::max(t_min, t0);
    t_max = std::min(t_max, t1);
    if (t_min > t_max) return false;
  }
  return true;
}

inline bool in_front_of(const Scenario& s, int ris, int other) {
  const Node& panel = s.node(ris);
  return panel.facing_normal.dot(s.node(other).position - panel.position) > 0.0;
}

}  // namespace detail

/// LoS indicator l(i,j) in {0,1}. Symmetric, zero on the diagonal.
/// Geometry: within max_range, segment clear of every obstacle, and each RIS
/// endpoint has the other node strictly in front of it. Overrides win.
/// `ignore_obstacles` drops the obstacle test (used by the direct-LoS baseline).
inline int visibility(int i, int j, const Scenario& s, bool ignore_obstacles = false) {
  if (i < 0 || j < 0 || i >= s.num_nodes() || j >= s.num_nodes())
    throw std::invalid_argument("visibility: node index out of range (" + std::to_string(i) +
                                "," + std::to_string(j) + ")");
  if (i == j) return 0;
  if (auto forced = s.visibility.override_for(i, j)) return *forced ? 1 : 0;

  const Vec3& pi = s.node(i).position;
  const Vec3& pj = s.node(j).position;
  if ((pi - pj).norm() > s.visibility.max_range) return 0;
  if (!ignore_obstacles) {
    for (const Box& box : s.visibility.obstacles)
      if (detail::segment_hits_box(pi, pj, box)) return 0;
  }
  if (s.is_ris(i) && !detail::in_front_of(s, i, j)) return 0;
  if (s.is_ris(j) && !detail::in_front_of(s, j, i)) return 0;
  return 1;
}

/// Free-space LoS channel from transmitter i to receiver j without the
/// visibility check: √β0/d · (rx response)(tx response)^H.
inline CMatrix los_channel_unchecked(int i, int j, const Scenario& s) {
  const double d = s.distance(i, j);
  if (d == 0.0)
    throw SingularGeometryError("los_channel: nodes " + std::to_string(i) + " and " +
                                std::to_string(j) + " coincide");
  const CVector tx = node_response(s, i, j);
  const CVector rx = node_response(s, j, i);
  return (std::sqrt(s.ref_gain) / d) * (rx * tx.adjoint());
}

/// LoS channel matrix, rows = receiver elements, cols = transmitter elements.
/// BS→RIS is M_j×M0, RIS→RIS M_j×M_i, RIS→user 1×M_j, BS→user 1×M0.
inline CMatrix los_channel(int i, int j, const Scenario& s) {
  const NodeKind tx = s.node(i).kind;
  const NodeKind rx = s.node(j).kind;
  if (tx == NodeKind::User || rx == NodeKind::BS)
    throw std::invalid_argument("los_channel: transmitter must be BS/RIS, receiver RIS/user");
  if (s.distance(i, j) == 0.0)
    throw SingularGeometryError("los_channel: nodes " + std::to_string(i) + " and " +
                                std::to_string(j) + " coincide");
  if (visibility(i, j, s) != 1)
    throw PreconditionError("los_channel: nodes " + std::to_string(i) + " and " +
                            std::to_string(j) + " are not in LoS");
  return los_channel_unchecked(i, j, s);
}

}  // namespace mmris
