#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "mmris/grouping.hpp"

namespace mmris {

namespace lp {

struct Solution {
  Eigen::VectorXd x;
  double value = 0.0;
  int pivots = 0;
};

/// Dense primal simplex for  max c^T x  s.t.  A x ≤ b, x ≥ 0  with b ≥ 0, so
/// the slack basis is feasible. Bland's rule: deterministic, no cycling.
inline Solution maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                         const Eigen::VectorXd& b) {
  const Eigen::Index rows = A.rows();
  const Eigen::Index cols = A.cols();
  if (c.size() != cols || b.size() != rows) throw std::invalid_argument("lp::maximize: shape mismatch");
  if ((b.array() < 0.0).any()) throw std::invalid_argument("lp::maximize: b must be nonnegative");
  constexpr double eps = 1e-12;

  // Tableau [A I b; -c 0 0].
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(rows + 1, cols + rows + 1);
  T.topLeftCorner(rows, cols) = A;
  T.block(0, cols, rows, rows).setIdentity();
  T.topRightCorner(rows, 1) = b;
  T.bottomLeftCorner(1, cols) = -c.transpose();
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(rows));
  for (Eigen::Index r = 0; r < rows; ++r) basis[static_cast<std::size_t>(r)] = cols + r;

  Solution sol;
  const Eigen::Index rhs = cols + rows;
  const int max_pivots = 50 * static_cast<int>(rows + cols + 1);
  while (sol.pivots < max_pivots) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < cols + rows; ++j)
      if (T(rows, j) < -eps) {
        enter = j;
        break;
      }
    if (enter < 0) break;
    Eigen::Index leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (T(r, enter) <= eps) continue;
      const double ratio = T(r, rhs) / T(r, enter);
      const bool tie = leave >= 0 && std::fabs(ratio - best_ratio) <= eps;
      if (leave < 0 || (!tie && ratio < best_ratio) ||
          (tie && basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)])) {
        best_ratio = std::min(best_ratio, ratio);
        leave = r;
      }
    }
    if (leave < 0) throw std::runtime_error("lp::maximize: unbounded");
    T.row(leave) /= T(leave, enter);
    for (Eigen::Index r = 0; r <= rows; ++r)
      if (r != leave && T(r, enter) != 0.0) T.row(r) -= T(r, enter) * T.row(leave);
    basis[static_cast<std::size_t>(leave)] = enter;
    ++sol.pivots;
  }
  sol.x = Eigen::VectorXd::Zero(cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    if (basis[static_cast<std::size_t>(r)] < cols) sol.x(basis[static_cast<std::size_t>(r)]) = T(r, rhs);
  sol.value = c.dot(sol.x);
  return sol;
}

}  // namespace lp

/// Time shares t_1..t_Q on the simplex.
struct Schedule {
  std::vector<double> shares;
  double objective = 0.0;  // min_k Σ_q t_q r_k^q at these shares

  int size() const { return static_cast<int>(shares.size()); }
  static Schedule uniform(int q) {
    return {std::vector<double>(static_cast<std::size_t>(q), q > 0 ? 1.0 / q : 0.0), 0.0};
  }
};

/// min over covered users of Σ_q t_q r_k^q. `rates` is users × groups with
/// zeros outside memberships; rows of users in no group are skipped.
inline double min_equivalent_rate(const Eigen::MatrixXd& rates, const std::vector<double>& shares,
                                  const std::vector<int>& membership) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < rates.rows(); ++k) {
    if (membership[static_cast<std::size_t>(k)] == 0) continue;
    double c = 0.0;
    for (Eigen::Index q = 0; q < rates.cols(); ++q) c += shares[static_cast<std::size_t>(q)] * rates(k, q);
    best = std::min(best, c);
  }
  return std::isfinite(best) ? best : 0.0;
}

/// Epigraph LP: max τ s.t. Σ_{q∋k} t_q r_k^q ≥ τ for every covered user,
/// Σ t_q = 1, t ≥ 0.
inline Schedule lp_time_allocation(const Eigen::MatrixXd& rates, const std::vector<int>& membership) {
  const Eigen::Index q_count = rates.cols();
  if (q_count == 0) return {};
  if (q_count == 1) {
    Schedule s{{1.0}, 0.0};
    s.objective = min_equivalent_rate(rates, s.shares, membership);
    return s;
  }
  std::vector<Eigen::Index> users;
  for (Eigen::Index k = 0; k < rates.rows(); ++k)
    if (membership[static_cast<std::size_t>(k)] > 0) users.push_back(k);

  const Eigen::Index rows = static_cast<Eigen::Index>(users.size()) + 1;
  const Eigen::Index cols = q_count + 1;  // t_1..t_Q, τ
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
  for (std::size_t i = 0; i < users.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    A.row(r).head(q_count) = -rates.row(users[i]);
    A(r, q_count) = 1.0;
  }
  A.row(rows - 1).head(q_count).setOnes();
  b(rows - 1) = 1.0;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(cols);
  c(q_count) = 1.0;

  const lp::Solution sol = lp::maximize(c, A, b);
  Schedule s;
  s.shares.resize(static_cast<std::size_t>(q_count));
  const double total = sol.x.head(q_count).sum();
  for (Eigen::Index q = 0; q < q_count; ++q)
    s.shares[static_cast<std::size_t>(q)] = total > 0.0 ? sol.x(q) / total : 1.0 / q_count;
  // Rates are nonnegative, so rescaling onto the simplex never lowers τ.
  s.objective = min_equivalent_rate(rates, s.shares, membership);
  return s;
}

}  // namespace mmris
