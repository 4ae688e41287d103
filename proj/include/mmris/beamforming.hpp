#pragma once

#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "mmris/common.hpp"

namespace mmris {

/// SINR of in-group user `k`: |h_k w_k|² / (Σ_{u≠k} |h_k w_u|² + σ0²).
inline double sinr(std::size_t k, const std::vector<CRowVector>& channels,
                   const std::vector<CVector>& beams, double noise) {
  const CRowVector& h = channels[k];
  const double signal = std::norm((h * beams[k])(0));
  double interference = 0.0;
  for (std::size_t u = 0; u < beams.size(); ++u)
    if (u != k) interference += std::norm((h * beams[u])(0));
  return signal / (interference + noise);
}

struct PowerMinOptions {
  int max_iterations = 5000;
  double tolerance = 1e-13;  // relative change of the dual powers
  double divergence_factor = 1e6;
};

enum class FeasibilityStatus { Feasible, InfeasibleAtBudget };

struct PowerMinResult {
  FeasibilityStatus status = FeasibilityStatus::InfeasibleAtBudget;
  std::vector<CVector> beams;     // downlink beamformers, in input order
  std::vector<double> dual;       // uplink dual powers
  double total_power = 0.0;       // Σ‖w_k‖²; lower bound when infeasible
  double dual_power = 0.0;        // Σ dual
  int iterations = 0;
  bool converged = false;

  bool feasible() const { return status == FeasibilityStatus::Feasible; }
};

/// Minimum-power beamformers meeting SINR targets for one activation group,
/// via uplink-downlink duality. Noise-normalized dual powers follow the fixed point
///   λ_k ← γ_k / (h_k (I + Σ_{j≠k} λ_j h_j^H h_j)^{-1} h_k^H)
/// from λ = 0; these iterates grow monotonically toward the optimum, so one whose
/// total exceeds `budget` proves infeasibility. After each step the MMSE receivers
/// of the current iterate are frozen and the powers meeting the targets with
/// them are solved exactly; once that system has a positive solution it bounds
/// the optimum from above and repeating it converges quadratically. Downlink
/// powers come from the K×K system on the final MMSE directions.
inline PowerMinResult power_min_feasibility(const std::vector<CRowVector>& channels,
                                            const std::vector<double>& targets, double noise,
                                            double budget = std::numeric_limits<double>::infinity(),
                                            const PowerMinOptions& opts = {}) {
  const std::size_t k_count = channels.size();
  if (k_count == 0) throw std::invalid_argument("power_min_feasibility: empty group");
  if (targets.size() != k_count)
    throw std::invalid_argument("power_min_feasibility: one target per channel required");
  if (!(noise > 0.0)) throw std::invalid_argument("power_min_feasibility: noise must be > 0");
  const Eigen::Index m = channels.front().size();
  for (std::size_t k = 0; k < k_count; ++k) {
    if (channels[k].size() != m) throw std::invalid_argument("power_min_feasibility: ragged channels");
    if (channels[k].squaredNorm() == 0.0)
      throw DegenerateInputError("power_min_feasibility: zero channel for member " +
                                 std::to_string(k));
    if (!(targets[k] > 0.0) || !std::isfinite(targets[k]))
      throw std::invalid_argument("power_min_feasibility: targets must be finite and > 0");
  }

  const double sigma = std::sqrt(noise);
  const auto kn = static_cast<Eigen::Index>(k_count);
  CMatrix h(kn, m);
  for (std::size_t k = 0; k < k_count; ++k) h.row(static_cast<Eigen::Index>(k)) = channels[k] / sigma;

  PowerMinResult res;
  const double divergence = std::isfinite(budget) ? opts.divergence_factor * budget
                                                  : std::numeric_limits<double>::infinity();
  auto total = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  };
  auto covariance = [&](const std::vector<double>& lam) {
    CMatrix cov = CMatrix::Identity(m, m);
    for (Eigen::Index j = 0; j < kn; ++j)
      if (lam[static_cast<std::size_t>(j)] > 0.0)
        cov.noalias() += lam[static_cast<std::size_t>(j)] * (h.row(j).adjoint() * h.row(j));
    return cov;
  };
  // Columns are the (unnormalized) MMSE receivers Σ(λ)^{-1} h_k^H.
  auto receivers = [&](const std::vector<double>& lam) -> CMatrix {
    return Eigen::LLT<CMatrix>(covariance(lam)).solve(h.adjoint());
  };
  auto fixed_point_step = [&](const std::vector<double>& lam) {
    std::vector<double> out(k_count);
    for (Eigen::Index k = 0; k < kn; ++k) {
      std::vector<double> others = lam;
      others[static_cast<std::size_t>(k)] = 0.0;
      const Eigen::LLT<CMatrix> llt(covariance(others));
      const double quad = std::real((h.row(k) * llt.solve(h.row(k).adjoint()))(0, 0));
      out[static_cast<std::size_t>(k)] = targets[static_cast<std::size_t>(k)] / quad;
    }
    return out;
  };
  // Powers meeting every target exactly with the receivers frozen at λ.
  auto policy_step = [&](const std::vector<double>& lam) -> std::optional<std::vector<double>> {
    const CMatrix u = receivers(lam);
    const CMatrix cross = h * u;  // (j, k) = h_j u_k
    // λ_k = γ_k (‖u_k‖² + Σ_{j≠k} λ_j |h_j u_k|²) / |h_k u_k|², written as (I − D F) λ = D n.
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(kn, kn);
    Eigen::VectorXd rhs(kn);
    for (Eigen::Index k = 0; k < kn; ++k) {
      const double d = targets[static_cast<std::size_t>(k)] / std::norm(cross(k, k));
      rhs(k) = d * u.col(k).squaredNorm();
      for (Eigen::Index j = 0; j < kn; ++j)
        if (j != k) a(k, j) = -d * std::norm(cross(j, k));
    }
    const Eigen::VectorXd x = a.partialPivLu().solve(rhs);
    std::vector<double> out(k_count);
    for (Eigen::Index k = 0; k < kn; ++k) {
      if (!(x(k) > 0.0) || !std::isfinite(x(k))) return std::nullopt;
      out[static_cast<std::size_t>(k)] = x(k);
    }
    return out;
  };
  // Change measured against the total dual power, which is what the budget test uses.
  auto rel_change = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double diff = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) diff += std::fabs(a[k] - b[k]);
    return diff / std::max(total(a), total(b));
  };

  std::vector<double> lower(k_count, 0.0);
  std::vector<double> lambda;
  bool exceeded = false;
  int it = 0;
  while (it < opts.max_iterations && !res.converged && !exceeded) {
    ++it;
    std::vector<double> next = fixed_point_step(lower);
    const double sum = total(next);
    const double change = rel_change(next, lower);
    lower.swap(next);
    if (sum > budget || sum > divergence || !std::isfinite(sum)) {
      exceeded = true;
      break;
    }
    if (change < opts.tolerance) {
      lambda = lower;
      res.converged = true;
      break;
    }
    auto upper = policy_step(lower);
    if (!upper) continue;
    // Descend from above; stop on tolerance or once rounding noise dominates.
    double prev = std::numeric_limits<double>::infinity();
    while (it < opts.max_iterations) {
      ++it;
      auto refined = policy_step(*upper);
      if (!refined) break;
      const double c = rel_change(*refined, *upper);
      upper = std::move(refined);
      if (c < opts.tolerance || (c < 1e-10 && c >= prev)) {
        lambda = *upper;
        res.converged = true;
        break;
      }
      if (c >= prev) break;
      prev = c;
    }
    if (!res.converged && total(lower) > budget) exceeded = true;
  }
  res.iterations = it;
  if (!res.converged) lambda = lower;

  res.dual = lambda;
  res.dual_power = total(lambda);
  if (exceeded || !res.converged || res.dual_power > divergence) {
    res.status = FeasibilityStatus::InfeasibleAtBudget;
    res.total_power = res.dual_power;
    return res;
  }

  // Downlink directions: u_k ∝ (I + Σ_j λ_j h_j^H h_j)^{-1} h_k^H.
  const CMatrix u = receivers(lambda);
  std::vector<CVector> dirs(k_count);
  for (std::size_t k = 0; k < k_count; ++k) dirs[k] = u.col(static_cast<Eigen::Index>(k)).normalized();
  // p_k = γ_k (1 + Σ_{j≠k} p_j |h_k u_j|²) / |h_k u_k|², i.e. (I − D F) p = D 1.
  const CMatrix gains = h * u;
  Eigen::MatrixXd gmat = Eigen::MatrixXd::Identity(kn, kn);
  Eigen::VectorXd rhs(kn);
  for (Eigen::Index k = 0; k < kn; ++k) {
    const double own = std::norm(gains(k, k)) / u.col(k).squaredNorm();
    const double d = targets[static_cast<std::size_t>(k)] / own;
    rhs(k) = d;
    for (Eigen::Index j = 0; j < kn; ++j)
      if (j != k) gmat(k, j) = -d * std::norm(gains(k, j)) / u.col(j).squaredNorm();
  }
  const Eigen::VectorXd p = gmat.partialPivLu().solve(rhs);
  res.beams.resize(k_count);
  res.total_power = 0.0;
  for (std::size_t k = 0; k < k_count; ++k) {
    const double pk = p(static_cast<Eigen::Index>(k));
    if (!(pk >= 0.0) || !std::isfinite(pk)) {
      res.status = FeasibilityStatus::InfeasibleAtBudget;
      res.total_power = res.dual_power;
      res.beams.clear();
      return res;
    }
    res.beams[k] = std::sqrt(pk) * dirs[k];
    res.total_power += pk;
  }
  if (res.total_power <= budget) {
    res.status = FeasibilityStatus::Feasible;
  } else {
    res.status = FeasibilityStatus::InfeasibleAtBudget;
    res.beams.clear();
  }
  return res;
}

/// Lifts a beamformer to W = w w^H.
inline CMatrix lift(const CVector& w) { return w * w.adjoint(); }

struct ExtractedBeam {
  CVector w;
  double eigen_ratio = 0.0;  // λ_2 / λ_1
};

/// √λ_max × principal eigenvector of a Hermitian PSD matrix.
inline ExtractedBeam extract_beamformer(const CMatrix& W) {
  if (W.rows() != W.cols() || W.rows() == 0)
    throw std::invalid_argument("extract_beamformer: matrix must be square and non-empty");
  if ((W - W.adjoint()).norm() > 1e-9 * std::max(1.0, W.norm()))
    throw std::invalid_argument("extract_beamformer: matrix is not Hermitian");
  const Eigen::SelfAdjointEigenSolver<CMatrix> eig(W);
  const Eigen::VectorXd& vals = eig.eigenvalues();  // ascending
  const double top = vals(vals.size() - 1);
  if (vals(0) < -1e-9 * std::max(1.0, std::fabs(top)))
    throw std::invalid_argument("extract_beamformer: matrix is not positive semidefinite");
  ExtractedBeam out;
  out.w = std::sqrt(std::max(top, 0.0)) * eig.eigenvectors().col(vals.size() - 1);
  out.eigen_ratio = vals.size() > 1 && top > 0.0 ? std::max(vals(vals.size() - 2), 0.0) / top : 0.0;
  if (out.eigen_ratio > 1e-12)
    std::clog << "warning: extract_beamformer: input is not rank one (eigenvalue ratio "
              << out.eigen_ratio << "), keeping the principal eigenpair\n";
  return out;
}

}  // namespace mmris
