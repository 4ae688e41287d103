#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mmris/beamforming.hpp"
#include "mmris/grouping.hpp"
#include "mmris/schedule_lp.hpp"

namespace mmris {

/// Everything the joint beamforming/scheduling stage needs.
struct GroupProblem {
  std::vector<ActivationGroup> groups;
  std::vector<int> membership;           // v_k, indexed k-1
  std::vector<CRowVector> channels;      // effective channel of user k at index k-1
  double noise = 1.0;
  double tx_power = 1.0;

  int num_users() const { return static_cast<int>(membership.size()); }
  int num_groups() const { return static_cast<int>(groups.size()); }
  const CRowVector& channel(int user) const { return channels[static_cast<std::size_t>(user - 1)]; }
  std::vector<CRowVector> group_channels(int q) const {
    std::vector<CRowVector> out;
    for (int k : groups[static_cast<std::size_t>(q)].members) out.push_back(channel(k));
    return out;
  }
};

struct OptimizerOptions {
  double bisection_tolerance = 1e-4;  // ϵ, bits
  double outer_tolerance = 1e-5;      // ε, bits
  int max_outer_iterations = 20;      // N
  double share_floor = 1e-3;          // groups below this share sit out a bisection round
  PowerMinOptions inner;
};

/// w_k^q for every group, aligned with ActivationGroup::members.
struct BeamformingSolution {
  std::vector<std::vector<CVector>> beams;

  double group_power(int q) const {
    double p = 0.0;
    for (const auto& w : beams[static_cast<std::size_t>(q)]) p += w.squaredNorm();
    return p;
  }
  static BeamformingSolution zeros(const GroupProblem& prob, Eigen::Index antennas) {
    BeamformingSolution s;
    for (const auto& g : prob.groups)
      s.beams.emplace_back(g.members.size(), CVector::Zero(antennas));
    return s;
  }
};

struct SlotRates {
  std::vector<std::vector<double>> sinr;  // [q][member]
  Eigen::MatrixXd rates;                  // users × groups, log2(1+γ) where member
};

inline SlotRates evaluate_slot_rates(const GroupProblem& prob, const BeamformingSolution& sol) {
  SlotRates out;
  out.rates = Eigen::MatrixXd::Zero(prob.num_users(), prob.num_groups());
  for (int q = 0; q < prob.num_groups(); ++q) {
    const auto& members = prob.groups[static_cast<std::size_t>(q)].members;
    const auto channels = prob.group_channels(q);
    const auto& beams = sol.beams[static_cast<std::size_t>(q)];
    std::vector<double> g(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
      g[i] = sinr(i, channels, beams, prob.noise);
      out.rates(members[i] - 1, q) = std::log2(1.0 + g[i]);
    }
    out.sinr.push_back(std::move(g));
  }
  return out;
}

struct BisectionResult {
  double gamma = 0.0;       // Γ_L at exit (feasible)
  double gamma_high = 0.0;  // Γ_H at exit
  double gamma_cap = 0.0;   // initial Γ_H
  BeamformingSolution beams;
  int steps = 0;
  long fixed_point_iterations = 0;
};

/// Largest common rate Γ (within ϵ) such that every active group can meet the
/// per-slot targets γ_k = 2^{Γ/(v_k t_q)} − 1 within the power budget.
inline BisectionResult bisect_maxmin(const GroupProblem& prob, const std::vector<double>& shares,
                                     const OptimizerOptions& opts = {}) {
  BisectionResult res;
  Eigen::Index antennas = 0;
  for (const auto& h : prob.channels) antennas = std::max(antennas, h.size());
  res.beams = BeamformingSolution::zeros(prob, antennas);
  if (prob.num_groups() == 0) return res;
  if (static_cast<int>(shares.size()) != prob.num_groups())
    throw std::invalid_argument("bisect_maxmin: one share per group required");

  std::vector<char> active(shares.size());
  std::vector<int> active_count(static_cast<std::size_t>(prob.num_users()), 0);
  for (int q = 0; q < prob.num_groups(); ++q) {
    active[static_cast<std::size_t>(q)] = shares[static_cast<std::size_t>(q)] >= opts.share_floor;
    if (active[static_cast<std::size_t>(q)])
      for (int k : prob.groups[static_cast<std::size_t>(q)].members) ++active_count[static_cast<std::size_t>(k - 1)];
  }
  double max_gain = 0.0;
  for (int k = 1; k <= prob.num_users(); ++k) {
    if (prob.membership[static_cast<std::size_t>(k - 1)] == 0) continue;
    if (active_count[static_cast<std::size_t>(k - 1)] == 0) return res;  // a covered user gets no airtime
    max_gain = std::max(max_gain, prob.channel(k).squaredNorm());
  }
  double lo = 0.0;
  double hi = std::log2(1.0 + prob.tx_power * max_gain / prob.noise);
  res.gamma_cap = hi;

  while (hi - lo >= opts.bisection_tolerance) {
    const double mid = 0.5 * (lo + hi);
    ++res.steps;
    bool ok = true;
    BeamformingSolution trial = BeamformingSolution::zeros(prob, antennas);
    for (int q = 0; q < prob.num_groups() && ok; ++q) {
      if (!active[static_cast<std::size_t>(q)]) continue;
      const auto& members = prob.groups[static_cast<std::size_t>(q)].members;
      std::vector<double> targets;
      for (int k : members) {
        const double exponent =
            mid / (active_count[static_cast<std::size_t>(k - 1)] * shares[static_cast<std::size_t>(q)]);
        if (exponent > 1000.0) {
          ok = false;
          break;
        }
        targets.push_back(std::exp2(exponent) - 1.0);
      }
      if (!ok) break;
      const PowerMinResult pm =
          power_min_feasibility(prob.group_channels(q), targets, prob.noise, prob.tx_power, opts.inner);
      res.fixed_point_iterations += pm.iterations;
      if (!pm.feasible()) {
        ok = false;
        break;
      }
      trial.beams[static_cast<std::size_t>(q)] = pm.beams;
    }
    if (ok) {
      lo = mid;
      res.beams = std::move(trial);
    } else {
      hi = mid;
    }
  }
  res.gamma = lo;
  res.gamma_high = hi;
  return res;
}

struct RateReport {
  std::vector<std::vector<double>> sinr;        // [q][member]
  std::vector<std::vector<double>> slot_rate;   // [q][member], log2(1+γ)
  std::vector<double> user_rate;                // C_k, indexed k-1
  double gamma = 0.0;                           // bisection Γ* of the kept iterate
  double min_rate = 0.0;                        // min_k C_k over covered users
  std::vector<double> objective_history;        // min_k C_k after each outer iteration
  int bisection_steps = 0;
  long fixed_point_iterations = 0;
  int outer_iterations = 0;
};

struct OptimizationResult {
  RateReport report;
  BeamformingSolution beams;
  Schedule schedule;
};

/// Fills C_k, slot rates, and min rate for fixed beams and shares.
inline RateReport rate_report(const GroupProblem& prob, const BeamformingSolution& beams,
                              const Schedule& schedule) {
  const SlotRates sr = evaluate_slot_rates(prob, beams);
  RateReport r;
  r.sinr = sr.sinr;
  r.user_rate.assign(static_cast<std::size_t>(prob.num_users()), 0.0);
  for (int q = 0; q < prob.num_groups(); ++q) {
    std::vector<double> slot;
    const auto& members = prob.groups[static_cast<std::size_t>(q)].members;
    for (std::size_t i = 0; i < members.size(); ++i) {
      const double rate = std::log2(1.0 + sr.sinr[static_cast<std::size_t>(q)][i]);
      slot.push_back(rate);
      r.user_rate[static_cast<std::size_t>(members[i] - 1)] +=
          schedule.shares[static_cast<std::size_t>(q)] * rate;
    }
    r.slot_rate.push_back(std::move(slot));
  }
  r.min_rate = min_equivalent_rate(sr.rates, schedule.shares, prob.membership);
  return r;
}

/// Alternates max-min beamforming (bisection) with LP time allocation until the
/// min equivalent rate improves by less than ε or N outer iterations elapse. A
/// regressing iterate is discarded in favour of the incumbent.
inline OptimizationResult alternate(const GroupProblem& prob, const OptimizerOptions& opts = {}) {
  OptimizationResult best;
  best.schedule = Schedule::uniform(prob.num_groups());
  Eigen::Index antennas = 0;
  for (const auto& h : prob.channels) antennas = std::max(antennas, h.size());
  best.beams = BeamformingSolution::zeros(prob, antennas);
  if (prob.num_groups() == 0) {
    best.report = rate_report(prob, best.beams, best.schedule);
    return best;
  }

  std::vector<double> shares = best.schedule.shares;
  bool have_incumbent = false;
  int steps = 0;
  long fp_iters = 0;
  std::vector<double> history;
  int n = 0;
  while (n < opts.max_outer_iterations) {
    ++n;
    const BisectionResult bis = bisect_maxmin(prob, shares, opts);
    steps += bis.steps;
    fp_iters += bis.fixed_point_iterations;
    const SlotRates sr = evaluate_slot_rates(prob, bis.beams);
    const Schedule sched = lp_time_allocation(sr.rates, prob.membership);
    const double objective = sched.objective;

    if (have_incumbent && objective < best.report.min_rate) {
      history.push_back(best.report.min_rate);
      break;
    }
    const double improvement =
        have_incumbent ? objective - best.report.min_rate : std::numeric_limits<double>::infinity();
    best.beams = bis.beams;
    best.schedule = sched;
    best.report = rate_report(prob, best.beams, best.schedule);
    best.report.gamma = bis.gamma;
    have_incumbent = true;
    history.push_back(best.report.min_rate);
    shares = sched.shares;
    if (prob.num_groups() == 1 || improvement < opts.outer_tolerance) break;
  }
  best.report.objective_history = std::move(history);
  best.report.bisection_steps = steps;
  best.report.fixed_point_iterations = fp_iters;
  best.report.outer_iterations = n;
  return best;
}

}  // namespace mmris
