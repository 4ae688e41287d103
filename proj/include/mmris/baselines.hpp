#pragma once

#include <optional>
#include <vector>

#include "mmris/channel.hpp"
#include "mmris/plan.hpp"

namespace mmris {

/// Best one-RIS path for each user: the RIS visible from both the BS and the
/// user with the largest closed-form gain (ties to the smaller index).
inline std::vector<std::optional<ReflectionPath>> single_reflection_paths(const Scenario& s) {
  std::vector<std::optional<ReflectionPath>> paths;
  for (int k = 1; k <= s.num_users(); ++k) {
    const int u = s.user_node(k);
    std::optional<ReflectionPath> best;
    for (int j = 1; j <= s.num_ris(); ++j) {
      if (visibility(0, j, s) != 1 || visibility(j, u, s) != 1) continue;
      ReflectionPath p;
      p.user = k;
      p.ris_sequence = {j};
      p.total_weight = link_weight(0, j, s) + link_weight(j, u, s);
      p.predicted_gain = closed_form_gain(p, s);
      if (!best || p.predicted_gain > best->predicted_gain) best = std::move(p);
    }
    paths.push_back(std::move(best));
  }
  return paths;
}

/// Every user restricted to one reflection; users without a one-RIS path are
/// flagged in `unserved` with rate 0.
inline PlanResult single_reflection(const Scenario& s, const PipelineOptions& opts = {}) {
  PlanResult plan = assemble_plan(s, single_reflection_paths(s), opts.phase);
  plan.result = alternate(plan.problem, opts.optimizer);
  return plan;
}

/// Direct BS→user LoS for all users (blockage ignored), one group for the whole period.
inline PlanResult non_ris(const Scenario& s, const PipelineOptions& opts = {}) {
  PlanResult plan;
  plan.paths.assign(static_cast<std::size_t>(s.num_users()), std::nullopt);
  ActivationGroup all{1, {}};
  for (int k = 1; k <= s.num_users(); ++k) {
    plan.channels.push_back(direct_channel(k, s));
    all.members.push_back(k);
  }
  plan.conflicts = ConflictGraph(all.members);
  plan.cover.groups = {all};
  plan.cover.membership = membership_counts(plan.cover.groups, s.num_users());
  plan.problem.groups = plan.cover.groups;
  plan.problem.membership = plan.cover.membership;
  plan.problem.noise = s.noise_power;
  plan.problem.tx_power = s.tx_power;
  for (const auto& ch : plan.channels) plan.problem.channels.push_back(ch.row);
  plan.result = alternate(plan.problem, opts.optimizer);
  return plan;
}

/// w_k^q = √(P_T/|I_q|) · h_k^H/‖h_k‖ for every member.
inline BeamformingSolution mrt_beams(const GroupProblem& prob) {
  BeamformingSolution sol;
  for (const auto& g : prob.groups) {
    std::vector<CVector> beams;
    const double power = prob.tx_power / static_cast<double>(g.members.size());
    for (int k : g.members) {
      const CRowVector& h = prob.channel(k);
      beams.push_back(std::sqrt(power) * h.adjoint() / h.norm());
    }
    sol.beams.push_back(std::move(beams));
  }
  return sol;
}

/// Multi-reflection paths and groups, MRT beams with an equal power split, LP time shares.
inline PlanResult mrt_no_interference_mgmt(const Scenario& s, const PipelineOptions& opts = {}) {
  PlanResult plan = assemble_plan(s, multi_reflection_paths(s, opts.max_hops), opts.phase);
  OptimizationResult& out = plan.result;
  out.beams = mrt_beams(plan.problem);
  const SlotRates sr = evaluate_slot_rates(plan.problem, out.beams);
  out.schedule = lp_time_allocation(sr.rates, plan.problem.membership);
  out.report = rate_report(plan.problem, out.beams, out.schedule);
  out.report.gamma = out.report.min_rate;
  out.report.objective_history = {out.report.min_rate};
  out.report.outer_iterations = 1;
  return plan;
}

}  // namespace mmris
