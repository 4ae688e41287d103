#pragma once

#include <optional>
#include <vector>

#include "mmris/grouping.hpp"
#include "mmris/optimizer.hpp"
#include "mmris/path_select.hpp"
#include "mmris/scenario.hpp"

namespace mmris {

struct PipelineOptions {
  PhaseMode phase;
  std::optional<int> max_hops;
  OptimizerOptions optimizer;
};

/// Output of one scheme run: the chosen paths, groups, and optimized rates.
struct PlanResult {
  std::vector<std::optional<ReflectionPath>> paths;  // indexed k-1; nullopt = no path / direct
  std::vector<EffectiveChannel> channels;            // indexed k-1; empty row when unserved
  ConflictGraph conflicts;
  GroupCover cover;
  GroupProblem problem;
  OptimizationResult result;
  std::vector<int> unserved;  // users with rate forced to 0

  /// C_k for every user, zero for unserved ones.
  const std::vector<double>& user_rates() const { return result.report.user_rate; }
  double min_rate() const {
    double m = std::numeric_limits<double>::infinity();
    for (double c : result.report.user_rate) m = std::min(m, c);
    return std::isfinite(m) ? m : 0.0;
  }
};

/// Dijkstra path for every user on the connection graph.
inline std::vector<std::optional<ReflectionPath>> multi_reflection_paths(
    const Scenario& s, std::optional<int> max_hops = std::nullopt) {
  const ConnectionGraph g = build_connection_graph(s);
  std::vector<std::optional<ReflectionPath>> paths;
  for (int k = 1; k <= s.num_users(); ++k) paths.push_back(best_path(k, g, s, max_hops));
  return paths;
}

/// Cascade channels, conflict graph, MIS cover and the optimizer input for a
/// set of per-user paths. Users without a path are left out of every group.
inline PlanResult assemble_plan(const Scenario& s, std::vector<std::optional<ReflectionPath>> paths,
                                const PhaseMode& phase) {
  PlanResult plan;
  plan.paths = std::move(paths);
  std::vector<ReflectionPath> served;
  plan.channels.resize(plan.paths.size());
  for (std::size_t i = 0; i < plan.paths.size(); ++i) {
    const int k = static_cast<int>(i) + 1;
    if (!plan.paths[i]) {
      plan.unserved.push_back(k);
      plan.channels[i].user = k;
      continue;
    }
    plan.channels[i] = cascade_channel(*plan.paths[i], phase, s);
    served.push_back(*plan.paths[i]);
  }
  plan.conflicts = build_conflict_graph(served, s);
  plan.cover = cover_with_mis(scheduling_index_order(plan.conflicts), plan.conflicts, s.num_users());

  plan.problem.groups = plan.cover.groups;
  plan.problem.membership = plan.cover.membership;
  plan.problem.noise = s.noise_power;
  plan.problem.tx_power = s.tx_power;
  for (const auto& ch : plan.channels) plan.problem.channels.push_back(ch.row);
  return plan;
}

/// The full multi-reflection scheme: paths, groups, joint beamforming and scheduling.
inline PlanResult multi_reflection(const Scenario& s, const PipelineOptions& opts = {}) {
  PlanResult plan = assemble_plan(s, multi_reflection_paths(s, opts.max_hops), opts.phase);
  plan.result = alternate(plan.problem, opts.optimizer);
  return plan;
}

}  // namespace mmris
