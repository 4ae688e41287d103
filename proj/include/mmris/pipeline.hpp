#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmris/baselines.hpp"
#include "mmris/plan.hpp"
#include "mmris/scenario.hpp"

namespace mmris {

enum class Scheme { Multi, Single, NonRis, Mrt };

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::Multi: return "multi";
    case Scheme::Single: return "single";
    case Scheme::NonRis: return "non_ris";
    case Scheme::Mrt: return "mrt";
  }
  return "?";
}

inline Scheme parse_scheme(const std::string& name) {
  if (name == "multi") return Scheme::Multi;
  if (name == "single") return Scheme::Single;
  if (name == "non_ris") return Scheme::NonRis;
  if (name == "mrt") return Scheme::Mrt;
  throw std::invalid_argument("unknown scheme \"" + name + "\"");
}

inline PlanResult run_scheme(const Scenario& s, Scheme scheme, const PipelineOptions& opts) {
  switch (scheme) {
    case Scheme::Multi: return multi_reflection(s, opts);
    case Scheme::Single: return single_reflection(s, opts);
    case Scheme::NonRis: return non_ris(s, opts);
    case Scheme::Mrt: return mrt_no_interference_mgmt(s, opts);
  }
  throw std::invalid_argument("run_scheme: bad scheme");
}

/// One line of results.csv.
struct ResultRow {
  Scheme scheme = Scheme::Multi;
  std::string variable = "none";
  double value = std::numeric_limits<double>::quiet_NaN();
  double min_rate = 0.0;  // min_k C_k over all users, unserved users count as 0
  double gamma = 0.0;     // bisection Γ* of the kept iterate
  int num_groups = 0;
  std::vector<double> user_rates;
  int bisection_steps = 0;
  long fixed_point_iterations = 0;
  int outer_iterations = 0;
  double wall_ms = 0.0;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

struct PipelineRun {
  ResultRow row;
  PlanResult plan;
};

inline PipelineRun run_pipeline(const Scenario& s, Scheme scheme, const PipelineOptions& opts = {}) {
  const auto start = std::chrono::steady_clock::now();
  PipelineRun run;
  run.plan = run_scheme(s, scheme, opts);
  const auto stop = std::chrono::steady_clock::now();
  ResultRow& r = run.row;
  const RateReport& rep = run.plan.result.report;
  r.scheme = scheme;
  r.min_rate = run.plan.min_rate();
  r.gamma = rep.gamma;
  r.num_groups = run.plan.cover.num_groups();
  r.user_rates = rep.user_rate;
  r.bisection_steps = rep.bisection_steps;
  r.fixed_point_iterations = rep.fixed_point_iterations;
  r.outer_iterations = rep.outer_iterations;
  r.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  return run;
}

enum class SweepVariable { TxPowerDb, ElementsPerRis, BsAntennas, QuantizationBits };

inline const char* to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::TxPowerDb: return "tx_power_dB";
    case SweepVariable::ElementsPerRis: return "elements_per_ris";
    case SweepVariable::BsAntennas: return "bs_antennas";
    case SweepVariable::QuantizationBits: return "quantization_bits";
  }
  return "?";
}

inline SweepVariable parse_sweep_variable(const std::string& name) {
  for (auto v : {SweepVariable::TxPowerDb, SweepVariable::ElementsPerRis, SweepVariable::BsAntennas,
                 SweepVariable::QuantizationBits})
    if (name == to_string(v)) return v;
  throw std::invalid_argument("unknown sweep variable \"" + name + "\"");
}

/// Sweep definition. For quantization_bits, +inf stands for continuous phases.
struct SweepSpec {
  SweepVariable variable = SweepVariable::TxPowerDb;
  std::vector<double> values;
  std::vector<Scheme> schemes;

  void validate() const {
    if (values.empty()) throw std::invalid_argument("sweep: values must be nonempty");
    for (std::size_t i = 1; i < values.size(); ++i)
      if (!(values[i] > values[i - 1])) throw std::invalid_argument("sweep: values must be strictly increasing");
    if (schemes.empty()) throw std::invalid_argument("sweep: schemes must be nonempty");
    for (double v : values) {
      if (variable == SweepVariable::TxPowerDb) {
        if (!std::isfinite(v)) throw std::invalid_argument("sweep: tx power must be finite");
        continue;
      }
      if (variable == SweepVariable::QuantizationBits && std::isinf(v) && v > 0) continue;
      if (v < 1 || v != std::floor(v) || !std::isfinite(v))
        throw std::invalid_argument("sweep: " + std::string(to_string(variable)) +
                                    " values must be positive integers");
    }
  }
};

/// Applies one sweep value to a copy of the scenario/options.
inline void apply_sweep_value(SweepVariable var, double value, Scenario& s, PipelineOptions& opts) {
  switch (var) {
    case SweepVariable::TxPowerDb: s.tx_power = db_to_linear(value); break;
    case SweepVariable::ElementsPerRis: {
      const auto [x, y] = split_elements(static_cast<int>(value));
      for (Node& n : s.nodes)
        if (n.kind == NodeKind::RIS) {
          n.elements_x = x;
          n.elements_y = y;
        }
      break;
    }
    case SweepVariable::BsAntennas: s.bs_antennas = static_cast<int>(value); break;
    case SweepVariable::QuantizationBits:
      if (std::isinf(value)) opts.phase.bits.reset();
      else opts.phase.bits = static_cast<int>(value);
      break;
  }
}

/// One row per (scheme, value), ordered by scheme then value. A failing point
/// becomes an error row and the sweep continues.
inline std::vector<ResultRow> run_sweep(const Scenario& base, const SweepSpec& spec,
                                        const PipelineOptions& base_opts = {}) {
  spec.validate();
  std::vector<Scheme> schemes = spec.schemes;
  std::sort(schemes.begin(), schemes.end());
  schemes.erase(std::unique(schemes.begin(), schemes.end()), schemes.end());
  std::vector<ResultRow> rows;
  for (Scheme scheme : schemes) {
    for (double value : spec.values) {
      Scenario s = base;
      PipelineOptions opts = base_opts;
      ResultRow row;
      try {
        apply_sweep_value(spec.variable, value, s, opts);
        validate(s);
        row = run_pipeline(s, scheme, opts).row;
      } catch (const std::exception& e) {
        row = ResultRow{};
        row.scheme = scheme;
        row.status = std::string("error: ") + e.what();
      }
      row.variable = to_string(spec.variable);
      row.value = value;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// ---- Output -------------------------------------------------------------

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

inline std::string format_value(const ResultRow& r) {
  if (r.variable == "quantization_bits" && std::isinf(r.value)) return "cont";
  return format_number(r.value);
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline constexpr const char* kResultsHeader =
    "scheme,variable,value,min_rate,gamma,num_groups,user_rates,bisection_steps,"
    "fixed_point_iterations,outer_iterations,status";

/// results.csv body. Wall time is kept out so reruns are byte-identical.
inline std::string results_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << kResultsHeader << '\n';
  for (const ResultRow& r : rows) {
    std::string rates;
    for (std::size_t i = 0; i < r.user_rates.size(); ++i)
      rates += (i ? ";" : "") + format_number(r.user_rates[i]);
    out << to_string(r.scheme) << ',' << r.variable << ',' << format_value(r) << ','
        << format_number(r.min_rate) << ',' << format_number(r.gamma) << ',' << r.num_groups << ','
        << rates << ',' << r.bisection_steps << ',' << r.fixed_point_iterations << ','
        << r.outer_iterations << ',' << csv_escape(r.status) << '\n';
  }
  return out.str();
}

inline std::string timing_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << "scheme,variable,value,wall_ms\n";
  for (const ResultRow& r : rows)
    out << to_string(r.scheme) << ',' << r.variable << ',' << format_value(r) << ','
        << format_number(r.wall_ms) << '\n';
  return out.str();
}

inline nlohmann::json paths_json(const Scenario& s, const PlanResult& plan, Scheme scheme) {
  using nlohmann::json;
  json doc{{"scheme", to_string(scheme)}, {"users", json::array()}};
  for (int k = 1; k <= s.num_users(); ++k) {
    const auto& p = plan.paths[static_cast<std::size_t>(k - 1)];
    const auto& ch = plan.channels[static_cast<std::size_t>(k - 1)];
    json u{{"user", k}, {"node", s.user_node(k)}};
    if (p) {
      u["reachable"] = true;
      u["ris_sequence"] = p->ris_sequence;
      u["total_weight"] = p->total_weight;
      u["predicted_gain"] = p->predicted_gain;
    } else {
      u["reachable"] = scheme == Scheme::NonRis;
      u["ris_sequence"] = json::array();
    }
    u["effective_gain"] = ch.row.size() > 0 ? ch.gain : 0.0;
    doc["users"].push_back(u);
  }
  doc["unserved"] = plan.unserved;
  return doc;
}

inline nlohmann::json groups_json(const PlanResult& plan) {
  using nlohmann::json;
  json doc{{"groups", json::array()}, {"membership", plan.cover.membership}};
  for (const auto& g : plan.cover.groups) doc["groups"].push_back({{"q", g.index}, {"members", g.members}});
  json edges = json::array();
  for (int a = 0; a < plan.conflicts.size(); ++a)
    for (int b = a + 1; b < plan.conflicts.size(); ++b)
      if (plan.conflicts.adjacent(a, b)) edges.push_back({plan.conflicts.user(a), plan.conflicts.user(b)});
  doc["conflict_edges"] = edges;
  return doc;
}

inline nlohmann::json schedule_json(const PlanResult& plan) {
  using nlohmann::json;
  const OptimizationResult& r = plan.result;
  const RateReport& rep = r.report;
  json doc;
  doc["shares"] = r.schedule.shares;
  doc["user_rates"] = rep.user_rate;
  doc["min_rate"] = plan.min_rate();
  doc["gamma"] = rep.gamma;
  doc["objective_history"] = rep.objective_history;
  doc["counters"] = {{"bisection_steps", rep.bisection_steps},
                     {"fixed_point_iterations", rep.fixed_point_iterations},
                     {"outer_iterations", rep.outer_iterations}};
  json slots = json::array();
  for (std::size_t q = 0; q < plan.cover.groups.size(); ++q) {
    const auto& g = plan.cover.groups[q];
    json members = json::array();
    for (std::size_t i = 0; i < g.members.size(); ++i) {
      const CVector& w = r.beams.beams[q][i];
      members.push_back({{"user", g.members[i]},
                         {"sinr", rep.sinr[q][i]},
                         {"slot_rate", rep.slot_rate[q][i]},
                         {"beam_power", w.squaredNorm()}});
    }
    slots.push_back({{"q", g.index},
                     {"share", r.schedule.shares[q]},
                     {"power", r.beams.group_power(static_cast<int>(q))},
                     {"members", members}});
  }
  doc["slots"] = slots;
  return doc;
}

}  // namespace mmris
