#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmris/mmris.hpp"

namespace fs = std::filesystem;
using namespace mmris;

namespace {

struct CommonFlags {
  std::string scenario;
  std::string out = ".";
  std::string bits = "cont";
  bool rotation_refine = false;
  int max_hops = 0;
  std::optional<std::uint64_t> seed;
  OptimizerOptions optimizer;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("scenario", f.scenario, "scenario JSON file")->required();
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--bits", f.bits, "RIS phase resolution in bits, or 'cont'");
  cmd->add_flag("--rotation-refine", f.rotation_refine, "search codebook rotations when quantizing");
  cmd->add_option("--max-hops", f.max_hops, "cap on reflections per path (0 = none)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", f.seed, "override the scenario seed");
  cmd->add_option("--bisection-tol", f.optimizer.bisection_tolerance, "bisection tolerance, bits")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--outer-tol", f.optimizer.outer_tolerance, "outer-loop tolerance, bits")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-outer", f.optimizer.max_outer_iterations, "outer-loop iteration cap")
      ->check(CLI::PositiveNumber);
}

PipelineOptions pipeline_options(const CommonFlags& f) {
  PipelineOptions opts;
  opts.optimizer = f.optimizer;
  if (f.bits == "cont") {
    opts.phase = PhaseMode::continuous();
  } else {
    int b = 0;
    std::size_t used = 0;
    try {
      b = std::stoi(f.bits, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != f.bits.size() || b < 1 || b > 30)
      throw CLI::ValidationError("--bits", "expected an integer in 1..30 or 'cont'");
    opts.phase = PhaseMode::discrete(b, f.rotation_refine);
  }
  if (f.max_hops > 0) opts.max_hops = f.max_hops;
  return opts;
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "cont" || item == "inf") {
      values.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size()) throw CLI::ValidationError("--values", "bad number \"" + item + "\"");
    values.push_back(v);
  }
  return values;
}

Scenario load(const CommonFlags& f) {
  Scenario s = load_scenario(f.scenario);
  if (f.seed) s.rng_seed = *f.seed;
  return s;
}

int run_plan(const CommonFlags& f, const std::string& scheme_name) {
  const PipelineOptions opts = pipeline_options(f);
  const Scheme scheme = parse_scheme(scheme_name);
  Scenario s;
  try {
    s = load(f);
  } catch (const LoadError& e) {
    std::cerr << "load error: " << e.what() << '\n';
    return 2;
  }
  fs::create_directories(f.out);
  ResultRow row;
  PlanResult plan;
  try {
    PipelineRun run = run_pipeline(s, scheme, opts);
    row = std::move(run.row);
    plan = std::move(run.plan);
  } catch (const std::exception& e) {
    row.scheme = scheme;
    row.status = std::string("error: ") + e.what();
    write_file(fs::path(f.out) / "results.csv", results_csv({row}));
    std::cerr << row.status << '\n';
    return 3;
  }
  write_file(fs::path(f.out) / "results.csv", results_csv({row}));
  write_file(fs::path(f.out) / "timing.csv", timing_csv({row}));
  write_file(fs::path(f.out) / "paths.json", paths_json(s, plan, scheme).dump(2) + "\n");
  write_file(fs::path(f.out) / "groups.json", groups_json(plan).dump(2) + "\n");
  write_file(fs::path(f.out) / "schedule.json", schedule_json(plan).dump(2) + "\n");
  std::cout << to_string(scheme) << ": min rate " << row.min_rate << " bits/s/Hz, " << row.num_groups
            << " groups, " << row.outer_iterations << " outer iterations";
  if (!plan.unserved.empty()) std::cout << ", " << plan.unserved.size() << " unserved";
  std::cout << '\n';
  return 0;
}

int run_sweep_cmd(const CommonFlags& f, const std::string& var, const std::string& values,
                  const std::vector<std::string>& schemes) {
  PipelineOptions opts = pipeline_options(f);
  SweepSpec spec;
  spec.variable = parse_sweep_variable(var);
  spec.values = parse_values(values);
  for (const auto& name : schemes) spec.schemes.push_back(parse_scheme(name));
  spec.validate();
  Scenario s;
  try {
    s = load(f);
  } catch (const LoadError& e) {
    std::cerr << "load error: " << e.what() << '\n';
    return 2;
  }
  const std::vector<ResultRow> rows = run_sweep(s, spec, opts);
  fs::create_directories(f.out);
  write_file(fs::path(f.out) / "results.csv", results_csv(rows));
  write_file(fs::path(f.out) / "timing.csv", timing_csv(rows));
  int failures = 0;
  for (const auto& r : rows) {
    if (!r.ok()) {
      ++failures;
      std::cerr << to_string(r.scheme) << " @ " << format_value(r) << ": " << r.status << '\n';
    }
  }
  std::cout << rows.size() << " rows written to " << (fs::path(f.out) / "results.csv").string() << '\n';
  return failures ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-hop multi-RIS downlink planner"};
  app.require_subcommand(1);

  CommonFlags plan_flags;
  std::string scheme = "multi";
  auto* plan = app.add_subcommand("plan", "run one scheme and write paths/groups/schedule");
  add_common(plan, plan_flags);
  plan->add_option("--scheme", scheme, "multi | single | non_ris | mrt")
      ->check(CLI::IsMember({"multi", "single", "non_ris", "mrt"}));

  CommonFlags sweep_flags;
  std::string var;
  std::string values;
  std::vector<std::string> schemes{"multi"};
  auto* sweep = app.add_subcommand("sweep", "sweep one variable over several schemes");
  add_common(sweep, sweep_flags);
  sweep->add_option("--var", var, "tx_power_dB | elements_per_ris | bs_antennas | quantization_bits")
      ->required()
      ->check(CLI::IsMember({"tx_power_dB", "elements_per_ris", "bs_antennas", "quantization_bits"}));
  sweep->add_option("--values", values, "comma-separated, strictly increasing ('cont' allowed for bits)")
      ->required();
  sweep->add_option("--schemes", schemes, "schemes to run")
      ->delimiter(',')
      ->check(CLI::IsMember({"multi", "single", "non_ris", "mrt"}));

  try {
    app.parse(argc, argv);
    if (*plan) return run_plan(plan_flags, scheme);
    return run_sweep_cmd(sweep_flags, var, values, schemes);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
