#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "coast/baseline.hpp"
#include "coast/bench.hpp"
#include "coast/domains.hpp"

using namespace coast;

namespace {

constexpr int kSolved = 0;
constexpr int kInvalid = 1;
constexpr int kTimeout = 2;
constexpr int kUnsolvable = 3;
constexpr int kConfigError = 4;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::pair<int, int> parse_sweep(const std::string& text) {
  auto colon = text.find(':');
  try {
    if (colon == std::string::npos) {
      int v = std::stoi(text);
      return {v, v};
    }
    return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
  } catch (const std::logic_error&) {
    throw ConfigError("bad sweep " + text + " (want lo:hi)");
  }
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream s(text);
  for (std::string part; std::getline(s, part, ',');)
    if (!part.empty()) out.push_back(part);
  return out;
}

int status_code(EngineStatus s) {
  switch (s) {
    case EngineStatus::Solved:
      return kSolved;
    case EngineStatus::Timeout:
      return kTimeout;
    case EngineStatus::Unsolvable:
      return kUnsolvable;
  }
  return kUnsolvable;
}

std::filesystem::path summary_path(const std::filesystem::path& out) {
  auto p = out;
  p.replace_filename(out.stem().string() + "-summary" + out.extension().string());
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plan-first task and motion planning"};
  app.require_subcommand(1);

  // bench
  auto* bench = app.add_subcommand("bench", "Run a seeded parameter sweep and write CSV results");
  BenchConfig bc;
  std::string sweep = "0:0", algorithms = "coast", constraint;
  double cache = -1;
  std::filesystem::path bench_out = "results.csv";
  std::string log_dir;
  bench->add_option("--domain", bc.domain, "blocks, kitchen, rover, rover-connected or rover-occluded");
  bench->add_option("--sweep", sweep, "Parameter range lo:hi");
  bench->add_option("--trials", bc.trials, "Seeded trials per sweep point");
  bench->add_option("--algorithm", algorithms, "Comma list of coast, incremental");
  bench->add_option("--constraint", constraint, "action, sequence or collision (default: per domain)");
  bench->add_option("--cache-prob", cache, "Stream cache reuse probability (default: per domain)");
  bench->add_option("--timeout", bc.timeout_s, "Per-trial timeout in seconds");
  bench->add_option("--seed", bc.seed, "Seed of trial 0");
  bench->add_option("--per-instance", bc.budget.per_instance, "Sampling attempts per stream instance");
  bench->add_option("--global", bc.budget.global, "Extra sampling attempts per plan");
  bench->add_option("--jobs", bc.jobs, "Trials run in parallel");
  bench->add_option("--out", bench_out, "Trial CSV; the summary goes next to it");
  bench->add_option("--log-dir", log_dir, "Directory for per-trial event logs");

  // solve
  auto* solve = app.add_subcommand("solve", "Solve one instance");
  std::string dir, kind = "blocks", algorithm = "coast", solve_constraint, solution_out, event_log;
  int parameter = 0;
  std::uint64_t instance_seed = 0, engine_seed = 0;
  double solve_cache = -1, timeout = 60;
  solve->add_option("--dir", dir, "Exported instance directory");
  solve->add_option("--domain", kind, "Generate instead of loading");
  solve->add_option("--param", parameter, "Domain parameter");
  solve->add_option("--instance-seed", instance_seed, "Instance generator seed");
  solve->add_option("--algorithm", algorithm, "coast or incremental");
  solve->add_option("--constraint", solve_constraint, "action, sequence or collision");
  solve->add_option("--cache-prob", solve_cache, "Stream cache reuse probability");
  solve->add_option("--timeout", timeout, "Timeout in seconds");
  solve->add_option("--seed", engine_seed, "Sampling seed");
  solve->add_option("--out", solution_out, "Write the solution here");
  solve->add_option("--log", event_log, "Write the JSON-lines event log here");
  std::size_t revisit_limit = 0;
  solve->add_option("--revisit-limit", revisit_limit, "Drop a constraint set after this many pops (0: never)");

  // validate
  auto* validate = app.add_subcommand("validate", "Replay a saved solution");
  std::string solution_in, validate_dir;
  bool reuse = false;
  validate->add_option("--solution", solution_in, "Solution file")->required();
  validate->add_option("--dir", validate_dir, "Instance directory (default: regenerate from the header)");
  validate->add_flag("--allow-reused-outputs", reuse, "Accept stream objects shared between steps");

  // export
  auto* exp = app.add_subcommand("export", "Write an instance as PDDL files");
  std::string export_kind = "blocks", export_dir;
  int export_param = 0;
  std::uint64_t export_seed = 0;
  exp->add_option("--domain", export_kind, "Domain kind");
  exp->add_option("--param", export_param, "Domain parameter");
  exp->add_option("--seed", export_seed, "Instance seed");
  exp->add_option("--dir", export_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*bench) {
      std::tie(bc.sweep_lo, bc.sweep_hi) = parse_sweep(sweep);
      bc.algorithms = split_commas(algorithms);
      if (!constraint.empty()) bc.mode = parse_constraint_mode(constraint);
      if (cache >= 0) bc.cache_probability = cache;
      if (!log_dir.empty()) bc.log_dir = log_dir;
      try {
        check_config(bc);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      std::ofstream csv(bench_out);
      if (!csv) throw std::runtime_error("cannot write " + bench_out.string());
      auto rows = run_benchmark(bc, &csv);
      auto summary = summarize(rows);
      std::ofstream sum(summary_path(bench_out));
      write_summary(sum, summary);
      write_summary(std::cout, summary);
      return kSolved;
    }

    if (*solve) {
      TampProblem tp;
      try {
        tp = dir.empty() ? domains::make_instance(kind, parameter, instance_seed) : domains::load_instance(dir);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      std::optional<Solution> sol;
      int code;
      if (algorithm == "coast") {
        EngineConfig ec = default_config(tp);
        if (!solve_constraint.empty()) ec.mode = parse_constraint_mode(solve_constraint);
        if (solve_cache >= 0) ec.cache_probability = solve_cache;
        ec.timeout_s = timeout;
        ec.seed = engine_seed;
        if (revisit_limit) ec.revisit_limit = revisit_limit;
        std::ofstream log;
        if (!event_log.empty()) {
          log.open(event_log);
          ec.event_log = &log;
        }
        auto r = coast::coast(tp, ec);
        std::cerr << "status " << to_string(r.status) << " iterations " << r.stats.iterations << " task_time "
                  << r.stats.task_time << " total_time " << r.stats.total_time << '\n';
        sol = std::move(r.solution);
        code = status_code(r.status);
      } else if (algorithm == "incremental") {
        IncrementalConfig ic;
        ic.timeout_s = timeout;
        ic.seed = engine_seed;
        auto r = incremental(tp, ic);
        std::cerr << "status " << (r.resource_exhausted ? "exhausted" : to_string(r.status)) << " levels "
                  << r.levels << " instances " << r.instances << " total_time " << r.stats.total_time << '\n';
        sol = std::move(r.solution);
        code = r.resource_exhausted ? kUnsolvable : status_code(r.status);
      } else {
        throw ConfigError("unknown algorithm " + algorithm);
      }
      if (sol) {
        if (solution_out.empty()) {
          write_solution(std::cout, *sol, tp.info);
        } else {
          std::ofstream out(solution_out);
          write_solution(out, *sol, tp.info);
        }
      }
      return code;
    }

    if (*validate) {
      std::ifstream in(solution_in);
      if (!in) throw ConfigError("cannot read " + solution_in);
      auto [sol, info] = read_solution(in);
      TampProblem tp = validate_dir.empty() ? domains::make_instance(info.kind, info.parameter, info.seed)
                                            : domains::load_instance(validate_dir);
      auto report = validate_solution(sol, tp, !reuse);
      std::cout << (report.ok ? "valid" : "invalid: " + report.reason) << '\n';
      return report.ok ? kSolved : kInvalid;
    }

    if (*exp) {
      TampProblem tp;
      try {
        tp = domains::make_instance(export_kind, export_param, export_seed);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      domains::export_instance(tp, export_dir);
      return kSolved;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kSolved;
}
