#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "coast/baseline.hpp"
#include "coast/bench.hpp"
#include "coast/domains.hpp"

namespace coast {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(10) << x;
  return s.str();
}

}  // namespace

void check_config(const BenchConfig& cfg) {
  auto [lo, hi] = domains::parameter_range(cfg.domain);
  if (cfg.sweep_lo > cfg.sweep_hi) throw std::invalid_argument("empty sweep");
  if (cfg.sweep_lo < lo || cfg.sweep_hi > hi)
    throw std::invalid_argument(cfg.domain + ": sweep must lie in " + std::to_string(lo) + ".." + std::to_string(hi));
  if (cfg.trials == 0) throw std::invalid_argument("trials must be positive");
  if (cfg.algorithms.empty()) throw std::invalid_argument("no algorithm");
  for (const auto& a : cfg.algorithms)
    if (a != "coast" && a != "incremental") throw std::invalid_argument("unknown algorithm " + a);
  if (cfg.timeout_s < 0) throw std::invalid_argument("negative timeout");
  if (cfg.cache_probability && (*cfg.cache_probability < 0 || *cfg.cache_probability > 1))
    throw std::invalid_argument("cache probability must be in [0, 1]");
  if (cfg.budget.per_instance == 0) throw std::invalid_argument("per-instance budget must be positive");
}

std::string config_hash(const BenchConfig& cfg) {
  std::ostringstream s;
  s << cfg.domain << '|' << cfg.sweep_lo << ':' << cfg.sweep_hi << '|' << cfg.trials << '|';
  for (const auto& a : cfg.algorithms) s << a << ',';
  s << '|' << (cfg.mode ? to_string(*cfg.mode) : "default") << '|'
    << (cfg.cache_probability ? fmt(*cfg.cache_probability) : "default") << '|' << fmt(cfg.timeout_s) << '|'
    << cfg.seed << '|' << cfg.budget.per_instance << '/' << cfg.budget.global;
  std::ostringstream h;
  h << std::hex << std::setw(16) << std::setfill('0') << fnv1a(s.str());
  return h.str();
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{
      "config_hash", "domain",         "parameter",     "trial",         "seed",
      "algorithm",   "mode",           "cache_probability", "timeout",   "status",
      "solved",      "valid",          "feasible",      "iterations",    "plan_length",
      "sampler_calls", "sample_attempts", "cache_hits", "max_ground_actions", "task_time",
      "stream_plan_time", "sample_time", "total_time"};
  return cols;
}

void write_csv_header(std::ostream& out) {
  const auto& cols = csv_columns();
  for (size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

void write_csv_row(std::ostream& out, const TrialRow& r) {
  out << r.config_hash << ',' << r.domain << ',' << r.parameter << ',' << r.trial << ',' << r.seed << ','
      << r.algorithm << ',' << r.mode << ',' << fmt(r.cache_probability) << ',' << fmt(r.timeout) << ','
      << r.status << ',' << r.solved << ',' << r.valid << ',' << r.feasible << ',' << r.iterations << ','
      << r.plan_length << ',' << r.sampler_calls << ',' << r.sample_attempts << ',' << r.cache_hits << ','
      << r.max_ground_actions << ',' << fmt(r.task_time) << ',' << fmt(r.stream_plan_time) << ','
      << fmt(r.sample_time) << ',' << fmt(r.total_time) << '\n';
}

std::vector<TrialRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV");
  const auto& cols = csv_columns();
  if (split(line, ',') != cols) throw std::runtime_error("unexpected CSV header: " + line);
  std::vector<TrialRow> rows;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto f = split(line, ',');
    if (f.size() != cols.size()) throw std::runtime_error("CSV line " + std::to_string(lineno) + ": wrong field count");
    try {
      TrialRow r;
      size_t i = 0;
      r.config_hash = f[i++];
      r.domain = f[i++];
      r.parameter = std::stoi(f[i++]);
      r.trial = std::stoull(f[i++]);
      r.seed = std::stoull(f[i++]);
      r.algorithm = f[i++];
      r.mode = f[i++];
      r.cache_probability = std::stod(f[i++]);
      r.timeout = std::stod(f[i++]);
      r.status = f[i++];
      r.solved = f[i++] == "1";
      r.valid = f[i++] == "1";
      r.feasible = f[i++] == "1";
      r.iterations = std::stoull(f[i++]);
      r.plan_length = std::stoull(f[i++]);
      r.sampler_calls = std::stoull(f[i++]);
      r.sample_attempts = std::stoull(f[i++]);
      r.cache_hits = std::stoull(f[i++]);
      r.max_ground_actions = std::stoull(f[i++]);
      r.task_time = std::stod(f[i++]);
      r.stream_plan_time = std::stod(f[i++]);
      r.sample_time = std::stod(f[i++]);
      r.total_time = std::stod(f[i++]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw std::runtime_error("CSV line " + std::to_string(lineno) + ": bad number");
    }
  }
  return rows;
}

TrialRow run_trial(const BenchConfig& cfg, const std::string& algorithm, int parameter, std::size_t trial) {
  TrialRow row;
  row.config_hash = config_hash(cfg);
  row.domain = cfg.domain;
  row.parameter = parameter;
  row.trial = trial;
  row.seed = cfg.seed + trial;
  row.algorithm = algorithm;
  row.timeout = cfg.timeout_s;

  TampProblem tp = domains::make_instance(cfg.domain, parameter, row.seed);
  row.feasible = tp.info.feasible;
  EngineStats stats;
  std::optional<Solution> sol;

  if (algorithm == "coast") {
    EngineConfig ec = default_config(tp);
    if (cfg.mode) ec.mode = *cfg.mode;
    if (cfg.cache_probability) ec.cache_probability = *cfg.cache_probability;
    ec.timeout_s = cfg.timeout_s;
    ec.seed = row.seed;
    ec.budget = cfg.budget;
    row.mode = to_string(ec.mode);
    row.cache_probability = ec.cache_probability;
    std::ofstream log;
    if (cfg.log_dir) {
      std::filesystem::create_directories(*cfg.log_dir);
      log.open(*cfg.log_dir / (cfg.domain + "-" + std::to_string(parameter) + "-" + std::to_string(trial) + ".jsonl"));
      ec.event_log = &log;
    }
    EngineResult r = coast::coast(tp, ec);
    row.status = to_string(r.status);
    stats = r.stats;
    sol = std::move(r.solution);
  } else {
    IncrementalConfig ic;
    ic.timeout_s = cfg.timeout_s;
    ic.seed = row.seed;
    ic.budget = cfg.budget;
    row.mode = "certified";
    IncrementalResult r = incremental(tp, ic);
    row.status = r.resource_exhausted ? "exhausted" : to_string(r.status);
    stats = r.stats;
    sol = std::move(r.solution);
  }

  row.solved = sol.has_value();
  if (sol) {
    row.valid = validate_solution(*sol, tp, algorithm == "coast").ok;
    row.plan_length = sol->plan.length();
  }
  row.iterations = stats.iterations;
  row.sampler_calls = stats.sampler_calls;
  row.sample_attempts = stats.sample_attempts;
  row.cache_hits = stats.cache_hits;
  row.max_ground_actions = stats.max_ground_actions;
  row.task_time = stats.task_time;
  row.stream_plan_time = stats.stream_plan_time;
  row.sample_time = stats.sample_time;
  row.total_time = stats.total_time;
  return row;
}

std::vector<TrialRow> run_benchmark(const BenchConfig& cfg, std::ostream* csv) {
  check_config(cfg);
  struct Job {
    int parameter;
    std::string algorithm;
    size_t trial;
  };
  std::vector<Job> jobs;
  for (int p = cfg.sweep_lo; p <= cfg.sweep_hi; ++p)
    for (const auto& a : cfg.algorithms)
      for (size_t t = 0; t < cfg.trials; ++t) jobs.push_back({p, a, t});

  std::vector<std::optional<TrialRow>> done(jobs.size());
  std::mutex mu;
  size_t written = 0;
  if (csv) {
    write_csv_header(*csv);
    csv->flush();
  }
  auto finish = [&](size_t i, TrialRow row) {
    std::lock_guard<std::mutex> lock(mu);
    done[i] = std::move(row);
    if (!csv) return;
    while (written < done.size() && done[written]) write_csv_row(*csv, *done[written++]);
    csv->flush();
  };

  std::atomic<size_t> next{0};
  std::exception_ptr error;
  auto worker = [&] {
    for (size_t i; (i = next++) < jobs.size();) {
      try {
        finish(i, run_trial(cfg, jobs[i].algorithm, jobs[i].parameter, jobs[i].trial));
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
        next = jobs.size();
      }
    }
  };
  size_t n = std::clamp<size_t>(cfg.jobs, 1, jobs.size());
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (size_t k = 0; k < n; ++k) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  std::vector<TrialRow> rows;
  for (auto& r : done) rows.push_back(std::move(*r));
  return rows;
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) return std::nan("");
  std::sort(xs.begin(), xs.end());
  double pos = q * static_cast<double>(xs.size() - 1);
  size_t lo = static_cast<size_t>(std::floor(pos));
  size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

double clamped(double value, const TrialRow& row) { return row.solved ? std::min(value, row.timeout) : row.timeout; }

std::vector<SummaryRow> summarize(const std::vector<TrialRow>& rows) {
  using Key = std::tuple<std::string, int, std::string>;
  std::vector<Key> order;
  std::map<Key, std::vector<const TrialRow*>> groups;
  for (const auto& r : rows) {
    Key k{r.domain, r.parameter, r.algorithm};
    if (!groups.count(k)) order.push_back(k);
    groups[k].push_back(&r);
  }
  std::vector<SummaryRow> out;
  for (const auto& k : order) {
    const auto& g = groups[k];
    SummaryRow s;
    s.domain = std::get<0>(k);
    s.parameter = std::get<1>(k);
    s.algorithm = std::get<2>(k);
    s.trials = g.size();
    std::vector<double> task, total, calls;
    for (const TrialRow* r : g) {
      s.solved += r->solved;
      task.push_back(clamped(r->task_time, *r));
      total.push_back(clamped(r->total_time, *r));
      calls.push_back(static_cast<double>(r->sampler_calls));
    }
    s.task_time_median = quantile(task, 0.5);
    s.task_time_q1 = quantile(task, 0.25);
    s.task_time_q3 = quantile(task, 0.75);
    s.total_time_median = quantile(total, 0.5);
    s.total_time_q1 = quantile(total, 0.25);
    s.total_time_q3 = quantile(total, 0.75);
    s.sampler_calls_median = quantile(calls, 0.5);
    out.push_back(s);
  }
  return out;
}

void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "domain,algorithm,parameter,trials,solved,task_time_median,task_time_q1,task_time_q3,"
         "total_time_median,total_time_q1,total_time_q3,sampler_calls_median\n";
  for (const auto& s : rows)
    out << s.domain << ',' << s.algorithm << ',' << s.parameter << ',' << s.trials << ',' << s.solved << ','
        << fmt(s.task_time_median) << ',' << fmt(s.task_time_q1) << ',' << fmt(s.task_time_q3) << ','
        << fmt(s.total_time_median) << ',' << fmt(s.total_time_q1) << ',' << fmt(s.total_time_q3) << ','
        << fmt(s.sampler_calls_median) << '\n';
}

}  // namespace coast
