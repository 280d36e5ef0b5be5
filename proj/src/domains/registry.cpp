#include <fstream>

#include "coast/baseline.hpp"
#include "common.hpp"

namespace coast::domains {

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

}  // namespace

std::vector<std::string> kinds() { return {"blocks", "kitchen", "rover"}; }

std::pair<int, int> parameter_range(const std::string& kind) {
  if (kind == "blocks") return {0, 6};
  if (kind == "kitchen") return {1, 8};
  if (kind == "rover" || kind == "rover-occluded" || kind == "rover-connected") return {1, 4};
  throw std::invalid_argument("unknown domain kind " + kind);
}

TampProblem make_instance(const std::string& kind, int parameter, std::uint64_t seed) {
  auto [lo, hi] = parameter_range(kind);
  if (parameter < lo || parameter > hi)
    throw std::invalid_argument(kind + ": parameter must be in " + std::to_string(lo) + ".." + std::to_string(hi));
  if (kind == "blocks") return blocks_instance(parameter, seed);
  if (kind == "kitchen") return kitchen_instance(parameter, seed);
  if (kind == "rover-occluded") return rover_instance(parameter, seed, {.occlude_objectives = true});
  if (kind == "rover-connected") return rover_instance(parameter, seed, {.connected = true});
  return rover_instance(parameter, seed);
}

void export_instance(const TampProblem& tp, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  spit(dir / "domain.pddl", to_pddl(tp.domain));
  spit(dir / "problem.pddl", to_pddl(tp.problem));
  spit(dir / "streams.pddl", streams_to_pddl(tp.streams, tp.domain.name));
  spit(dir / "geometric.pddl", geometric_to_pddl(tp.geom, tp.domain.name));
  spit(dir / "domain-certified.pddl", to_pddl(certified_domain(tp)));
  std::ostringstream m;
  m << "kind = " << tp.info.kind << "\nparameter = " << tp.info.parameter << "\nseed = " << tp.info.seed
    << "\nfeasible = " << (tp.info.feasible ? "true" : "false") << "\nmode = " << to_string(tp.mode)
    << "\ncache_probability = " << tp.cache_probability << '\n';
  spit(dir / "instance.txt", m.str());
}

TampProblem load_instance(const std::filesystem::path& dir) {
  std::map<std::string, std::string> meta;
  std::istringstream in(slurp(dir / "instance.txt"));
  for (std::string line; std::getline(in, line);) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    meta[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  for (const char* k : {"kind", "parameter", "seed"})
    if (!meta.count(k)) throw std::runtime_error(dir.string() + "/instance.txt: missing " + k);
  TampProblem tp = make_instance(meta["kind"], std::stoi(meta["parameter"]), std::stoull(meta["seed"]));
  tp.domain = parse_domain(slurp(dir / "domain.pddl"));
  tp.problem = parse_problem(slurp(dir / "problem.pddl"), tp.domain);
  tp.streams = parse_streams(slurp(dir / "streams.pddl"));
  tp.geom = parse_geometric(slurp(dir / "geometric.pddl"), tp.domain);
  check_geometric_streams(tp.geom, tp.streams);
  if (meta.count("mode")) tp.mode = parse_constraint_mode(meta["mode"]);
  if (meta.count("cache_probability")) tp.cache_probability = std::stod(meta["cache_probability"]);
  return tp;
}

}  // namespace coast::domains
