#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "coast/domains.hpp"

namespace coast::domains::detail {

inline TampProblem assemble(InstanceInfo info, std::string_view domain, const std::string& problem,
                            std::string_view streams, std::string_view geom) {
  TampProblem tp;
  tp.info = std::move(info);
  tp.domain = parse_domain(domain);
  tp.problem = parse_problem(problem, tp.domain);
  tp.streams = parse_streams(streams);
  tp.geom = parse_geometric(geom, tp.domain);
  check_geometric_streams(tp.geom, tp.streams);
  return tp;
}

inline const Value& value(const SamplerArg& a) {
  if (!a.value) throw std::invalid_argument("sampler argument " + a.name + " has no value");
  return *a.value;
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t attempt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (attempt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

}  // namespace coast::domains::detail
