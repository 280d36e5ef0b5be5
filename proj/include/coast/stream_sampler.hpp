#pragma once

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "coast/stream_planner.hpp"

namespace coast {

/// Opaque sampled payload (pose tuples, grasp ids, waypoint lists). Only
/// domains interpret it.
using Value = std::vector<double>;
using Rng = std::mt19937_64;

/// One argument handed to a sampler: PDDL objects carry only their name,
/// stream objects also their bound value.
struct SamplerArg {
  std::string name;
  const Value* value = nullptr;
};

using SamplerFn = std::function<std::optional<std::vector<Value>>(std::span<const SamplerArg> inputs, Rng& rng)>;
/// Deterministic re-verification of a certified fact from inputs ++ outputs.
using CheckerFn = std::function<bool(std::span<const SamplerArg> args)>;

struct SamplerRegistry {
  std::map<std::string, SamplerFn> samplers;
  std::map<std::string, CheckerFn> checkers;
};

/// Y: stream object name -> value.
using Binding = std::map<std::string, Value>;

class MissingSampler : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Previously successful outputs of instances whose inputs are all PDDL
/// objects, reused with probability `reuse_probability`.
struct StreamCache {
  double reuse_probability = 0.0;
  std::map<std::pair<std::string, std::vector<std::string>>, std::vector<std::vector<Value>>> entries;
};

/// `global` bounds the attempts made beyond the first one of each instance.
struct SampleBudget {
  std::size_t per_instance = 20;
  std::size_t global = 200;
};

struct SampleStats {
  std::vector<std::size_t> attempts;
  std::size_t total_attempts = 0;
  std::size_t sampler_calls = 0;
  std::size_t cache_hits = 0;
};

struct SampleResult {
  Binding bindings;
  std::set<Atom> certified;
  std::optional<StreamInstance> failed_instance;
  std::optional<std::size_t> failed_index;
  SampleStats stats;

  bool success() const { return !failed_instance; }
};

/// Samples one instance. On success the outputs are bound in `Y` and the
/// certified fact is returned.
std::optional<Atom> sample_instance(const StreamInstance& si, Binding& Y, const SamplerRegistry& samplers,
                                    StreamCache& cache, Rng& rng, SampleStats* stats = nullptr);

/// Samples ψ in order with bounded backtracking: a failing instance rewinds
/// to the most recent producer of one of its stream-object inputs, or is
/// retried when it has none. Gives up when the next attempt would exceed the
/// per-instance or global budget and reports the deepest partial result.
SampleResult adaptive_binding(const StreamPlan& psi, const SamplerRegistry& samplers, StreamCache& cache,
                              const SampleBudget& budget, Rng& rng, const Binding& initial = {});

bool is_successful(const StreamPlan& psi, const std::set<Atom>& certified);

}  // namespace coast
