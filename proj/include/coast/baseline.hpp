#pragma once

#include <cstdint>
#include <optional>

#include "coast/engine.hpp"

namespace coast {

/// Certified-fact variant of the domain: each action with a geometric
/// definition takes its geometric inputs and outputs as extra parameters and
/// requires the certified facts directly in its precondition.
Domain certified_domain(const TampProblem& tp);

struct IncrementalConfig {
  double timeout_s = 60.0;
  SampleBudget budget;
  std::uint64_t seed = 0;
  std::size_t node_budget = 500'000;
  std::size_t max_levels = 8;
  /// Stream instances created across all levels.
  std::size_t max_instances = 100'000;
  std::size_t grounding_cap = 1'000'000;
};

struct IncrementalResult {
  EngineStatus status = EngineStatus::Unsolvable;
  /// Gave up because the instance pool or the grounding grew past its cap.
  bool resource_exhausted = false;
  std::optional<Solution> solution;
  EngineStats stats;
  std::size_t levels = 0;
  std::size_t instances = 0;
};

/// Optimistic incremental baseline: create stream instances over the
/// current object pool, plan on the certified-fact domain with optimistic
/// facts, sample the instances the plan uses, withhold the ones that fail,
/// and repeat one level deeper.
IncrementalResult incremental(const TampProblem& tp, const IncrementalConfig& cfg);

}  // namespace coast
