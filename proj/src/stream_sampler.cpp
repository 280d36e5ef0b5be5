#include <algorithm>

#include "coast/stream_sampler.hpp"

namespace coast {

std::optional<Atom> sample_instance(const StreamInstance& si, Binding& Y, const SamplerRegistry& samplers,
                                    StreamCache& cache, Rng& rng, SampleStats* stats) {
  auto fn = samplers.samplers.find(si.stream_name);
  if (fn == samplers.samplers.end()) throw MissingSampler("no sampler registered for " + si.stream_name);
  std::vector<SamplerArg> args;
  bool cacheable = true;
  std::vector<std::string> key_inputs;
  for (const auto& in : si.inputs) {
    SamplerArg a{in.name, nullptr};
    if (in.kind == ObjectKind::StreamObject) {
      auto it = Y.find(in.name);
      if (it == Y.end()) throw std::logic_error("stream object " + in.name + " used before it was sampled");
      a.value = &it->second;
      cacheable = false;
    }
    key_inputs.push_back(in.name);
    args.push_back(a);
  }

  std::optional<std::vector<Value>> out;
  auto key = std::make_pair(si.stream_name, key_inputs);
  if (cacheable && cache.reuse_probability > 0) {
    auto it = cache.entries.find(key);
    if (it != cache.entries.end() && !it->second.empty()) {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      if (u(rng) < cache.reuse_probability) {
        std::uniform_int_distribution<size_t> pick(0, it->second.size() - 1);
        out = it->second[pick(rng)];
        if (stats) ++stats->cache_hits;
      }
    }
  }
  if (!out) {
    if (stats) ++stats->sampler_calls;
    out = fn->second(args, rng);
    if (!out) return std::nullopt;
    if (out->size() != si.outputs.size())
      throw std::logic_error("sampler for " + si.stream_name + " returned the wrong number of outputs");
    if (cacheable) cache.entries[key].push_back(*out);
  }
  for (size_t i = 0; i < si.outputs.size(); ++i) Y[si.outputs[i].name] = (*out)[i];
  return si.certified_fact;
}

SampleResult adaptive_binding(const StreamPlan& psi, const SamplerRegistry& samplers, StreamCache& cache,
                              const SampleBudget& budget, Rng& rng, const Binding& initial) {
  const auto& inst = psi.instances;
  const size_t n = inst.size();
  for (const auto& si : inst)
    if (!samplers.samplers.count(si.stream_name)) throw MissingSampler("no sampler registered for " + si.stream_name);

  // Most recent upstream producer of any stream-object input.
  std::vector<int> producer(n, -1);
  std::map<std::string, size_t> made_by;
  for (size_t i = 0; i < n; ++i) {
    for (const auto& in : inst[i].inputs) {
      auto it = made_by.find(in.name);
      if (it != made_by.end()) producer[i] = std::max(producer[i], static_cast<int>(it->second));
    }
    for (const auto& o : inst[i].outputs) made_by[o.name] = i;
  }

  SampleResult result;
  result.stats.attempts.assign(n, 0);
  Binding Y = initial;
  std::set<Atom> certified;
  size_t deepest = 0;
  Binding best_Y = Y;
  std::set<Atom> best_certified;
  size_t blame = 0;
  size_t i = 0;
  while (i < n) {
    if (result.stats.attempts[i] >= budget.per_instance || result.stats.total_attempts >= budget.global + n) break;
    ++result.stats.attempts[i];
    ++result.stats.total_attempts;
    auto fact = sample_instance(inst[i], Y, samplers, cache, rng, &result.stats);
    if (fact) {
      certified.insert(*fact);
      ++i;
      if (i > deepest) {
        deepest = i;
        best_Y = Y;
        best_certified = certified;
      }
      continue;
    }
    blame = i;
    if (producer[i] >= 0) {
      size_t j = static_cast<size_t>(producer[i]);
      for (size_t k = j; k < i; ++k) {
        certified.erase(inst[k].certified_fact);
        for (const auto& o : inst[k].outputs) Y.erase(o.name);
      }
      i = j;
    }
  }
  if (i == n) {
    result.bindings = std::move(Y);
    result.certified = std::move(certified);
    return result;
  }
  result.bindings = std::move(best_Y);
  result.certified = std::move(best_certified);
  result.failed_index = blame;
  result.failed_instance = inst[blame];
  return result;
}

bool is_successful(const StreamPlan& psi, const std::set<Atom>& certified) {
  return std::all_of(psi.instances.begin(), psi.instances.end(),
                     [&](const StreamInstance& si) { return certified.count(si.certified_fact) != 0; });
}

}  // namespace coast
