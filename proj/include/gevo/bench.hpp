#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gevo/backend.hpp"
#include "gevo/constraints.hpp"
#include "gevo/sampler.hpp"
#include "gevo/visit.hpp"

namespace gevo {

// One timed operation. Predictors are symbol-node counts: generate/check
// record n; mutate records n (whole tree) and m (regenerated subtree);
// crossover records n1, n2, m1, m2.
struct BenchSample {
  std::string op;
  std::vector<double> predictors;
  double ns = 0;
};

struct CostModel {
  std::vector<double> coeffs;  // one per predictor, no intercept
  double r2 = 0;
  std::size_t samples = 0;
  bool singular = false;
  double fallback_per_node = 0;  // mean ns per summed predictor when singular
};

// Ordinary least squares without intercept. Requires >= 10x more samples
// than coefficients; SingularDesign (collinear/constant predictors) is
// reported via `singular` with a mean-per-node fallback.
CostModel fit_model(const std::vector<BenchSample>& samples);

std::string bench_samples_to_jsonl(const std::vector<BenchSample>& samples);
std::vector<BenchSample> bench_samples_from_jsonl(const std::string& text);

// Table-style rows, one per operation present in the sample set.
std::string bench_report(const std::vector<BenchSample>& samples, const std::string& label);

struct BenchRequest {
  std::vector<std::string> ops{"generate", "check", "mutate", "crossover"};
  std::chrono::nanoseconds budget = std::chrono::seconds(30);
  std::uint64_t seed = 0;
  std::size_t max_samples_per_op = 500000;
  std::size_t pool_size = 64;
};

namespace detail {

template <class B>
std::size_t count_at(const B&, const typename B::Tree& t, const NodePath& path) {
  auto at = resolve_path(B::view(t), path);
  return count_symbol_nodes(at.value());
}

}  // namespace detail

// Samples operation wall times with a monotonic clock, one operation per
// measurement. The first 1% of each op's budget is warmup and discarded.
template <class B>
std::vector<BenchSample> run_bench(B& backend,
                                   const std::vector<std::unique_ptr<Constraint<B>>>& constraints,
                                   const BenchRequest& rq) {
  using clock = std::chrono::steady_clock;
  std::vector<BenchSample> out;
  RandomSampler sampler(derive_seed(rq.seed, 0xb5));
  SplitMix64 rng(derive_seed(rq.seed, 0xb6));

  // shared workload pool
  std::vector<typename B::Tree> pool;
  pool.reserve(rq.pool_size);
  for (std::size_t i = 0; i < rq.pool_size; ++i) {
    auto t = backend.generate(sampler);
    if (!t.ok()) throw std::runtime_error("bench: generation failed");
    pool.push_back(std::move(t).value());
  }

  const auto op_budget = rq.budget / std::max<std::size_t>(1, rq.ops.size());
  for (const std::string& op : rq.ops) {
    const auto begin = clock::now();
    const auto warmup_end = begin + op_budget / 100;
    const auto end = begin + op_budget;
    std::size_t taken = 0;
    while (clock::now() < end && taken < rq.max_samples_per_op) {
      BenchSample sample;
      sample.op = op;
      bool keep = true;
      if (op == "generate") {
        const auto t0 = clock::now();
        auto t = backend.generate(sampler);
        const auto t1 = clock::now();
        if (!t.ok()) continue;
        sample.predictors = {double(B::symbol_count(t.value()))};
        sample.ns = std::chrono::duration<double, std::nano>(t1 - t0).count();
      } else if (op == "check") {
        const auto& tree = pool[rng.below(static_cast<std::uint32_t>(pool.size()))];
        const auto t0 = clock::now();
        auto r = check<B>(tree, constraints);
        const auto t1 = clock::now();
        (void)r;
        sample.predictors = {double(B::symbol_count(tree))};
        sample.ns = std::chrono::duration<double, std::nano>(t1 - t0).count();
      } else if (op == "mutate") {
        auto& tree = pool[rng.below(static_cast<std::uint32_t>(pool.size()))];
        const auto paths = all_node_paths(B::view(tree));
        const NodePath& path = paths[rng.below(static_cast<std::uint32_t>(paths.size()))];
        const std::size_t n = B::symbol_count(tree);
        const auto t0 = clock::now();
        auto r = backend.mutate(tree, path, sampler);
        const auto t1 = clock::now();
        if (!r.ok()) continue;
        sample.predictors = {double(n), double(detail::count_at(backend, tree, path))};
        sample.ns = std::chrono::duration<double, std::nano>(t1 - t0).count();
      } else if (op == "crossover") {
        const std::uint32_t i = rng.below(static_cast<std::uint32_t>(pool.size()));
        std::uint32_t j = rng.below(static_cast<std::uint32_t>(pool.size() - 1));
        if (j >= i) ++j;
        auto& t1_ = pool[i];
        auto& t2_ = pool[j];
        const auto paths = all_node_paths(B::view(t1_));
        const NodePath& path1 = paths[rng.below(static_cast<std::uint32_t>(paths.size()))];
        const std::size_t n1 = B::symbol_count(t1_);
        const std::size_t n2 = B::symbol_count(t2_);
        const auto c0 = clock::now();
        auto r = backend.crossover(t1_, path1, t2_, sampler);
        const auto c1 = clock::now();
        if (!r.ok() || !r.value().swapped) continue;
        // after the swap: subtree from the other parent sits at each path
        const std::size_t m2 = detail::count_at(backend, t1_, path1);
        const std::size_t m1 = detail::count_at(backend, t2_, r.value().path2);
        sample.predictors = {double(n1), double(n2), double(m1), double(m2)};
        sample.ns = std::chrono::duration<double, std::nano>(c1 - c0).count();
      } else {
        throw std::runtime_error("bench: unknown op '" + op + "'");
      }
      if (clock::now() < warmup_end) keep = false;
      if (keep) {
        out.push_back(std::move(sample));
        ++taken;
      }
    }
  }
  return out;
}

}  // namespace gevo
