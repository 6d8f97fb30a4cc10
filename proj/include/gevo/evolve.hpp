#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <thread>
#include <vector>

#include "gevo/backend.hpp"
#include "gevo/constraints.hpp"
#include "gevo/sampler.hpp"

namespace gevo {

class DimensionMismatch : public std::runtime_error {
 public:
  DimensionMismatch() : std::runtime_error("objective vectors have differing dimensions") {}
};

// Maximization: a dominates b iff a >= b everywhere and a > b somewhere.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

// Fast non-dominated sorting; fronts by descending domination order.
std::vector<std::vector<std::size_t>> nondominated_sort(const std::vector<ObjectiveVector>& scores);

// NSGA-II crowding distance order within one front: boundary points first,
// then by descending distance, ties by index.
std::vector<std::size_t> crowding_order(const std::vector<ObjectiveVector>& scores,
                                        const std::vector<std::size_t>& front);

// Selection order for the partially consumed last front.
using NichingSorter = std::function<std::vector<std::size_t>(
    const std::vector<ObjectiveVector>& scores, const std::vector<std::size_t>& front)>;

// Picks the next population from a combined pool: fronts are consumed in
// descending domination order, and the partially consumed last front follows
// the niching sorter's order exactly.
std::vector<std::size_t> nsga2_select(const std::vector<ObjectiveVector>& pool_scores,
                                      std::size_t population, const NichingSorter& niching);

struct GaParams {
  std::uint32_t population = 100;   // p
  std::uint32_t elites = 10;        // e
  std::uint32_t candidates = 200;   // c
  std::uint32_t max_iterations = 500;  // i
  double crossover_prob = 0.7;
  std::uint64_t budget_ms = 0;  // 0: no wall-clock budget

  void validate() const {
    if (population == 0) throw std::invalid_argument("population must be >= 1");
    if (elites > population) throw std::invalid_argument("elites must be <= population");
    if (candidates + elites < population) {
      throw std::invalid_argument("candidates must be >= population - elites");
    }
    if (max_iterations == 0) throw std::invalid_argument("max_iterations must be >= 1");
  }
};

template <class B>
struct Member {
  typename B::Tree tree;
  ObjectiveVector scores;
  double fitness = 0.0;
  std::vector<NodePath> violations;  // union over constraints
};

struct GenerationStats {
  std::size_t generation = 0;
  double best_fitness = 0.0;
  std::vector<std::size_t> front_sizes;
  std::size_t satisfied = 0;
};

enum class StopReason : std::uint8_t { AllSatisfied, IterationLimit, Budget };

template <class B>
struct EvoResult {
  std::vector<Member<B>> population;
  std::vector<GenerationStats> stats;
  bool all_satisfied = false;
  StopReason stop = StopReason::IterationLimit;
  std::size_t generations = 0;
};

template <class B>
using GenerationHook =
    std::function<void(const GenerationStats&, const std::vector<Member<B>>&)>;

constexpr double kSatisfiedEps = 1e-9;

inline bool objective_satisfied(const ObjectiveVector& v) {
  for (double s : v) {
    if (s < 1.0 - kSatisfiedEps) return false;
  }
  return true;
}

namespace detail {

template <class B>
void evaluate_member(Member<B>& m, const std::vector<std::unique_ptr<Constraint<B>>>& cs) {
  auto [scores, violations] = check<B>(m.tree, cs);
  m.scores = std::move(scores);
  m.fitness = 0;
  for (double s : m.scores) m.fitness += s;
  m.violations.clear();
  for (auto& vs : violations) {
    m.violations.insert(m.violations.end(), vs.begin(), vs.end());
  }
}

// Constraint evaluation is pure, so members may be scored concurrently.
template <class B>
void evaluate_all(std::vector<Member<B>>& members,
                  const std::vector<std::unique_ptr<Constraint<B>>>& cs, unsigned jobs) {
  if (jobs <= 1 || members.size() < 2) {
    for (auto& m : members) evaluate_member(m, cs);
    return;
  }
  const unsigned n = std::min<unsigned>(jobs, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  std::size_t chunk = (members.size() + n - 1) / n;
  for (unsigned t = 0; t < n; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(members.size(), lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) evaluate_member(members[i], cs);
    });
  }
  for (auto& th : pool) th.join();
}

// Indices sorted by fitness descending, index ascending.
template <class B>
std::vector<std::size_t> fitness_order(const std::vector<Member<B>>& members) {
  std::vector<std::size_t> order(members.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return members[a].fitness > members[b].fitness;
  });
  return order;
}

template <class B>
struct Breeder {
  B& backend;
  const std::vector<Member<B>>& pop;
  const GaParams& params;
  SplitMix64& rng;
  RandomSampler& sampler;

  std::vector<Member<B>> breed() {
    std::vector<Member<B>> out;
    out.reserve(params.candidates);
    std::size_t guard = 0;
    const std::size_t guard_max = std::size_t(params.candidates) * 16 + 64;
    while (out.size() < params.candidates && guard++ < guard_max) {
      const bool want_cross =
          pop.size() >= 2 &&
          (double(rng.next() >> 11) * 0x1.0p-53) < params.crossover_prob;
      if (want_cross) {
        if (try_crossover(out)) continue;
        // NoCandidate: fall back to a mutation instead of re-admitting
        // unmodified parents.
      }
      try_mutation(out);
    }
    return out;
  }

  bool try_crossover(std::vector<Member<B>>& out) {
    const std::uint32_t n = static_cast<std::uint32_t>(pop.size());
    std::uint32_t i = rng.below(n);
    std::uint32_t j = rng.below(n - 1);
    if (j >= i) ++j;
    Member<B> c1{pop[i].tree, {}, 0, {}};
    Member<B> c2{pop[j].tree, {}, 0, {}};
    auto paths = all_node_paths(B::view(c1.tree));
    const NodePath& path1 = paths[rng.below(static_cast<std::uint32_t>(paths.size()))];
    auto res = backend.crossover(c1.tree, path1, c2.tree, sampler);
    if (!res.ok() || !res.value().swapped) return false;
    out.push_back(std::move(c1));
    if (out.size() < params.candidates) out.push_back(std::move(c2));
    return true;
  }

  void try_mutation(std::vector<Member<B>>& out) {
    const std::uint32_t n = static_cast<std::uint32_t>(pop.size());
    const std::size_t i = rng.below(n);
    Member<B> c{pop[i].tree, {}, 0, {}};
    NodePath path;
    if (!pop[i].violations.empty()) {
      path = pop[i].violations[rng.below(static_cast<std::uint32_t>(pop[i].violations.size()))];
    } else {
      auto paths = all_node_paths(B::view(c.tree));
      path = paths[rng.below(static_cast<std::uint32_t>(paths.size()))];
    }
    if (backend.mutate(c.tree, path, sampler).ok()) out.push_back(std::move(c));
  }
};

struct Clock {
  std::chrono::steady_clock::time_point begin = std::chrono::steady_clock::now();
  bool expired(std::uint64_t budget_ms) const {
    if (budget_ms == 0) return false;
    const auto elapsed = std::chrono::steady_clock::now() - begin;
    return std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count() >=
           static_cast<long long>(budget_ms);
  }
};

}  // namespace detail

// The elitist single-fitness loop: fitness is the sum of constraint scores,
// the e best members are forcibly propagated, and the next population is
// the elites plus the p-e best candidates.
template <class B>
EvoResult<B> fandango_ga(B& backend, const std::vector<std::unique_ptr<Constraint<B>>>& cs,
                         const GaParams& params, std::uint64_t seed,
                         const GenerationHook<B>& hook = {}, unsigned jobs = 1) {
  params.validate();
  detail::Clock clock;
  SplitMix64 rng(derive_seed(seed, 0xace));
  RandomSampler sampler(derive_seed(seed, 1));

  EvoResult<B> result;
  std::vector<Member<B>>& pop = result.population;
  for (std::uint32_t i = 0; i < params.population; ++i) {
    auto t = backend.generate(sampler);
    if (!t.ok()) throw std::runtime_error("generation failed while seeding the population");
    pop.push_back(Member<B>{std::move(t).value(), {}, 0, {}});
  }
  detail::evaluate_all(pop, cs, jobs);

  for (std::size_t gen = 0;; ++gen) {
    GenerationStats stats;
    stats.generation = gen;
    stats.satisfied = 0;
    stats.best_fitness = 0;
    for (const auto& m : pop) {
      stats.best_fitness = std::max(stats.best_fitness, m.fitness);
      if (objective_satisfied(m.scores)) ++stats.satisfied;
    }
    stats.front_sizes = {pop.size()};
    result.stats.push_back(stats);
    if (hook) hook(stats, pop);

    if (stats.satisfied == pop.size()) {
      result.all_satisfied = true;
      result.stop = StopReason::AllSatisfied;
      break;
    }
    if (gen + 1 >= params.max_iterations) {
      result.stop = StopReason::IterationLimit;
      break;
    }
    if (clock.expired(params.budget_ms)) {
      result.stop = StopReason::Budget;
      break;
    }

    detail::Breeder<B> breeder{backend, pop, params, rng, sampler};
    std::vector<Member<B>> candidates = breeder.breed();
    detail::evaluate_all(candidates, cs, jobs);

    std::vector<Member<B>> next;
    next.reserve(params.population);
    const auto pop_order = detail::fitness_order(pop);
    for (std::uint32_t e = 0; e < params.elites && e < pop_order.size(); ++e) {
      next.push_back(pop[pop_order[e]]);
    }
    const auto cand_order = detail::fitness_order(candidates);
    for (std::size_t i = 0; i < cand_order.size() && next.size() < params.population; ++i) {
      next.push_back(std::move(candidates[cand_order[i]]));
    }
    // candidate shortfall can only happen if breeding stalled entirely
    for (std::size_t i = 0; next.size() < params.population; ++i) {
      next.push_back(pop[pop_order[i % pop_order.size()]]);
    }
    pop = std::move(next);
  }
  result.generations = result.stats.size();
  return result;
}

// NSGA-II: no forced elites; the combined pool of the previous population
// and the candidates is consumed front by front, the last partial front
// selected by the niching sorter (crowding distance by default).
template <class B>
EvoResult<B> nsga2(B& backend, const std::vector<std::unique_ptr<Constraint<B>>>& cs,
                   const GaParams& params, std::uint64_t seed, NichingSorter niching = {},
                   const GenerationHook<B>& hook = {}, unsigned jobs = 1) {
  params.validate();
  if (!niching) niching = crowding_order;
  detail::Clock clock;
  SplitMix64 rng(derive_seed(seed, 0xace));
  RandomSampler sampler(derive_seed(seed, 1));

  EvoResult<B> result;
  std::vector<Member<B>>& pop = result.population;
  for (std::uint32_t i = 0; i < params.population; ++i) {
    auto t = backend.generate(sampler);
    if (!t.ok()) throw std::runtime_error("generation failed while seeding the population");
    pop.push_back(Member<B>{std::move(t).value(), {}, 0, {}});
  }
  detail::evaluate_all(pop, cs, jobs);

  for (std::size_t gen = 0;; ++gen) {
    std::vector<ObjectiveVector> pop_scores;
    pop_scores.reserve(pop.size());
    for (const auto& m : pop) pop_scores.push_back(m.scores);
    const auto fronts = nondominated_sort(pop_scores);

    GenerationStats stats;
    stats.generation = gen;
    stats.best_fitness = 0;
    for (const auto& m : pop) stats.best_fitness = std::max(stats.best_fitness, m.fitness);
    for (const auto& f : fronts) stats.front_sizes.push_back(f.size());
    stats.satisfied = 0;
    for (const auto& m : pop) {
      if (objective_satisfied(m.scores)) ++stats.satisfied;
    }
    result.stats.push_back(stats);
    if (hook) hook(stats, pop);

    if (stats.satisfied == pop.size()) {
      result.all_satisfied = true;
      result.stop = StopReason::AllSatisfied;
      break;
    }
    if (gen + 1 >= params.max_iterations) {
      result.stop = StopReason::IterationLimit;
      break;
    }
    if (clock.expired(params.budget_ms)) {
      result.stop = StopReason::Budget;
      break;
    }

    detail::Breeder<B> breeder{backend, pop, params, rng, sampler};
    std::vector<Member<B>> candidates = breeder.breed();
    detail::evaluate_all(candidates, cs, jobs);

    std::vector<Member<B>> pool;
    pool.reserve(pop.size() + candidates.size());
    for (auto& m : pop) pool.push_back(std::move(m));
    for (auto& m : candidates) pool.push_back(std::move(m));

    std::vector<ObjectiveVector> pool_scores;
    pool_scores.reserve(pool.size());
    for (const auto& m : pool) pool_scores.push_back(m.scores);

    std::vector<Member<B>> next;
    next.reserve(params.population);
    for (std::size_t idx : nsga2_select(pool_scores, params.population, niching)) {
      next.push_back(std::move(pool[idx]));
    }
    pop = std::move(next);
  }
  result.generations = result.stats.size();
  return result;
}

}  // namespace gevo
