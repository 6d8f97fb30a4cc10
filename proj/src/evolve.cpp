#include "gevo/evolve.hpp"

#include <algorithm>
#include <limits>

namespace gevo {

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
  if (a.size() != b.size()) throw DimensionMismatch();
  bool strictly = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return false;
    if (a[i] > b[i]) strictly = true;
  }
  return strictly;
}

std::vector<std::vector<std::size_t>> nondominated_sort(
    const std::vector<ObjectiveVector>& scores) {
  const std::size_t n = scores.size();
  for (const auto& v : scores) {
    if (v.size() != scores.front().size()) throw DimensionMismatch();
  }
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<std::size_t> dominator_count(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (dominates(scores[i], scores[j])) {
        dominated[i].push_back(j);
        ++dominator_count[j];
      } else if (dominates(scores[j], scores[i])) {
        dominated[j].push_back(i);
        ++dominator_count[i];
      }
    }
  }
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < n; ++i) {
    if (dominator_count[i] == 0) current.push_back(i);
  }
  while (!current.empty()) {
    fronts.push_back(current);
    std::vector<std::size_t> next;
    for (std::size_t i : current) {
      for (std::size_t j : dominated[i]) {
        if (--dominator_count[j] == 0) next.push_back(j);
      }
    }
    std::sort(next.begin(), next.end());
    current = std::move(next);
  }
  return fronts;
}

std::vector<std::size_t> nsga2_select(const std::vector<ObjectiveVector>& pool_scores,
                                      std::size_t population, const NichingSorter& niching) {
  std::vector<std::size_t> out;
  out.reserve(population);
  for (const auto& front : nondominated_sort(pool_scores)) {
    if (out.size() >= population) break;
    const std::size_t room = population - out.size();
    if (front.size() <= room) {
      out.insert(out.end(), front.begin(), front.end());
    } else {
      const auto order = niching ? niching(pool_scores, front) : crowding_order(pool_scores, front);
      for (std::size_t i = 0; i < room; ++i) out.push_back(order[i]);
    }
  }
  return out;
}

std::vector<std::size_t> crowding_order(const std::vector<ObjectiveVector>& scores,
                                        const std::vector<std::size_t>& front) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const std::size_t m = front.empty() ? 0 : scores[front[0]].size();
  std::vector<double> distance(front.size(), 0.0);
  for (std::size_t obj = 0; obj < m; ++obj) {
    std::vector<std::size_t> order(front.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return scores[front[a]][obj] < scores[front[b]][obj];
    });
    const double lo = scores[front[order.front()]][obj];
    const double hi = scores[front[order.back()]][obj];
    distance[order.front()] = kInf;
    distance[order.back()] = kInf;
    if (hi - lo <= 0) continue;
    for (std::size_t i = 1; i + 1 < order.size(); ++i) {
      if (distance[order[i]] == kInf) continue;
      distance[order[i]] +=
          (scores[front[order[i + 1]]][obj] - scores[front[order[i - 1]]][obj]) / (hi - lo);
    }
  }
  std::vector<std::size_t> out(front.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
  std::stable_sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
    if (distance[a] != distance[b]) return distance[a] > distance[b];
    return front[a] < front[b];
  });
  std::vector<std::size_t> result(front.size());
  for (std::size_t i = 0; i < out.size(); ++i) result[i] = front[out[i]];
  return result;
}

}  // namespace gevo
