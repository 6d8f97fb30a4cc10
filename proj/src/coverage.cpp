#include "gevo/coverage.hpp"

namespace gevo {

std::unordered_set<std::string> kpath_denominator(const GrammarGraph& g, std::uint32_t k) {
  std::unordered_set<std::string> out;
  for (const auto& walk : enumerate_k_paths(g, k)) {
    out.insert(detail::pack_chain(walk.data(), walk.size()));
  }
  return out;
}

KPathReport kpath_report(const std::unordered_set<std::string>& observed, const GrammarGraph& g,
                         std::uint32_t k) {
  const std::unordered_set<std::string> denom = kpath_denominator(g, k);
  std::size_t covered = 0;
  for (const std::string& chain : observed) {
    if (denom.count(chain)) ++covered;
  }
  KPathReport r;
  r.k = k;
  r.covered = covered;
  r.total = denom.size();
  r.percent = r.total == 0 ? 0.0 : 100.0 * static_cast<double>(covered) / static_cast<double>(r.total);
  return r;
}

}  // namespace gevo
