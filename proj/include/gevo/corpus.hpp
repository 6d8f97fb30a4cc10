#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "gevo/bench.hpp"
#include "gevo/constraints.hpp"
#include "gevo/evolve.hpp"
#include "gevo/gen.hpp"

namespace gevo {

struct GenRequest {
  std::uint32_t node = 0;  // graph node to generate from
  std::uint64_t seed = 0;
  ChainConfig chain;
};

struct SolveRequest {
  std::string algo = "nsga2";  // "nsga2" or "fandango"
  GaParams params;
  std::uint64_t seed = 0;
  std::vector<ConstraintSpecItem> constraints;
  ChainConfig chain;
  unsigned jobs = 1;
  std::function<void(const GenerationStats&)> on_stats;
  // serialized population per generation (validity audits)
  std::function<void(std::size_t, const std::vector<std::string>&)> on_population;
};

struct SolveMemberOut {
  std::string bytes;
  bool satisfied = false;
  double fitness = 0;
};

struct SolveOutcome {
  std::vector<SolveMemberOut> population;
  bool all_satisfied = false;
  std::size_t generations = 0;
};

struct BenchJob {
  BenchRequest request;
  std::vector<ConstraintSpecItem> constraints;  // used by the check op
  ChainConfig chain;
};

// Statically compiled grammar, type-erased for the CLI. The static backend
// exists only for grammars compiled into the binary; a grammar file on the
// command line is matched against these by structural graph equality.
struct CorpusOps {
  std::string name;
  const GrammarGraph* graph = nullptr;
  std::function<Expected<std::string, GenErr>(const GenRequest&)> generate_at;
  std::function<SolveOutcome(const SolveRequest&)> solve;
  std::function<std::vector<BenchSample>(const BenchJob&)> bench;
};

const std::vector<CorpusOps>& corpus();

const CorpusOps* find_corpus(const std::vector<CorpusOps>& entries, std::string_view name);
const CorpusOps* match_corpus(const std::vector<CorpusOps>& entries, const GrammarGraph& g);

}  // namespace gevo
