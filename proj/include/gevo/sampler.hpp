#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <vector>

#include "gevo/util.hpp"

namespace gevo {

// Source of generation choices. Implementations must return values in range:
// sample_alt in [0, arity), sample_rep in [lo, hi) when hi != 0 (hi == 0
// means unbounded). effective_arity is a notification hook used by
// generators that reinterpret a node (e.g. the flattener).
class Sampler {
 public:
  virtual ~Sampler() = default;
  virtual std::uint32_t sample_alt(std::uint32_t arity, std::uint32_t node) = 0;
  virtual std::uint32_t sample_rep(std::uint32_t lo, std::uint32_t hi, std::uint32_t node) = 0;
  virtual void effective_arity(std::uint32_t node, std::uint32_t arity) {
    (void)node;
    (void)arity;
  }
};

// Splittable counter-based PRNG (splitmix64). Unbounded repetitions draw
// from a geometric distribution with continue probability 1/2, hard-capped
// at 64 elements.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n) via 128-bit multiply-shift.
  std::uint32_t below(std::uint32_t n) {
    return static_cast<std::uint32_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
  }

 private:
  std::uint64_t state_;
};

class RandomSampler final : public Sampler {
 public:
  explicit RandomSampler(std::uint64_t seed) : rng_(seed) {}

  std::uint32_t sample_alt(std::uint32_t arity, std::uint32_t) override {
    return arity <= 1 ? 0 : rng_.below(arity);
  }

  std::uint32_t sample_rep(std::uint32_t lo, std::uint32_t hi, std::uint32_t) override {
    if (hi != 0) {
      return hi - lo <= 1 ? lo : lo + rng_.below(hi - lo);
    }
    // geometric with continue probability 1/2: consecutive low one-bits of a
    // single draw; 64 ones caps the count at kRepCap by construction
    const auto extra = static_cast<std::uint32_t>(std::countr_one(rng_.next()));
    return std::min(lo + extra, kRepCap);
  }

  SplitMix64& rng() { return rng_; }

  static constexpr std::uint32_t kRepCap = 64;

 private:
  SplitMix64 rng_;
};

// Test/replay sampler with explicit choice queues. Throws if a queue runs
// dry; scripted tests are expected to know their choice sequence exactly.
class ScriptedSampler : public Sampler {
 public:
  ScriptedSampler(std::vector<std::uint32_t> alts, std::vector<std::uint32_t> reps)
      : alts_(alts.begin(), alts.end()), reps_(reps.begin(), reps.end()) {}

  std::uint32_t sample_alt(std::uint32_t arity, std::uint32_t) override {
    if (alts_.empty()) throw std::runtime_error("scripted sampler: alt queue exhausted");
    std::uint32_t v = alts_.front();
    alts_.pop_front();
    if (v >= arity) throw std::runtime_error("scripted sampler: alt choice out of range");
    return v;
  }

  std::uint32_t sample_rep(std::uint32_t lo, std::uint32_t hi, std::uint32_t) override {
    if (reps_.empty()) throw std::runtime_error("scripted sampler: rep queue exhausted");
    std::uint32_t v = reps_.front();
    reps_.pop_front();
    if (v < lo || (hi != 0 && v >= hi)) throw std::runtime_error("scripted sampler: rep count out of range");
    return v;
  }

  bool exhausted() const { return alts_.empty() && reps_.empty(); }

 private:
  std::deque<std::uint32_t> alts_;
  std::deque<std::uint32_t> reps_;
};

// Replays a precomputed stack of alternation picks, then defers to the
// inner sampler. Repetition draws and notifications always pass through.
class ReplaySampler final : public Sampler {
 public:
  ReplaySampler(const std::vector<std::uint32_t>& stack, Sampler& inner)
      : stack_(stack.begin(), stack.end()), inner_(inner) {}

  std::uint32_t sample_alt(std::uint32_t arity, std::uint32_t node) override {
    if (!stack_.empty()) {
      std::uint32_t v = stack_.front();
      stack_.pop_front();
      return v < arity ? v : arity - 1;
    }
    return inner_.sample_alt(arity, node);
  }

  std::uint32_t sample_rep(std::uint32_t lo, std::uint32_t hi, std::uint32_t node) override {
    return inner_.sample_rep(lo, hi, node);
  }

  void effective_arity(std::uint32_t node, std::uint32_t arity) override {
    inner_.effective_arity(node, arity);
  }

 private:
  std::deque<std::uint32_t> stack_;
  Sampler& inner_;
};

}  // namespace gevo
