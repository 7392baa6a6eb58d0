#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace heartval {

// All randomness in the project flows from one run seed. Sub-streams are
// derived by hashing a component tag (and optional index) into the seed, so
// any stage can be re-run in isolation and still match a full run.
//
//   derive_seed(base, "fold", 3)          -> seed of fold 3
//   derive_seed(fold_seed, "epoch", e)    -> shuffle stream of epoch e
//   derive_seed(post_seed, "pass", i)     -> dropout stream of MC pass i
uint64_t splitmix64(uint64_t x);
uint64_t fnv1a64(std::string_view s);
uint64_t derive_seed(uint64_t base, std::string_view tag);
uint64_t derive_seed(uint64_t base, std::string_view tag, uint64_t index);

// mt19937_64 with fixed draw algorithms. The standard distributions are
// implementation-defined, so uniform/normal/bounded-int are spelled out here
// to keep byte-identical outputs across toolchains.
class Rng {
public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the spare draw is kept for the next call.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Uniform integer in [0, bound) without modulo bias.
  uint64_t below(uint64_t bound) {
    if (bound == 0) return 0;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % bound;
  }

  bool bernoulli(double p_true) { return uniform01() < p_true; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace heartval
