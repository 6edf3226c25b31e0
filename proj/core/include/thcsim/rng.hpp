#pragma once

#include <cstdint>

namespace thcsim {

// Stateless counter-based generator: every draw is a pure function of
// (key, counter), so samples can be produced in any order or in parallel.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t bits(std::uint64_t counter) const;
  // Uniform in (0, 1).
  double uniform(std::uint64_t counter) const;
  double normal(std::uint64_t counter) const;

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

std::uint64_t mix64(std::uint64_t x);

// Key for one control call, derived from the scenario seed.
std::uint64_t derive_key(std::uint64_t seed, std::uint64_t step,
                         std::uint64_t stream);

}  // namespace thcsim
