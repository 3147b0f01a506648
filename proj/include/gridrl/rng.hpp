#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace gridrl {

// Derives an independent stream seed from (run seed, stream id) via splitmix64.
// Components draw from disjoint streams so that adding one component never
// perturbs another component's random sequence.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream);

// Deterministic RNG over std::mt19937 with explicit sampling routines, so draws
// never depend on the standard library's distribution implementations.
class Rng {
 public:
  Rng() : Rng(0) {}
  explicit Rng(std::uint64_t seed);

  std::uint32_t next_u32() { return gen_(); }

  float uniform();                          // [0, 1)
  float uniform_range(float lo, float hi);  // [lo, hi)
  int uniform_int(int n);                   // [0, n), unbiased
  float normal();                           // standard normal (Box-Muller)

  template <typename It>
  void shuffle(It first, It last) {
    // Fisher-Yates
    auto n = last - first;
    for (auto i = n - 1; i > 0; --i) {
      auto j = uniform_int(static_cast<int>(i) + 1);
      std::swap(first[i], first[j]);
    }
  }

  std::string save_state() const;
  void load_state(const std::string& state);

  bool operator==(const Rng& other) const { return gen_ == other.gen_; }

 private:
  std::mt19937 gen_;
};

}  // namespace gridrl
