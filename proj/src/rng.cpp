#include "gridrl/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace gridrl {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream));
}

Rng::Rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32)};
  gen_.seed(seq);
}

float Rng::uniform() {
  return static_cast<float>(next_u32() >> 8) * 0x1p-24f;
}

float Rng::uniform_range(float lo, float hi) {
  return lo + (hi - lo) * uniform();
}

int Rng::uniform_int(int n) {
  if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
  const std::uint32_t un = static_cast<std::uint32_t>(n);
  const std::uint32_t limit = UINT32_MAX - UINT32_MAX % un;
  std::uint32_t r;
  do {
    r = next_u32();
  } while (r >= limit);
  return static_cast<int>(r % un);
}

float Rng::normal() {
  // Box-Muller; u1 kept away from zero.
  const double u1 = (static_cast<double>(next_u32()) + 1.0) * 0x1p-32;
  const double u2 = static_cast<double>(next_u32()) * 0x1p-32;
  return static_cast<float>(std::sqrt(-2.0 * std::log(u1)) *
                            std::cos(2.0 * std::numbers::pi * u2));
}

std::string Rng::save_state() const {
  std::ostringstream os;
  os << gen_;
  return os.str();
}

void Rng::load_state(const std::string& state) {
  std::istringstream is(state);
  is >> gen_;
  if (is.fail()) throw std::runtime_error("Rng::load_state: malformed state");
}

}  // namespace gridrl
