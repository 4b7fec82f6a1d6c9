#include "pagnn/rng.hpp"

#include <cmath>
#include <numbers>

namespace pagnn {

namespace {
// splitmix64 step; also used for seed mixing.
uint64_t mix(uint64_t& s) {
  uint64_t z = (s += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace

Rng Rng::stream(uint64_t seed, uint64_t index) {
  uint64_t s = seed;
  uint64_t a = mix(s);
  s ^= index * 0xd1342543de82ef95ull + 0x2545f4914f6cdd1dull;
  uint64_t b = mix(s);
  return Rng(a ^ (b + 0x9e3779b97f4a7c15ull));
}

uint64_t Rng::next_u64() { return mix(state_); }

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double Rng::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1, u2;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

double Rng::gumbel() {
  double u;
  do {
    u = uniform();
  } while (u <= 0.0);
  return -std::log(-std::log(u));
}

std::complex<double> Rng::cgaussian() {
  // Unit-variance complex normal: each part has variance 1/2.
  const double s = std::numbers::sqrt2 / 2.0;
  double re = gaussian();
  double im = gaussian();
  return {s * re, s * im};
}

uint64_t Rng::uniform_int(uint64_t n) {
  // Rejection-free modulo is fine here; n is always tiny.
  return n ? next_u64() % n : 0;
}

}  // namespace pagnn
