#pragma once

#include <cstdint>
#include <complex>

namespace pagnn {

// Deterministic generator with portable distributions (uniform via the top
// 53 bits, Gaussian via Box-Muller) so that identical seeds reproduce
// identical draws bit-for-bit across platforms.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  // Derives an independent stream, e.g. one per sample index.
  static Rng stream(uint64_t seed, uint64_t index);

  uint64_t next_u64();
  double uniform();                       // [0, 1)
  double uniform(double lo, double hi);
  double gaussian();                      // N(0, 1)
  double gumbel();                        // Gumbel(0, 1)
  std::complex<double> cgaussian();       // CN(0, 1)
  uint64_t uniform_int(uint64_t n);       // [0, n)

 private:
  uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pagnn
