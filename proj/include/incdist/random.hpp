#pragma once

// Deterministic random variate generation.  A std::mt19937_64 supplies raw
// bits; every transform to a double is written out here so that a given seed
// produces the same stream on any platform (std::*_distribution is not
// specified tightly enough for that).

#include <cmath>
#include <cstdint>
#include <random>

#include "incdist/common.hpp"
#include "incdist/special_functions.hpp"

namespace incdist::rng {

class engine {
 public:
  explicit engine(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on (0, 1): 53-bit mantissa, offset half an ulp so 0 and 1 are
  // never produced.
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via the inverse CDF (one uniform per variate).
  double normal() { return sf::normal_cdf_inverse(uniform()); }

  // Gamma(shape, 1) by Marsaglia-Tsang squeeze; shapes below one are boosted
  // and corrected with the standard power-of-uniform identity.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw parameter_error("gamma variate: shape > 0");
    if (shape < 1.0)
      return gamma(shape + 1.0) * std::pow(uniform(), 1.0 / shape);
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / (3.0 * std::sqrt(d));
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Integer K >= 1 with P(K = k) proportional to k^{-s}, s > 1, by
  // rejection-inversion (Devroye).  Astronomically large candidates (beyond
  // 2^62) are rejected to avoid overflow; their total mass is negligible for
  // the shape range accepted elsewhere in the library.
  double zipf(double s) {
    if (!(s > 1.0)) throw parameter_error("zipf variate: exponent > 1");
    const double sm1 = s - 1.0;
    const double b = std::pow(2.0, sm1);
    for (;;) {
      const double u = uniform();
      const double v = uniform();
      const double raw = std::pow(u, -1.0 / sm1);
      if (raw > 4.6e18) continue;
      const double x = std::floor(raw);
      const double t = std::pow(1.0 + 1.0 / x, sm1);
      if (v * x * (t - 1.0) / (b - 1.0) <= t / b) return x;
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace incdist::rng
