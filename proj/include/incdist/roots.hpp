#pragma once

// One-dimensional root bracketing/refinement and golden-section minimization.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <utility>

#include "incdist/common.hpp"

namespace incdist::roots {

struct bracket {
  double lo, hi;      // f(lo) and f(hi) have opposite signs
  double f_lo, f_hi;
};

// Scan [lo, hi] on a geometric or linear grid looking for a sign change of f.
// Points where f is not finite are skipped.
template <typename F>
std::optional<bracket> find_sign_change(F&& f, double lo, double hi,
                                        int points = 64,
                                        bool geometric = false) {
  double prev_x = 0.0, prev_f = 0.0;
  bool have_prev = false;
  for (int i = 0; i <= points; ++i) {
    const double t = static_cast<double>(i) / points;
    const double x = geometric ? lo * std::pow(hi / lo, t)
                               : lo + (hi - lo) * t;
    const double fx = f(x);
    if (!std::isfinite(fx)) {
      have_prev = false;
      continue;
    }
    if (fx == 0.0) return bracket{x, x, 0.0, 0.0};
    if (have_prev && std::signbit(fx) != std::signbit(prev_f))
      return bracket{prev_x, x, prev_f, fx};
    prev_x = x;
    prev_f = fx;
    have_prev = true;
  }
  return std::nullopt;
}

// Brent's method on a bracketing interval.  Tolerance is relative on x with a
// small absolute floor.
template <typename F>
double brent(F&& f, double a, double b, double fa, double fb,
             double rel_tol = 1e-12, int max_iter = 200) {
  if (a == b) return a;
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (std::signbit(fa) == std::signbit(fb))
    throw convergence_error("brent: interval does not bracket a root");
  double c = a, fc = fa, d = b - a, e = d;
  for (int iter = 0; iter < max_iter; ++iter) {
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol = 2.0 * rel_tol * std::abs(b) + 1e-300;
    const double m = 0.5 * (c - b);
    if (std::abs(m) <= tol || fb == 0.0) return b;
    if (std::abs(e) < tol || std::abs(fa) <= std::abs(fb)) {
      d = m; e = m;  // bisection
    } else {
      double p, q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc, r = fb / fc;
        p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q; else p = -p;
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q),
                             std::abs(e * q))) {
        e = d; d = p / q;  // accept interpolation
      } else {
        d = m; e = m;
      }
    }
    a = b; fa = fb;
    b += (std::abs(d) > tol) ? d : (m > 0.0 ? tol : -tol);
    fb = f(b);
    if (std::signbit(fb) == std::signbit(fc)) {
      c = a; fc = fa; d = b - a; e = d;
    }
  }
  throw convergence_error("brent: iteration limit reached");
}

template <typename F>
double brent(F&& f, const bracket& br, double rel_tol = 1e-12,
             int max_iter = 200) {
  return brent(std::forward<F>(f), br.lo, br.hi, br.f_lo, br.f_hi, rel_tol,
               max_iter);
}

struct scalar_minimum {
  double x;
  double value;
  int evaluations;
  bool converged;  // interval shrank below x_tol within the iteration cap
};

// Golden-section minimization of f over [a, b] down to an absolute x
// tolerance.  Non-finite objective values are treated as +inf.
template <typename F>
scalar_minimum golden_section(F&& f, double a, double b, double x_tol,
                              int max_iter = 200) {
  constexpr double inv_phi = 0.61803398874989484820;
  auto safe = [&](double x) {
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = safe(x1), f2 = safe(x2);
  int evals = 2;
  for (int iter = 0; iter < max_iter && (b - a) > x_tol; ++iter) {
    if (f1 <= f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = safe(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = safe(x2);
    }
    ++evals;
  }
  const bool ok = (b - a) <= x_tol;
  return (f1 <= f2) ? scalar_minimum{x1, f1, evals, ok}
                    : scalar_minimum{x2, f2, evals, ok};
}

}  // namespace incdist::roots
