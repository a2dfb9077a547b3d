#pragma once

// Test-side reference implementations, deliberately independent of the
// library's numerics: quadrature here is adaptive Simpson (the library uses
// Gauss-Kronrod), special functions come from Boost.Math, and least squares
// is solved via normal equations (the library uses Householder QR).

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/polygamma.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

// ---------------------------------------------------------------------------
// Adaptive Simpson quadrature
// ---------------------------------------------------------------------------

namespace detail {

template <typename F>
double simpson_rec(F& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// `tol` is relative: the 64-panel composite pass estimates the magnitude
// and sets the absolute budget, so integrals of order 1e5 do not get handed
// an unattainable absolute target (which would blow the recursion tree up).
// The recursion is then seeded per panel rather than from one top interval,
// so narrow features a 3-point opening rule would miss still get resolved.
template <typename F>
double integrate(F&& f, double a, double b, double tol = 1e-11) {
  if (!(b > a)) return 0.0;
  constexpr int panels = 64;
  const double h = (b - a) / panels;
  struct panel {
    double x0, fa, fm, fb, s;
  };
  std::vector<panel> ps(panels);
  double mag = 0.0;
  double prev = f(a);
  for (int i = 0; i < panels; ++i) {
    const double x0 = a + i * h;
    const double fmid = f(x0 + 0.5 * h);
    const double fnext = f(i + 1 == panels ? b : x0 + h);
    const double s = h / 6.0 * (prev + 4.0 * fmid + fnext);
    ps[i] = {x0, prev, fmid, fnext, s};
    mag += std::abs(s);
    prev = fnext;
  }
  const double eps = tol * std::max(mag, 1e-12) / panels;
  double total = 0.0;
  for (const auto& p : ps)
    total +=
        detail::simpson_rec(f, p.x0, p.x0 + h, p.fa, p.fm, p.fb, p.s, eps, 42);
  return total;
}

// Improper integral over (a, inf) via x = a + scale * (e^y - 1), y in
// [0, 70].  The exponential map keeps power tails smooth in y (decay
// e^{-(alpha-1) y}); the rational t/(1-t) map would compress them into an
// endpoint singularity that adaptive bisection cannot reach.
template <typename F>
double integrate_tail(F&& f, double a, double scale, double tol = 1e-11) {
  auto g = [&](double y) {
    const double e = std::exp(y);
    const double x = a + scale * (e - 1.0);
    const double v = f(x) * scale * e;
    return std::isfinite(v) ? v : 0.0;
  };
  return integrate(g, 0.0, 70.0, tol);
}

// ---------------------------------------------------------------------------
// Series CDF for the shifted Davis distribution.  Expanding
// 1/(e^{b/y} - 1) = sum_{n>=1} e^{-n b / y} termwise gives
//   F(x) = sum_{n>=1} n^{-alpha} Q(alpha, n beta / (x - c)) / zeta(alpha)
// with Q the regularized upper incomplete gamma from Boost.
// ---------------------------------------------------------------------------

inline double davis_cdf_series(double alpha, double beta, double c, double x) {
  if (!(x > c)) return 0.0;
  const double y = x - c;
  double acc = 0.0;
  for (int n = 1; n <= 100000; ++n) {
    const double term =
        std::pow(static_cast<double>(n), -alpha) *
        boost::math::gamma_q(alpha, n * beta / y);
    acc += term;
    if (n > 8 && term < 1e-17 * (acc + 1e-300)) break;
  }
  return acc / boost::math::zeta(alpha);
}

// ---------------------------------------------------------------------------
// Gini from the tail probability: G = (1/mu) * integral of S (1 - S) over
// the support, with S the survival function.  Taking S rather than the cdf
// matters: for heavy tails the slowly-decaying region dominates, and there
// 1 - cdf(x) rounds to zero long before its contribution is spent, while a
// directly computed survival stays representable.
// ---------------------------------------------------------------------------

template <typename Survival>
double gini_from_tail(Survival&& survival, double left, double mu,
                      double scale) {
  auto integrand = [&](double x) {
    const double s = survival(x);
    return s * (1.0 - s);
  };
  return integrate_tail(integrand, left, scale, 1e-12) / mu;
}

// ---------------------------------------------------------------------------
// Dense least squares min ||A x - b|| via normal equations and Gaussian
// elimination with partial pivoting.
// ---------------------------------------------------------------------------

inline std::vector<double> least_squares_normal(
    const std::vector<std::vector<double>>& a, const std::vector<double>& b) {
  const std::size_t m = a.size();
  if (m == 0) throw std::invalid_argument("empty system");
  const std::size_t k = a[0].size();
  std::vector<std::vector<double>> g(k, std::vector<double>(k + 1, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t cidx = 0; cidx < k; ++cidx)
        g[r][cidx] += a[i][r] * a[i][cidx];
      g[r][k] += a[i][r] * b[i];
    }
  }
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r)
      if (std::abs(g[r][col]) > std::abs(g[piv][col])) piv = r;
    std::swap(g[col], g[piv]);
    if (g[col][col] == 0.0) throw std::runtime_error("singular system");
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col) continue;
      const double factor = g[r][col] / g[col][col];
      for (std::size_t cidx = col; cidx <= k; ++cidx)
        g[r][cidx] -= factor * g[col][cidx];
    }
  }
  std::vector<double> x(k);
  for (std::size_t r = 0; r < k; ++r) x[r] = g[r][k] / g[r][r];
  return x;
}

// ---------------------------------------------------------------------------
// Central finite differences
// ---------------------------------------------------------------------------

template <typename F>
double derivative(F&& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Higher-order (five point) first derivative for tighter tolerances.
template <typename F>
double derivative5(F&& f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) /
         (12.0 * h);
}

}  // namespace oracle
