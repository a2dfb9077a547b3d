#pragma once

// Adaptive Gauss-Kronrod (G7, K15) quadrature on finite intervals, plus a
// rational-substitution wrapper for semi-infinite upper tails.

#include <cmath>
#include <cstddef>
#include <vector>

#include "incdist/common.hpp"

namespace incdist::quad {

namespace detail {

// Nodes/weights of the 15-point Kronrod rule (positive half) and the embedded
// 7-point Gauss weights.
inline constexpr double kronrod_nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kronrod_weights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double gauss_weights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <typename F>
struct panel_result {
  double kronrod;
  double error;
};

template <typename F>
panel_result<F> gauss_kronrod_panel(F&& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double f_center = f(center);
  double kronrod = kronrod_weights[7] * f_center;
  double gauss = gauss_weights[3] * f_center;
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kronrod_nodes[i];
    const double fsum = f(center - dx) + f(center + dx);
    kronrod += kronrod_weights[i] * fsum;
    if (i % 2 == 1) gauss += gauss_weights[i / 2] * fsum;
  }
  kronrod *= half;
  gauss *= half;
  return {kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

// Integrate f over [a, b] by adaptive bisection of Gauss-Kronrod panels.
template <typename F>
double integrate(F&& f, double a, double b, double tol = 1e-10,
                 int max_depth = 48) {
  if (a == b) return 0.0;
  struct segment {
    double a, b, value, error;
    int depth;
  };
  auto first = detail::gauss_kronrod_panel(f, a, b);
  std::vector<segment> stack{{a, b, first.kronrod, first.error, 0}};
  double total = 0.0;
  while (!stack.empty()) {
    segment seg = stack.back();
    stack.pop_back();
    if (seg.error <= tol * std::max(1.0, std::abs(seg.value)) ||
        seg.depth >= max_depth) {
      total += seg.value;
      continue;
    }
    const double mid = 0.5 * (seg.a + seg.b);
    auto left = detail::gauss_kronrod_panel(f, seg.a, mid);
    auto right = detail::gauss_kronrod_panel(f, mid, seg.b);
    stack.push_back({seg.a, mid, left.kronrod, left.error, seg.depth + 1});
    stack.push_back({mid, seg.b, right.kronrod, right.error, seg.depth + 1});
  }
  return total;
}

// Integrate f over [a, +inf) using x = a + scale * u / (1 - u), u in [0, 1).
// `scale` should be on the order of the integrand's decay length.
template <typename F>
double integrate_upper_tail(F&& f, double a, double scale, double tol = 1e-10) {
  auto g = [&](double u) {
    const double one_minus = 1.0 - u;
    if (one_minus <= 0.0) return 0.0;
    const double x = a + scale * u / one_minus;
    const double jacobian = scale / (one_minus * one_minus);
    const double v = f(x);
    return v * jacobian;
  };
  return integrate(g, 0.0, 1.0, tol);
}

}  // namespace incdist::quad
