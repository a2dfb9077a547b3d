#pragma once

// Derivative-free simplex minimization (Nelder-Mead) for the small
// likelihood problems that lack closed-form score equations.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "incdist/common.hpp"

namespace incdist {

struct simplex_result {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

struct simplex_options {
  double diameter_tol = 1e-8;  // relative simplex diameter at convergence
  int max_iterations = 2000;
};

// Minimize f starting from `start`; vertex i of the initial simplex offsets
// coordinate i by `steps[i]`.  Objective values that are not finite are
// treated as +inf, which lets callers encode infeasible regions.
template <typename F>
simplex_result nelder_mead(F&& f, std::vector<double> start,
                           const std::vector<double>& steps,
                           const simplex_options& opt = {}) {
  const std::size_t dim = start.size();
  auto safe = [&](const std::vector<double>& x) {
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<std::vector<double>> verts(dim + 1, start);
  for (std::size_t i = 0; i < dim; ++i) verts[i + 1][i] += steps[i];
  std::vector<double> vals(dim + 1);
  for (std::size_t i = 0; i <= dim; ++i) vals[i] = safe(verts[i]);

  auto order = [&] {
    std::vector<std::size_t> idx(dim + 1);
    for (std::size_t i = 0; i <= dim; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    std::vector<std::vector<double>> v2(dim + 1);
    std::vector<double> f2(dim + 1);
    for (std::size_t i = 0; i <= dim; ++i) {
      v2[i] = verts[idx[i]];
      f2[i] = vals[idx[i]];
    }
    verts.swap(v2);
    vals.swap(f2);
  };

  auto diameter = [&] {
    double d = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      double lo = verts[0][i], hi = verts[0][i];
      for (std::size_t k = 1; k <= dim; ++k) {
        lo = std::min(lo, verts[k][i]);
        hi = std::max(hi, verts[k][i]);
      }
      d = std::max(d, hi - lo);
      scale = std::max(scale, std::abs(verts[0][i]));
    }
    return d / (1.0 + scale);
  };

  simplex_result result;
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    order();
    if (diameter() < opt.diameter_tol) {
      result.converged = true;
      result.iterations = iter;
      break;
    }
    result.iterations = iter + 1;

    std::vector<double> centroid(dim, 0.0);
    for (std::size_t k = 0; k < dim; ++k)
      for (std::size_t i = 0; i < dim; ++i) centroid[i] += verts[k][i] / dim;

    auto blend = [&](double coef) {
      std::vector<double> p(dim);
      for (std::size_t i = 0; i < dim; ++i)
        p[i] = centroid[i] + coef * (centroid[i] - verts[dim][i]);
      return p;
    };

    auto reflected = blend(1.0);
    const double f_r = safe(reflected);
    if (f_r < vals[0]) {
      auto expanded = blend(2.0);
      const double f_e = safe(expanded);
      if (f_e < f_r) {
        verts[dim] = std::move(expanded);
        vals[dim] = f_e;
      } else {
        verts[dim] = std::move(reflected);
        vals[dim] = f_r;
      }
      continue;
    }
    if (f_r < vals[dim - 1]) {
      verts[dim] = std::move(reflected);
      vals[dim] = f_r;
      continue;
    }
    auto contracted = blend(f_r < vals[dim] ? 0.5 : -0.5);
    const double f_c = safe(contracted);
    if (f_c < std::min(f_r, vals[dim])) {
      verts[dim] = std::move(contracted);
      vals[dim] = f_c;
      continue;
    }
    // Shrink toward the best vertex.
    for (std::size_t k = 1; k <= dim; ++k) {
      for (std::size_t i = 0; i < dim; ++i)
        verts[k][i] = verts[0][i] + 0.5 * (verts[k][i] - verts[0][i]);
      vals[k] = safe(verts[k]);
    }
  }
  order();
  result.x = verts[0];
  result.value = vals[0];
  return result;
}

}  // namespace incdist
