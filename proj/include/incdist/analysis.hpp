#pragma once

// Inequality and dynamics analytics for the reduced family: the closed-form
// Gini coefficient and its singularity, empirical weighted Gini, per-capita
// income, percent-change rates, and the maximum-entropy moment checks.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "incdist/common.hpp"
#include "incdist/distributions.hpp"
#include "incdist/quadrature.hpp"
#include "incdist/roots.hpp"
#include "incdist/special_functions.hpp"
#include "incdist/weighted_data.hpp"

namespace incdist {

// Gini of the reduced model: G = Gamma(alpha - 1/2) / (sqrt(pi) Gamma(alpha))
// scaled by 1 / (1 + (alpha - 1) phi).  Diverges where the scaling
// denominator vanishes, at alpha = 1 - 1/phi.
inline double gini_css(double alpha, double phi) {
  if (!(alpha > 0.5))
    throw parameter_error("gini_css: alpha must exceed 1/2");
  const double denom = 1.0 + (alpha - 1.0) * phi;
  if (denom == 0.0)
    throw parameter_error("gini_css: alpha sits at the singularity 1 - 1/phi");
  const double ratio =
      std::exp(sf::log_gamma(alpha - 0.5) - sf::log_gamma(alpha));
  return ratio / (std::sqrt(sf::pi) * denom);
}

// Location of the Gini pole for a given phi.
inline double gini_singularity(double phi) {
  if (phi == 0.0)
    throw parameter_error("gini_singularity: phi must be nonzero");
  return 1.0 - 1.0 / phi;
}

struct gini_profile_row {
  double alpha;
  double gini;  // +/-inf exactly at the singular alpha
};

struct gini_profile {
  std::vector<gini_profile_row> rows;
  std::optional<double> singularity;       // 1 - 1/phi when phi != 0
  std::vector<double> stationary_points;   // interior extrema of the profile
};

namespace detail {

// Interior extrema of alpha -> gini_css(alpha, phi) over [lo, hi]: scan with
// the given step, then polish each bracketed extremum by golden section.
inline std::vector<double> gini_stationary_points(double phi, double lo,
                                                  double hi,
                                                  double step = 0.05) {
  std::vector<double> out;
  auto value = [&](double a) -> double {
    try {
      return gini_css(a, phi);
    } catch (const std::exception&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  // Slope scans that straddle the pole see a spurious extremum on each side;
  // keep only extrema a full step away from it.
  const double star = phi != 0.0 ? gini_singularity(phi)
                                 : std::numeric_limits<double>::quiet_NaN();
  auto near_pole = [&](double a) { return std::abs(a - star) < step; };
  double x0 = lo, x1 = lo + step;
  double f0 = value(x0), f1 = value(x1);
  for (double x2 = lo + 2.0 * step; x2 <= hi + 1e-12; x2 += step) {
    const double f2 = value(x2);
    if (std::isfinite(f0) && std::isfinite(f1) && std::isfinite(f2) &&
        !near_pole(x1)) {
      if (f1 < f0 && f1 < f2) {
        const auto m = roots::golden_section(value, x0, x2, 1e-10);
        out.push_back(m.x);
      } else if (f1 > f0 && f1 > f2) {
        const auto m = roots::golden_section(
            [&](double a) { return -value(a); }, x0, x2, 1e-10);
        out.push_back(m.x);
      }
    }
    x0 = x1; f0 = f1;
    x1 = x2; f1 = f2;
  }
  return out;
}

}  // namespace detail

// Profile of the closed-form Gini over an alpha grid at fixed phi.  Grid
// points at the singularity produce signed infinities rather than errors.
inline gini_profile gini_grid(double phi, double alpha_lo, double alpha_hi,
                              int points) {
  if (!(alpha_lo > 0.5) || !(alpha_hi > alpha_lo))
    throw parameter_error("gini_grid: need 0.5 < alpha_lo < alpha_hi");
  if (points < 2) throw parameter_error("gini_grid: at least two points");
  gini_profile out;
  if (phi != 0.0) out.singularity = gini_singularity(phi);
  for (int i = 0; i < points; ++i) {
    const double a =
        alpha_lo + (alpha_hi - alpha_lo) * i / (points - 1.0);
    double g;
    try {
      g = gini_css(a, phi);
    } catch (const std::exception&) {
      const double denom = 1.0 + (a - 1.0) * phi;
      g = std::copysign(std::numeric_limits<double>::infinity(),
                        denom == 0.0 ? 1.0 : denom);
    }
    out.rows.push_back({a, g});
  }
  out.stationary_points =
      detail::gini_stationary_points(phi, alpha_lo, alpha_hi);
  return out;
}

// Weighted empirical Gini: sum_{i,j} w_i w_j |x_i - x_j| / (2 n^2 mean).
// Computed from prefix sums over the sorted sample.  Negative incomes are
// allowed and can push the value above 1.
inline double gini_empirical(const weighted_sample& s) {
  if (s.size() == 0) throw data_error("gini_empirical: empty sample");
  const auto& x = s.incomes();
  const auto& w = s.weights();
  const double n = s.n();
  double sum_wx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum_wx += w[i] * x[i];
  const double mean = sum_wx / n;
  if (mean == 0.0) throw data_error("gini_empirical: zero mean income");
  double cum_w = 0.0, cum_wx = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += w[i] * (cum_w * x[i] - cum_wx);
    cum_w += w[i];
    cum_wx += w[i] * x[i];
  }
  return acc / (n * n * mean);
}

// Per-capita (mean) income of the reduced model:
// c_t (1/(phi (alpha - 1)) + 1); undefined for alpha <= 1.
inline std::optional<double> per_capita_css(const css_constants& k,
                                            double year, double alpha) {
  if (k.phi == 0.0)
    throw parameter_error("per_capita_css: phi must be nonzero");
  if (!(alpha > 1.0)) return std::nullopt;
  const double c = k.psi0 + k.psi1 * year + k.psi2 * alpha;
  return c * (1.0 / (k.phi * (alpha - 1.0)) + 1.0);
}

// Year-over-year increment of per-capita income at constant alpha:
// psi1 (1/(phi (alpha - 1)) + 1).
inline std::optional<double> per_capita_annual_increment(
    const css_constants& k, double alpha) {
  if (k.phi == 0.0)
    throw parameter_error("per_capita_annual_increment: phi must be nonzero");
  if (!(alpha > 1.0)) return std::nullopt;
  return k.psi1 * (1.0 / (k.phi * (alpha - 1.0)) + 1.0);
}

// Percent change of a given income level per year when the scale grows
// linearly: the displayed form treats the annual scale increment as psi1.
inline double percent_change_linear(double beta, double psi1) {
  if (!(beta > 0.0))
    throw parameter_error("percent_change_linear: beta must be positive");
  return psi1 / beta;
}

// Variant with the scale increment implied by the reduction, psi1/phi.
inline double percent_change_linear_corrected(double beta, double psi1,
                                              double phi) {
  if (!(beta > 0.0))
    throw parameter_error(
        "percent_change_linear_corrected: beta must be positive");
  if (phi == 0.0)
    throw parameter_error(
        "percent_change_linear_corrected: phi must be nonzero");
  return (psi1 / phi) / beta;
}

// Percent change per year under exponential scale growth: e^{psi1} - 1.
inline double percent_change_exponential(double psi1) {
  return std::expm1(psi1);
}

// ---------------------------------------------------------------------------
// Maximum-entropy moment constraints of the shifted inverse-gamma
// ---------------------------------------------------------------------------

// The first constraint is E log(X - c) = log(beta) - psi(alpha).  The second
// is stated as E[1/(X - c)] = beta/alpha in the source derivation, while the
// standard moment is alpha/beta; both residuals are reported so the
// discrepancy stays visible instead of being silently resolved.
struct maxent_report {
  double log_moment;               // measured E[log(X - c)]
  double inverse_moment;           // measured E[1/(X - c)]
  double log_moment_formula;       // log(beta) - digamma(alpha)
  double inverse_moment_stated;    // beta/alpha (as displayed)
  double inverse_moment_derived;   // alpha/beta (standard moment)
  double log_residual;             // measured - formula
  double inverse_residual_stated;  // measured - beta/alpha
  double inverse_residual_derived; // measured - alpha/beta
};

namespace detail {

inline maxent_report finish_maxent(const inverse_gamma_dist& d,
                                   double log_moment, double inverse_moment) {
  maxent_report r;
  r.log_moment = log_moment;
  r.inverse_moment = inverse_moment;
  r.log_moment_formula = std::log(d.beta) - sf::digamma(d.alpha);
  r.inverse_moment_stated = d.beta / d.alpha;
  r.inverse_moment_derived = d.alpha / d.beta;
  r.log_residual = log_moment - r.log_moment_formula;
  r.inverse_residual_stated = inverse_moment - r.inverse_moment_stated;
  r.inverse_residual_derived = inverse_moment - r.inverse_moment_derived;
  return r;
}

}  // namespace detail

// Moments by adaptive quadrature against the model density.
inline maxent_report maxent_check(const inverse_gamma_dist& d) {
  validate(d);
  auto moment = [&](auto&& h) {
    auto f = [&](double y) { return h(y) * pdf(d, d.c + y); };
    const double split = d.beta / (d.alpha + 1.0);  // density mode
    return quad::integrate(f, 0.0, split, 1e-11) +
           quad::integrate_upper_tail(f, split, d.beta, 1e-11);
  };
  const double log_m = moment([](double y) { return std::log(y); });
  const double inv_m = moment([](double y) { return 1.0 / y; });
  return detail::finish_maxent(d, log_m, inv_m);
}

// Moments from weighted data (for checking a fitted model against its
// sample); every income must exceed the shift.
inline maxent_report maxent_check(const inverse_gamma_dist& d,
                                  const weighted_sample& s) {
  validate(d);
  if (!(d.c < s.min_income()))
    throw parameter_error("maxent_check: shift not below the minimum income");
  const auto& x = s.incomes();
  const auto& w = s.weights();
  double log_m = 0.0, inv_m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double y = x[i] - d.c;
    log_m += w[i] * std::log(y);
    inv_m += w[i] / y;
  }
  log_m /= s.n();
  inv_m /= s.n();
  return detail::finish_maxent(d, log_m, inv_m);
}

}  // namespace incdist
