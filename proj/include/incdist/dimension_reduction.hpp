#pragma once

// Reduction of per-year (alpha, beta, c) estimates to the constant-shift-
// scale family: phi as the ratio of shift to scale totals, psi from a
// symmetric two-block least squares on the design [1, year, alpha].

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "incdist/common.hpp"
#include "incdist/distributions.hpp"
#include "incdist/estimation.hpp"

namespace incdist {

struct year_params {
  double year;
  double alpha;
  double beta;
  double c;
};

using param_series = std::vector<year_params>;

struct normalized_series {
  std::vector<double> year;
  std::vector<double> alpha;  // alpha_t / sum_t alpha_t, and likewise below
  std::vector<double> beta;
  std::vector<double> c;
};

// Each parameter divided by its across-year sum, so co-movement of the
// series shows up as near-identical normalized paths.
inline normalized_series normalize_series(const param_series& series) {
  if (series.empty()) throw data_error("normalize_series: empty series");
  double sum_a = 0.0, sum_b = 0.0, sum_c = 0.0;
  for (const auto& r : series) {
    sum_a += r.alpha;
    sum_b += r.beta;
    sum_c += r.c;
  }
  if (sum_a == 0.0 || sum_b == 0.0 || sum_c == 0.0)
    throw data_error("normalize_series: a parameter column sums to zero");
  normalized_series out;
  for (const auto& r : series) {
    out.year.push_back(r.year);
    out.alpha.push_back(r.alpha / sum_a);
    out.beta.push_back(r.beta / sum_b);
    out.c.push_back(r.c / sum_c);
  }
  return out;
}

// phi = (sum_t c_t) / (sum_t beta_t): the proportionality constant between
// the shift and scale series.
inline double estimate_phi(const param_series& series) {
  if (series.empty()) throw data_error("estimate_phi: empty series");
  double sum_b = 0.0, sum_c = 0.0;
  for (const auto& r : series) {
    sum_b += r.beta;
    sum_c += r.c;
  }
  if (sum_b == 0.0)
    throw data_error("estimate_phi: scale series sums to zero");
  return sum_c / sum_b;
}

namespace detail {

// Least squares min ||A x - b|| via Householder QR; A is tall and skinny.
inline std::vector<double> qr_least_squares(
    std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t m = a.size();
  const std::size_t k = m == 0 ? 0 : a[0].size();
  if (m < k) throw data_error("least squares: fewer rows than columns");
  for (std::size_t j = 0; j < k; ++j) {
    double norm = 0.0;
    for (std::size_t i = j; i < m; ++i) norm = std::hypot(norm, a[i][j]);
    if (!(norm > 0.0)) throw data_error("least squares: singular design");
    const double head = (a[j][j] >= 0.0) ? -norm : norm;
    std::vector<double> v(m - j);
    v[0] = a[j][j] - head;
    for (std::size_t i = j + 1; i < m; ++i) v[i - j] = a[i][j];
    double v_sq = 0.0;
    for (const double t : v) v_sq += t * t;
    if (v_sq > 0.0) {
      for (std::size_t col = j; col < k; ++col) {
        double dot = 0.0;
        for (std::size_t i = j; i < m; ++i) dot += v[i - j] * a[i][col];
        const double f = 2.0 * dot / v_sq;
        for (std::size_t i = j; i < m; ++i) a[i][col] -= f * v[i - j];
      }
      double dot_b = 0.0;
      for (std::size_t i = j; i < m; ++i) dot_b += v[i - j] * b[i];
      const double f = 2.0 * dot_b / v_sq;
      for (std::size_t i = j; i < m; ++i) b[i] -= f * v[i - j];
    }
    a[j][j] = head;
  }
  double max_diag = 0.0;
  for (std::size_t j = 0; j < k; ++j)
    max_diag = std::max(max_diag, std::abs(a[j][j]));
  std::vector<double> x(k);
  for (std::size_t j = k; j-- > 0;) {
    if (std::abs(a[j][j]) <= 1e-12 * std::max(1.0, max_diag))
      throw data_error("least squares: singular design");
    double acc = b[j];
    for (std::size_t col = j + 1; col < k; ++col) acc -= a[j][col] * x[col];
    x[j] = acc / a[j][j];
  }
  return x;
}

}  // namespace detail

// psi = (psi0, psi1, psi2) minimizing ||C - A psi||^2 + ||phi B - A psi||^2
// with A = [1, year, alpha]; equivalently a least-squares fit of
// (C + phi B)/2 on A.  Centering the year column is available for
// conditioning; the returned psi is always in raw-year coordinates.
inline std::array<double, 3> estimate_psi(const param_series& series,
                                          double phi,
                                          bool center_years = false) {
  if (series.size() < 3)
    throw parameter_error("estimate_psi: at least three years required");
  const std::size_t m = series.size();
  double year_shift = 0.0;
  if (center_years) {
    for (const auto& r : series) year_shift += r.year;
    year_shift /= static_cast<double>(m);
  }
  std::vector<std::vector<double>> a(m, std::vector<double>(3));
  std::vector<double> b(m);
  for (std::size_t i = 0; i < m; ++i) {
    a[i][0] = 1.0;
    a[i][1] = series[i].year - year_shift;
    a[i][2] = series[i].alpha;
    b[i] = 0.5 * (series[i].c + phi * series[i].beta);
  }
  auto x = detail::qr_least_squares(std::move(a), std::move(b));
  if (center_years) x[0] -= x[1] * year_shift;
  return {x[0], x[1], x[2]};
}

struct regression_result {
  css_constants constants;
  std::vector<double> years;
  std::vector<double> c_residuals;      // c_t - c_hat_t
  std::vector<double> scale_residuals;  // phi beta_t - c_hat_t
  double objective = 0.0;               // two-block sum of squares at psi
};

inline regression_result estimate_constants(const param_series& series,
                                            bool center_years = false) {
  regression_result out;
  const double phi = estimate_phi(series);
  const auto psi = estimate_psi(series, phi, center_years);
  out.constants = css_constants{phi, psi[0], psi[1], psi[2]};
  for (const auto& r : series) {
    const double c_hat = psi[0] + psi[1] * r.year + psi[2] * r.alpha;
    const double rc = r.c - c_hat;
    const double rb = phi * r.beta - c_hat;
    out.years.push_back(r.year);
    out.c_residuals.push_back(rc);
    out.scale_residuals.push_back(rb);
    out.objective += rc * rc + rb * rb;
  }
  return out;
}

struct scale_shift_prediction {
  double beta;
  double c;
  bool feasible;  // beta > 0, so the implied density exists
};

// c_hat = psi0 + psi1 year + psi2 alpha and beta_hat = c_hat / phi.
// Infeasible (beta_hat <= 0) combinations are reported, never clamped.
inline scale_shift_prediction predict_scale_shift(const css_constants& k,
                                                  double year, double alpha) {
  if (k.phi == 0.0)
    throw parameter_error("predict_scale_shift: phi must be nonzero");
  const double c = k.psi0 + k.psi1 * year + k.psi2 * alpha;
  const double beta = c / k.phi;
  return {beta, c, beta > 0.0};
}

struct scale_change {
  double time_effect;   // (psi1/phi) * (t1 - t0), dollars
  double shape_effect;  // (psi2/phi) * (alpha1 - alpha0), dollars
};

inline scale_change decompose_scale_change(const css_constants& k, double t0,
                                           double alpha0, double t1,
                                           double alpha1) {
  if (k.phi == 0.0)
    throw parameter_error("decompose_scale_change: phi must be nonzero");
  return {(k.psi1 / k.phi) * (t1 - t0), (k.psi2 / k.phi) * (alpha1 - alpha0)};
}

struct proportional_variant {
  double phi;
  double psi0, psi1;  // c_t = alpha_t (psi0 + psi1 year)
};

// Footnote variant with the shift proportional to alpha: the same symmetric
// objective applied to c_t/alpha_t and phi beta_t/alpha_t on [1, year].
inline proportional_variant estimate_proportional_variant(
    const param_series& series) {
  if (series.size() < 2)
    throw parameter_error(
        "estimate_proportional_variant: at least two years required");
  const double phi = estimate_phi(series);
  const std::size_t m = series.size();
  std::vector<std::vector<double>> a(m, std::vector<double>(2));
  std::vector<double> b(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (series[i].alpha == 0.0)
      throw data_error("estimate_proportional_variant: zero alpha");
    a[i][0] = 1.0;
    a[i][1] = series[i].year;
    b[i] = 0.5 * (series[i].c + phi * series[i].beta) / series[i].alpha;
  }
  const auto x = detail::qr_least_squares(std::move(a), std::move(b));
  return {phi, x[0], x[1]};
}

// ---------------------------------------------------------------------------
// End-to-end pipeline over a panel of yearly samples
// ---------------------------------------------------------------------------

struct year_fit {
  double year;
  fitted_model three_param;  // shifted inverse-gamma fit
  fitted_model one_param;    // reduced fit with the learned constants
};

struct reduction_report {
  regression_result regression;
  param_series series;          // from the successful per-year fits
  std::vector<year_fit> fits;   // aligned with series
  std::vector<std::pair<double, std::string>> failed_years;
  bool center_years = false;
};

// Fit the three-parameter model per year, regress the series down to the
// reduced constants, then refit each year's single shape parameter under
// those constants.  Years whose fit fails are recorded and skipped; fewer
// than three surviving years aborts the pipeline.
inline reduction_report reduction_pipeline(
    const std::vector<double>& years,
    const std::vector<weighted_sample>& samples, const fit_options& opt = {},
    bool center_years = false) {
  if (years.size() != samples.size())
    throw parameter_error("reduction_pipeline: years/samples size mismatch");
  if (years.size() < 3)
    throw parameter_error("reduction_pipeline: at least three years required");
  reduction_report out;
  out.center_years = center_years;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < years.size(); ++i) {
    try {
      auto fm = fit(family_kind::shifted_inverse_gamma, samples[i], opt);
      const auto& d = std::get<inverse_gamma_dist>(fm.model);
      out.series.push_back({years[i], d.alpha, d.beta, d.c});
      year_fit yf;
      yf.year = years[i];
      yf.three_param = std::move(fm);
      out.fits.push_back(std::move(yf));
      kept.push_back(i);
    } catch (const std::exception& e) {
      out.failed_years.emplace_back(years[i], e.what());
    }
  }
  if (out.series.size() < 3)
    throw fit_error("reduction_pipeline: fewer than three years fitted");
  out.regression = estimate_constants(out.series, center_years);
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const std::size_t i = kept[j];
    out.fits[j].one_param =
        fit_css(samples[i], years[i], out.regression.constants, opt);
  }
  return out;
}

}  // namespace incdist
