#pragma once

// Two-step estimation: conditional maximum likelihood for the non-shift
// parameters (inner step) and Kolmogorov-Smirnov minimization over the shift
// parameter c — plus k for the cutoff model, x_m for the mixture model, and a
// one-step KS minimization over alpha for the reduced model.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "incdist/common.hpp"
#include "incdist/distributions.hpp"
#include "incdist/nelder_mead.hpp"
#include "incdist/random.hpp"
#include "incdist/roots.hpp"
#include "incdist/special_functions.hpp"
#include "incdist/weighted_data.hpp"

namespace incdist {

// ---------------------------------------------------------------------------
// Families and options
// ---------------------------------------------------------------------------

enum class family_kind {
  shifted_inverse_gamma,
  css_inverse_gamma,
  shifted_davis,
  shifted_gb2,
  shifted_dagum,
  shifted_burr,
  shifted_fisk,
  lognormal_pareto_cutoff,
  lognormal_pareto_mixture,
};

inline const char* to_string(family_kind f) {
  switch (f) {
    case family_kind::shifted_inverse_gamma: return "inverse-gamma";
    case family_kind::css_inverse_gamma: return "css";
    case family_kind::shifted_davis: return "davis";
    case family_kind::shifted_gb2: return "gb2";
    case family_kind::shifted_dagum: return "dagum";
    case family_kind::shifted_burr: return "burr";
    case family_kind::shifted_fisk: return "fisk";
    case family_kind::lognormal_pareto_cutoff: return "cutoff";
    case family_kind::lognormal_pareto_mixture: return "mixture";
  }
  return "?";
}

// Accepts both the short CLI aliases and the long serialized tags.
inline std::optional<family_kind> family_from_string(const std::string& name) {
  if (name == "inverse-gamma" || name == "shifted_inverse_gamma")
    return family_kind::shifted_inverse_gamma;
  if (name == "css" || name == "css_inverse_gamma")
    return family_kind::css_inverse_gamma;
  if (name == "davis" || name == "shifted_davis")
    return family_kind::shifted_davis;
  if (name == "gb2" || name == "shifted_gb2") return family_kind::shifted_gb2;
  if (name == "dagum" || name == "shifted_dagum")
    return family_kind::shifted_dagum;
  if (name == "burr" || name == "shifted_burr")
    return family_kind::shifted_burr;
  if (name == "fisk" || name == "shifted_fisk")
    return family_kind::shifted_fisk;
  if (name == "cutoff" || name == "lognormal_pareto_cutoff")
    return family_kind::lognormal_pareto_cutoff;
  if (name == "mixture" || name == "lognormal_pareto_mixture")
    return family_kind::lognormal_pareto_mixture;
  return std::nullopt;
}

inline const std::vector<family_kind>& all_families() {
  static const std::vector<family_kind> fams = {
      family_kind::shifted_inverse_gamma, family_kind::css_inverse_gamma,
      family_kind::shifted_davis,         family_kind::shifted_gb2,
      family_kind::shifted_dagum,         family_kind::shifted_burr,
      family_kind::shifted_fisk,          family_kind::lognormal_pareto_cutoff,
      family_kind::lognormal_pareto_mixture};
  return fams;
}

struct fit_options {
  // Outer search bracket for c.  Empty: [min - 5*(median - min), min - 1].
  std::optional<std::pair<double, double>> c_bracket;
  double tolerance_c = 1.0;       // absolute, dollars (c and k searches)
  double tolerance_inner = 1e-8;  // relative (scalar solves, simplex diameter)
  int max_iterations = 2000;      // scalar-solver and simplex iteration caps

  // Coarse scan of the shift bracket before golden-section polishing (the
  // KS objective over c need not be unimodal).
  int c_scan_points = 24;

  // Brute-force grids (GB2: c only; mixture: c and x_m).
  int c_grid_points = 200;
  int xm_grid_points = 50;
  std::pair<double, double> xm_quantiles = {0.5, 0.999};

  // Cutoff switch-point search bracket as weighted quantiles of income, and
  // the scan resolution inside it.
  std::pair<double, double> k_quantiles = {0.5, 0.999};
  int k_scan_points = 12;

  // Nelder-Mead: initial simplex offsets each log-parameter by
  // log(1 + initial_simplex_scale); standard reflect/expand/contract/shrink
  // coefficients (1, 2, 0.5, 0.5).
  double initial_simplex_scale = 0.10;

  // Context for the one-parameter reduced family (used by fit/bootstrap
  // dispatch when the family is css_inverse_gamma).
  double css_year = 0.0;
  css_constants css = reference_css_constants();
  std::pair<double, double> css_alpha_bracket = {0.55, 64.0};
};

struct fit_diagnostics {
  int outer_evaluations = 0;  // KS objective evaluations in the outer search
  int inner_failures = 0;     // candidate points skipped due to inner errors
  bool converged = true;
};

struct fitted_model {
  distribution model;
  double ks_stat = 0.0;
  double log_likelihood = 0.0;
  std::string dataset_label;
  fit_diagnostics diagnostics;
};

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov statistic
// ---------------------------------------------------------------------------

namespace detail {

// KS given model CDF values aligned with the sorted incomes.  The empirical
// CDF is compared at both its left and right limits at every data point.
inline double ks_from_cdf_values(const weighted_sample& s,
                                 const std::vector<double>& model_cdf) {
  const auto& x = s.incomes();
  const auto& cum = s.cumulative_weights();
  const double n = s.n();
  double worst = 0.0;
  std::size_t i = 0;
  while (i < x.size()) {
    std::size_t j = i;
    while (j + 1 < x.size() && x[j + 1] == x[i]) ++j;
    const double f_model = model_cdf[i];
    const double f_right = cum[j] / n;
    const double f_left = (i == 0) ? 0.0 : cum[i - 1] / n;
    worst = std::max({worst, std::abs(f_right - f_model),
                      std::abs(f_left - f_model)});
    i = j + 1;
  }
  return worst;
}

}  // namespace detail

// KS statistic of an arbitrary model CDF against the weighted ECDF.
template <typename Cdf>
  requires std::is_invocable_r_v<double, Cdf, double>
double ks_statistic(const weighted_sample& s, Cdf&& model_cdf) {
  const auto& x = s.incomes();
  std::vector<double> values(x.size());
  std::size_t i = 0;
  while (i < x.size()) {
    std::size_t j = i;
    while (j + 1 < x.size() && x[j + 1] == x[i]) ++j;
    const double f = model_cdf(x[i]);
    for (std::size_t t = i; t <= j; ++t) values[t] = f;
    i = j + 1;
  }
  return detail::ks_from_cdf_values(s, values);
}

// Model CDF over the sorted sample points; the Davis family is integrated
// cumulatively once instead of per point.
inline std::vector<double> model_cdf_values(const distribution& d,
                                            const weighted_sample& s) {
  if (const auto* davis = std::get_if<davis_dist>(&d))
    return cdf_batch(*davis, s.incomes());
  const auto& x = s.incomes();
  std::vector<double> values(x.size());
  std::size_t i = 0;
  while (i < x.size()) {
    std::size_t j = i;
    while (j + 1 < x.size() && x[j + 1] == x[i]) ++j;
    const double f = cdf(d, x[i]);
    for (std::size_t t = i; t <= j; ++t) values[t] = f;
    i = j + 1;
  }
  return values;
}

inline double ks_statistic(const weighted_sample& s, const distribution& d) {
  return detail::ks_from_cdf_values(s, model_cdf_values(d, s));
}

// Weighted log-likelihood of a model on a sample.
inline double weighted_log_likelihood(const distribution& d,
                                      const weighted_sample& s) {
  double ll = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    ll += s.weights()[i] * log_pdf(d, s.incomes()[i]);
  return ll;
}

// ---------------------------------------------------------------------------
// Per-candidate-c cached statistics
// ---------------------------------------------------------------------------

namespace detail {

struct shift_cache {
  double c = 0.0;
  const weighted_sample* sample = nullptr;
  std::vector<double> y;      // x_i - c, ascending
  std::vector<double> log_y;  // log(x_i - c)
  double mean_log = 0.0;      // (1/n) sum w log y
  double mean_log_sq = 0.0;   // (1/n) sum w (log y)^2
  double mean_inv = 0.0;      // (1/n) sum w / y
  // Inclusive prefix sums of w*log(y) and w*log(y)^2 (threshold families).
  std::vector<double> cum_w_log;
  std::vector<double> cum_w_log_sq;

  double n() const { return sample->n(); }
  const std::vector<double>& w() const { return sample->weights(); }
};

inline shift_cache make_shift_cache(const weighted_sample& s, double c,
                                    bool with_prefix_sums = false) {
  if (!(c < s.min_income()))
    throw parameter_error("shift must lie strictly below the minimum income");
  shift_cache cache;
  cache.c = c;
  cache.sample = &s;
  const std::size_t m = s.size();
  cache.y.resize(m);
  cache.log_y.resize(m);
  const auto& inc = s.incomes();
  const auto& w = s.weights();
  double sum_log = 0.0, sum_log_sq = 0.0, sum_inv = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double yi = inc[i] - c;
    const double li = std::log(yi);
    cache.y[i] = yi;
    cache.log_y[i] = li;
    sum_log += w[i] * li;
    sum_log_sq += w[i] * li * li;
    sum_inv += w[i] / yi;
  }
  const double n = s.n();
  cache.mean_log = sum_log / n;
  cache.mean_log_sq = sum_log_sq / n;
  cache.mean_inv = sum_inv / n;
  if (with_prefix_sums) {
    cache.cum_w_log.resize(m);
    cache.cum_w_log_sq.resize(m);
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double li = cache.log_y[i];
      a += w[i] * li;
      b += w[i] * li * li;
      cache.cum_w_log[i] = a;
      cache.cum_w_log_sq[i] = b;
    }
  }
  return cache;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Conditional MLE: shifted inverse-gamma
// ---------------------------------------------------------------------------

struct invgamma_estimate {
  double alpha, beta;
};

namespace detail {

inline invgamma_estimate mle_invgamma_cached(const shift_cache& cache,
                                             double rel_tol) {
  // alpha solves log(alpha) - psi(alpha) = R with
  // R = log((1/n) sum w/y) + (1/n) sum w log y  (>= 0 by Jensen).
  const double r = std::log(cache.mean_inv) + cache.mean_log;
  if (!(r > 0.0))
    throw convergence_error(
        "inverse-gamma conditional MLE: degenerate sample (zero dispersion)");
  auto g = [&](double a) { return std::log(a) - sf::digamma(a) - r; };
  // Standard closed-form starting value for gamma-type shape equations.
  double a0 = (3.0 - r + std::sqrt((r - 3.0) * (r - 3.0) + 24.0 * r)) /
              (12.0 * r);
  if (!(a0 > 0.0) || !std::isfinite(a0)) a0 = 1.0;
  double lo = a0, hi = a0;
  double f_lo = g(lo), f_hi = f_lo;
  for (int i = 0; i < 200 && f_lo < 0.0; ++i) {  // g decreasing: widen down
    lo *= 0.5;
    f_lo = g(lo);
  }
  for (int i = 0; i < 200 && f_hi > 0.0; ++i) {
    hi *= 2.0;
    f_hi = g(hi);
  }
  if (f_lo < 0.0 || f_hi > 0.0)
    throw convergence_error("inverse-gamma conditional MLE: no bracket");
  const double alpha = roots::brent(g, lo, hi, f_lo, f_hi, rel_tol);
  return {alpha, alpha / cache.mean_inv};
}

}  // namespace detail

inline invgamma_estimate mle_invgamma_conditional(const weighted_sample& s,
                                                  double c) {
  return detail::mle_invgamma_cached(detail::make_shift_cache(s, c), 1e-12);
}

// ---------------------------------------------------------------------------
// Conditional MLE: shifted Davis
// ---------------------------------------------------------------------------

struct davis_estimate {
  double alpha, beta;
};

namespace detail {

inline constexpr double davis_alpha_min = 1.0 + 1e-6;
inline constexpr double davis_alpha_max = 60.0;

// h(alpha) = psi(alpha) + zeta'(alpha)/zeta(alpha), strictly increasing.
inline double davis_h(double alpha) {
  const auto z = sf::detail::zeta_with_derivative(alpha);
  return sf::digamma(alpha) + z.derivative / z.value;
}

// Solve h(alpha) = target on the admissible alpha interval.
inline std::optional<double> davis_alpha_for(double target) {
  double lo = davis_alpha_min, hi = davis_alpha_max;
  if (target >= davis_h(hi)) return std::nullopt;  // would exceed the cap
  if (target <= davis_h(lo)) return lo;
  auto f = [&](double a) { return davis_h(a) - target; };
  return roots::brent(f, lo, hi, f(lo), f(hi), 1e-13);
}

inline davis_estimate mle_davis_cached(const shift_cache& cache) {
  const auto& w = cache.w();
  const double n = cache.n();
  // First score equation pins alpha given beta; the second is solved for
  // beta by bracketing + Brent.
  auto alpha_of_beta = [&](double beta) {
    return davis_alpha_for(std::log(beta) - cache.mean_log);
  };
  auto outer = [&](double beta) -> double {
    const auto alpha = alpha_of_beta(beta);
    if (!alpha) return std::numeric_limits<double>::quiet_NaN();
    double acc = 0.0;
    for (std::size_t i = 0; i < cache.y.size(); ++i) {
      const double t = beta / cache.y[i];
      // 1/(1 - e^{-t}) computed stably for both tiny and huge t.
      acc += w[i] / cache.y[i] / (-std::expm1(-t));
    }
    return acc / n - *alpha / beta;
  };
  // Geometric scan around the data's log scale for a sign change.
  const double beta_center = std::exp(cache.mean_log);
  double prev_b = 0.0, prev_f = 0.0;
  bool have_prev = false, bracketed = false;
  double lo = 0.0, hi = 0.0, f_lo = 0.0, f_hi = 0.0;
  for (int j = -18; j <= 18; ++j) {
    const double b = beta_center * std::pow(2.0, j);
    const double fb = outer(b);
    if (!std::isfinite(fb)) {
      have_prev = false;
      continue;
    }
    if (have_prev && std::signbit(fb) != std::signbit(prev_f)) {
      lo = prev_b;
      hi = b;
      f_lo = prev_f;
      f_hi = fb;
      bracketed = true;
      break;
    }
    prev_b = b;
    prev_f = fb;
    have_prev = true;
  }
  if (!bracketed)
    throw convergence_error("davis conditional MLE: beta not bracketed");
  const double beta = roots::brent(outer, lo, hi, f_lo, f_hi, 1e-13);
  const auto alpha = alpha_of_beta(beta);
  if (!alpha) throw convergence_error("davis conditional MLE: alpha domain");
  return {*alpha, beta};
}

}  // namespace detail

inline davis_estimate mle_davis_conditional(const weighted_sample& s,
                                            double c) {
  return detail::mle_davis_cached(detail::make_shift_cache(s, c));
}

// ---------------------------------------------------------------------------
// Conditional MLE: Nelder-Mead families (Fisk, Dagum, Burr) and GB2
// ---------------------------------------------------------------------------

namespace detail {

// Method-of-moments starting values on the shifted log data.
struct fisk_moments {
  double alpha, beta;
};

inline fisk_moments fisk_moment_guess(const shift_cache& cache) {
  const double m = cache.mean_log;
  double v = cache.mean_log_sq - m * m;
  if (!(v > 1e-12)) v = 1e-12;  // near-degenerate log spread
  return {sf::pi / std::sqrt(3.0 * v), std::exp(m)};
}

// (1/n) sum w log(1 + (y/beta)^alpha), the shared Nelder-Mead workhorse.
inline double mean_softplus(const shift_cache& cache, double alpha,
                            double log_beta) {
  const auto& w = cache.w();
  double acc = 0.0;
  for (std::size_t i = 0; i < cache.log_y.size(); ++i)
    acc += w[i] * sf::log1pexp(alpha * (cache.log_y[i] - log_beta));
  return acc / cache.n();
}

// Per-observation average log-likelihood for the GB2 family (Fisk, Dagum and
// Burr are the q=1 / p=1 / p=q=1 specializations).
inline double gb2_mean_ll(const shift_cache& cache, double alpha,
                          double log_beta, double p, double q) {
  const double msp = mean_softplus(cache, alpha, log_beta);
  return std::log(alpha) + (alpha * p - 1.0) * cache.mean_log -
         alpha * p * log_beta - sf::log_beta(p, q) - (p + q) * msp;
}

struct nm_fit {
  std::vector<double> x;  // optimum in log-parameter space
  double mean_ll;
  bool converged;
  int iterations;
};

inline nm_fit maximize_family_ll(const shift_cache& cache, family_kind fam,
                                 const fit_options& opt) {
  const auto guess = fisk_moment_guess(cache);
  std::vector<double> start{std::log(guess.alpha), std::log(guess.beta)};
  if (fam == family_kind::shifted_dagum || fam == family_kind::shifted_burr)
    start.push_back(0.0);  // p or q starts at 1
  auto objective = [&](const std::vector<double>& v) {
    const double alpha = std::exp(v[0]);
    const double log_beta = v[1];
    double p = 1.0, q = 1.0;
    if (fam == family_kind::shifted_dagum) p = std::exp(v[2]);
    if (fam == family_kind::shifted_burr) q = std::exp(v[2]);
    if (!std::isfinite(alpha) || !std::isfinite(p) || !std::isfinite(q))
      return std::numeric_limits<double>::infinity();
    return -gb2_mean_ll(cache, alpha, log_beta, p, q);
  };
  simplex_options nm_opt;
  nm_opt.diameter_tol = std::max(opt.tolerance_inner, 1e-10);
  nm_opt.max_iterations = opt.max_iterations;
  const std::vector<double> steps(start.size(),
                                  std::log1p(opt.initial_simplex_scale));
  auto res = nelder_mead(objective, start, steps, nm_opt);
  return {res.x, -res.value, res.converged, res.iterations};
}

}  // namespace detail

// Direct likelihood maximization for the families without usable score
// equations.  Returns the fitted distribution at the given shift.
inline distribution mle_nelder_mead(family_kind fam, const weighted_sample& s,
                                    double c, const fit_options& opt = {}) {
  if (fam != family_kind::shifted_fisk && fam != family_kind::shifted_dagum &&
      fam != family_kind::shifted_burr)
    throw parameter_error("mle_nelder_mead: family must be Fisk, Dagum or Burr");
  const auto cache = detail::make_shift_cache(s, c);
  const auto res = detail::maximize_family_ll(cache, fam, opt);
  if (!res.converged)
    throw convergence_error(
        std::string("nelder-mead iteration cap reached for ") +
        to_string(fam) + " (best mean log-likelihood " +
        std::to_string(res.mean_ll) + ")");
  const double alpha = std::exp(res.x[0]);
  const double beta = std::exp(res.x[1]);
  if (fam == family_kind::shifted_fisk) return fisk_dist{alpha, beta, c};
  if (fam == family_kind::shifted_dagum)
    return dagum_dist{alpha, beta, std::exp(res.x[2]), c};
  return burr_dist{alpha, beta, std::exp(res.x[2]), c};
}

struct gb2_estimate {
  double alpha, beta, p, q;
  double mean_log_likelihood;
  int inner_failures;  // (p,q) subproblems with no admissible solution
  bool converged;
};

namespace detail {

struct gb2_inner_result {
  double p, q, mean_ll;
};

// Solve the two digamma conditions for (p, q) given (alpha, beta): with
// s = p + q, both p and q follow from inverting psi, and s is pinned by
// requiring their sum to equal s.
inline std::optional<gb2_inner_result> gb2_inner(const shift_cache& cache,
                                                 double alpha, double log_beta,
                                                 double rel_tol) {
  const double r2 = mean_softplus(cache, alpha, log_beta);
  const double r1 = r2 - alpha * (cache.mean_log - log_beta);
  if (!(r1 > 0.0) || !(r2 > 0.0)) return std::nullopt;
  // A root of F exists iff e^{-r1} + e^{-r2} < 1.
  if (std::exp(-r1) + std::exp(-r2) >= 1.0 - 1e-12) return std::nullopt;
  auto f = [&](double sv) {
    const double ps = sf::digamma(sv);
    return sf::digamma_inverse(ps - r1) + sf::digamma_inverse(ps - r2) - sv;
  };
  const auto br = roots::find_sign_change(f, 1e-5, 1e6, 80, true);
  if (!br) return std::nullopt;
  const double sv = roots::brent(f, *br, rel_tol);
  const double p = sf::digamma_inverse(sf::digamma(sv) - r1);
  const double q = sf::digamma_inverse(sf::digamma(sv) - r2);
  const double mean_ll = std::log(alpha) + (alpha * p - 1.0) * cache.mean_log -
                         alpha * p * log_beta - sf::log_beta(p, q) -
                         (p + q) * r2;
  return gb2_inner_result{p, q, mean_ll};
}

inline gb2_estimate mle_gb2_cached(const shift_cache& cache,
                                   const fit_options& opt) {
  int failures = 0;
  auto objective = [&](const std::vector<double>& v) {
    const double alpha = std::exp(v[0]);
    if (!std::isfinite(alpha))
      return std::numeric_limits<double>::infinity();
    const auto inner = gb2_inner(cache, alpha, v[1], 1e-11);
    if (!inner) {
      ++failures;
      return std::numeric_limits<double>::infinity();
    }
    return -inner->mean_ll;
  };
  const auto guess = fisk_moment_guess(cache);
  std::vector<double> start{std::log(guess.alpha), std::log(guess.beta)};
  simplex_options nm_opt;
  nm_opt.diameter_tol = std::max(opt.tolerance_inner, 1e-10);
  nm_opt.max_iterations = opt.max_iterations;
  const std::vector<double> steps(2, std::log1p(opt.initial_simplex_scale));
  auto res = nelder_mead(objective, start, steps, nm_opt);
  const double alpha = std::exp(res.x[0]);
  const auto inner = gb2_inner(cache, alpha, res.x[1], 1e-12);
  if (!inner)
    throw convergence_error("gb2 conditional MLE: inner solve diverged");
  return {alpha,           std::exp(res.x[1]), inner->p, inner->q,
          inner->mean_ll, failures,            res.converged};
}

}  // namespace detail

inline gb2_estimate mle_gb2_conditional(const weighted_sample& s, double c,
                                        const fit_options& opt = {}) {
  const auto cache = detail::make_shift_cache(s, c);
  auto est = detail::mle_gb2_cached(cache, opt);
  if (!est.converged)
    throw convergence_error("gb2 conditional MLE: iteration cap reached");
  return est;
}

// ---------------------------------------------------------------------------
// Conditional MLE: log-normal + Pareto cutoff
// ---------------------------------------------------------------------------

struct cutoff_estimate {
  double mu, sigma_sq, alpha, x_m;
};

namespace detail {

// Mills-ratio style hazard Phi'(z) / (1 - Phi(z)), stable for large z.
inline double normal_hazard(double z) {
  if (z > 34.0) return z + 1.0 / z;  // asymptotic expansion suffices here
  const double pdf = std::exp(-0.5 * z * z) / sf::sqrt_two_pi;
  const double upper = 0.5 * std::erfc(z / sf::sqrt_two);
  return pdf / upper;
}

inline cutoff_estimate mle_cutoff_cached(const shift_cache& cache, double k) {
  const double kappa = k - cache.c;
  if (!(kappa > 0.0))
    throw parameter_error("cutoff conditional MLE: k must exceed c");
  const double t_log = std::log(kappa);
  const auto& y = cache.y;
  // Split index: incomes at or above k count as the tail.
  const std::size_t j = static_cast<std::size_t>(
      std::lower_bound(y.begin(), y.end(), kappa) - y.begin());
  const auto& cum = cache.sample->cumulative_weights();
  const double n = cache.n();
  const double n_dn = (j == 0) ? 0.0 : cum[j - 1];
  const double n_up = n - n_dn;
  if (!(n_dn > 0.0) || !(n_up > 0.0))
    throw fit_error("cutoff conditional MLE: no weight on one side of k");

  const double sum_log_dn = (j == 0) ? 0.0 : cache.cum_w_log[j - 1];
  const double sum_log_sq_dn = (j == 0) ? 0.0 : cache.cum_w_log_sq[j - 1];
  const double sum_log_up = cache.cum_w_log.back() - sum_log_dn;

  const double tail_spread = sum_log_up - n_up * t_log;  // sum w log(y/kappa)
  if (!(tail_spread > 0.0))
    throw fit_error("cutoff conditional MLE: degenerate upper tail");
  const double alpha = n_up / tail_spread;

  const double mean1 = sum_log_dn / n_dn;
  const double mean2 = sum_log_sq_dn / n_dn;
  const double p0 = mean2 - t_log * mean1;
  const double p1 = t_log - mean1;

  auto score = [&](double mu) {
    const double var = p0 + p1 * mu;
    if (!(var > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double sigma = std::sqrt(var);
    const double z = (t_log - mu) / sigma;
    return n_dn * (mean1 - mu) + n_up * sigma * normal_hazard(z);
  };

  // Bracket within the sigma^2 > 0 region.  The score is positive at the
  // feasibility edge on the p1 > 0 side and tends to -inf as mu grows (and
  // symmetrically for p1 < 0), so a sign change always exists.
  const double spread = std::sqrt(std::max(mean2 - mean1 * mean1, 0.0)) +
                        std::abs(t_log - mean1) + 1e-6;
  double lo, hi;
  if (p1 > 0.0) {
    const double edge = -p0 / p1;
    lo = edge + 1e-10 * (std::abs(edge) + spread);
    hi = std::max(t_log, mean1) + 4.0 * spread;
    for (int i = 0; i < 200 && !(score(hi) < 0.0); ++i)
      hi += 4.0 * spread;
  } else if (p1 < 0.0) {
    const double edge = -p0 / p1;
    hi = edge - 1e-10 * (std::abs(edge) + spread);
    lo = std::min(t_log, mean1) - 4.0 * spread;
    for (int i = 0; i < 200 && !(score(lo) > 0.0); ++i)
      lo -= 4.0 * spread;
  } else {
    if (!(p0 > 0.0))
      throw fit_error("cutoff conditional MLE: sigma^2 not positive");
    lo = mean1 - 4.0 * spread;
    hi = mean1 + 4.0 * spread;
    for (int i = 0; i < 200 && !(score(lo) > 0.0); ++i) lo -= 4.0 * spread;
    for (int i = 0; i < 200 && !(score(hi) < 0.0); ++i) hi += 4.0 * spread;
  }
  const double f_lo = score(lo), f_hi = score(hi);
  if (!std::isfinite(f_lo) || !std::isfinite(f_hi) ||
      std::signbit(f_lo) == std::signbit(f_hi))
    throw convergence_error("cutoff conditional MLE: mu not bracketed");
  const double mu = roots::brent(score, lo, hi, f_lo, f_hi, 1e-15);
  const double sigma_sq = p0 + p1 * mu;
  if (!(sigma_sq > 0.0))
    throw fit_error("cutoff conditional MLE: sigma^2 not positive");
  const double sigma = std::sqrt(sigma_sq);
  const double upper = 0.5 * std::erfc((t_log - mu) / sigma / sf::sqrt_two);
  const double x_m = kappa * std::pow(upper, 1.0 / alpha);
  return {mu, sigma_sq, alpha, x_m};
}

}  // namespace detail

inline cutoff_estimate mle_cutoff_conditional(const weighted_sample& s,
                                              double c, double k) {
  if (!(k > s.min_income() && k < s.max_income()))
    throw parameter_error(
        "cutoff conditional MLE: k must lie strictly inside the data range");
  return detail::mle_cutoff_cached(detail::make_shift_cache(s, c, true), k);
}

// ---------------------------------------------------------------------------
// Conditional MLE: log-normal + Pareto mixture (three-step, iterated)
// ---------------------------------------------------------------------------

struct mixture_estimate {
  double mu, sigma_sq, alpha, lambda;
  int iterations;
};

namespace detail {

// One pass of the three steps at a fixed mixing weight: (mu, sigma) from the
// truncation-constrained body likelihood, alpha from the tail likelihood,
// and the updated weight from the mixing-score root.
struct mixture_step_result {
  double mu, sigma_sq, alpha;
  double lambda_new;
};

class mixture_stepper {
 public:
  mixture_stepper(const shift_cache& cache, double x_m)
      : cache_(cache), x_m_(x_m), t_log_(std::log(x_m)) {
    const auto& y = cache.y;
    j_ = static_cast<std::size_t>(
        std::lower_bound(y.begin(), y.end(), x_m) - y.begin());
    const auto& cum = cache.sample->cumulative_weights();
    const double n = cache.n();
    n_dn_ = (j_ == 0) ? 0.0 : cum[j_ - 1];
    n_up_ = n - n_dn_;
    if (!(n_dn_ > 0.0) || !(n_up_ > 0.0))
      throw fit_error("mixture conditional MLE: threshold outside data range");
    eta_ = n_dn_ / n;
    m1_ = cache.cum_w_log[j_ - 1] / n_dn_;
    m2_ = cache.cum_w_log_sq[j_ - 1] / n_dn_;
    m_up_ = y.size() - j_;
    log_f_ln_.resize(m_up_);
  }

  double eta() const { return eta_; }
  int evaluations() const { return evals_; }

  mixture_step_result step(double lambda) {
    ++evals_;
    if (!(lambda > eta_ && lambda < 1.0))
      throw fit_error("mixture conditional MLE: mixing weight must lie in "
                      "(below-threshold share, 1)");
    const auto& logy = cache_.log_y;
    const auto& w = cache_.w();

    // Step 1: body parameters under the mass constraint
    // lambda * Phi((t_log - mu)/sigma) = eta.
    const double qv = sf::normal_cdf_inverse(eta_ / lambda);
    double mu, sigma;
    if (std::abs(qv) < 1e-8) {
      mu = t_log_;
      const double var = m2_ - 2.0 * t_log_ * m1_ + t_log_ * t_log_;
      if (!(var > 0.0))
        throw fit_error("mixture conditional MLE: degenerate body variance");
      sigma = std::sqrt(var);
    } else {
      const double qb = qv * qv * (m1_ - t_log_) - 2.0 * t_log_;
      const double qc = qv * qv * (t_log_ * m1_ - m2_) + t_log_ * t_log_;
      const double disc = qb * qb - 4.0 * qc;
      if (!(disc >= 0.0))
        throw fit_error("mixture conditional MLE: no real root for mu");
      const double sq = std::sqrt(disc);
      double best_mu = 0.0;
      double best_obj = -std::numeric_limits<double>::infinity();
      bool found = false;
      for (const double cand : {0.5 * (-qb - sq), 0.5 * (-qb + sq)}) {
        const double sig = (t_log_ - cand) / qv;
        if (!(sig > 0.0)) continue;
        // Body log-likelihood up to terms common to both roots.
        const double obj = -n_dn_ * std::log(sig) -
                           n_dn_ * (m2_ - 2.0 * cand * m1_ + cand * cand) /
                               (2.0 * sig * sig);
        if (!found || obj > best_obj) {
          best_mu = cand;
          best_obj = obj;
          found = true;
        }
      }
      if (!found)
        throw fit_error("mixture conditional MLE: no admissible mu root");
      mu = best_mu;
      sigma = (t_log_ - mu) / qv;
    }

    // Step 2: tail index by scalar likelihood maximization.
    for (std::size_t i = 0; i < m_up_; ++i) {
      const double z = (logy[j_ + i] - mu) / sigma;
      log_f_ln_[i] = -0.5 * z * z - logy[j_ + i] - std::log(sigma) -
                     std::log(sf::sqrt_two_pi);
    }
    const double log_lam = std::log(lambda);
    const double log_one_minus = std::log1p(-lambda);
    auto neg_tail_ll = [&](double log_alpha) {
      const double a = std::exp(log_alpha);
      double acc = 0.0;
      for (std::size_t i = 0; i < m_up_; ++i) {
        const double lp = std::log(a) + a * t_log_ - (a + 1.0) * logy[j_ + i];
        const double hi_t = std::max(log_lam + log_f_ln_[i],
                                     log_one_minus + lp);
        const double lo_t = std::min(log_lam + log_f_ln_[i],
                                     log_one_minus + lp);
        acc += w[j_ + i] * (hi_t + sf::log1pexp(lo_t - hi_t));
      }
      return -acc;
    };
    double a_lo = std::log(0.05), a_hi = std::log(60.0);
    if (prev_log_alpha_ > -1e300) {  // warm window around the last optimum
      a_lo = std::max(a_lo, prev_log_alpha_ - 1.1);
      a_hi = std::min(a_hi, prev_log_alpha_ + 1.1);
    }
    const auto amin = roots::golden_section(neg_tail_ll, a_lo, a_hi, 1e-8);
    prev_log_alpha_ = amin.x;
    const double alpha = std::exp(amin.x);

    // Step 3: mixing-weight odds from the score-equation root.
    auto gamma_score = [&](double g) {
      double acc = n_dn_ / g;
      for (std::size_t i = 0; i < m_up_; ++i) {
        const double log_l = std::log(alpha) + alpha * t_log_ -
                             (alpha + 1.0) * logy[j_ + i] - log_f_ln_[i];
        const double l = std::exp(std::min(log_l, 700.0));
        acc += w[j_ + i] * (1.0 - l) / (g + l);
      }
      return acc;
    };
    std::optional<roots::bracket> br;
    if (prev_gamma_ > 0.0)
      br = roots::find_sign_change(gamma_score, prev_gamma_ / 16.0,
                                   prev_gamma_ * 16.0, 16, true);
    if (!br) br = roots::find_sign_change(gamma_score, 1e-9, 1e9, 72, true);
    if (!br)
      throw convergence_error(
          "mixture conditional MLE: mixing-odds root not bracketed");
    const double gamma_odds = roots::brent(gamma_score, *br, 1e-12);
    prev_gamma_ = gamma_odds;
    return {mu, sigma * sigma, alpha, gamma_odds / (1.0 + gamma_odds)};
  }

 private:
  const shift_cache& cache_;
  double x_m_, t_log_;
  std::size_t j_ = 0, m_up_ = 0;
  double n_dn_ = 0.0, n_up_ = 0.0, eta_ = 0.0, m1_ = 0.0, m2_ = 0.0;
  std::vector<double> log_f_ln_;
  double prev_log_alpha_ = -std::numeric_limits<double>::infinity();
  double prev_gamma_ = -1.0;
  int evals_ = 0;
};

// The three-step update has a unique useful fixed point flanked by
// degenerate ones (body squeezed entirely below the threshold at
// lambda -> eta, vanishing tail at lambda -> 1), and plain iteration
// contracts too slowly to be practical.  Solve lambda_new(lambda) = lambda
// directly instead and keep the likelihood-best root.
inline mixture_estimate mle_mixture_cached(const shift_cache& cache,
                                           double x_m) {
  mixture_stepper stepper(cache, x_m);
  const double eta = stepper.eta();
  const double lo = eta + 5e-3 * (1.0 - eta);
  const double hi = 1.0 - 5e-3 * (1.0 - eta);

  auto fixed_point_gap = [&](double lambda) -> double {
    try {
      return stepper.step(lambda).lambda_new - lambda;
    } catch (const std::runtime_error&) {  // infeasible at this weight
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  // Weighted log-likelihood of the full mixture at a candidate solution.
  auto candidate_ll = [&](const mixture_step_result& r, double lambda) {
    const mixture_dist d{r.mu, r.sigma_sq, r.alpha, x_m, lambda, cache.c};
    double ll = 0.0;
    const auto& w = cache.w();
    for (std::size_t i = 0; i < cache.y.size(); ++i)
      ll += w[i] * log_pdf(d, cache.c + cache.y[i]);
    return ll;
  };

  constexpr int scan_points = 24;
  double best_ll = -std::numeric_limits<double>::infinity();
  std::optional<mixture_estimate> best;
  double prev_l = 0.0, prev_g = 0.0;
  bool have_prev = false;
  for (int i = 0; i <= scan_points; ++i) {
    const double lam = lo + (hi - lo) * i / scan_points;
    const double g = fixed_point_gap(lam);
    if (!std::isfinite(g)) {
      have_prev = false;
      continue;
    }
    if (have_prev && std::signbit(g) != std::signbit(prev_g)) {
      const double root = roots::brent(fixed_point_gap, prev_l, lam, prev_g,
                                       g, 1e-9, 80);
      const auto r = stepper.step(root);
      const double ll = candidate_ll(r, root);
      if (ll > best_ll) {
        best_ll = ll;
        best = mixture_estimate{r.mu, r.sigma_sq, r.alpha, root, 0};
      }
    }
    prev_l = lam;
    prev_g = g;
    have_prev = true;
  }
  if (!best)
    throw fit_error(
        "mixture conditional MLE: no interior mixing-weight fixed point");
  best->iterations = stepper.evaluations();
  return *best;
}

}  // namespace detail

inline mixture_estimate mle_mixture_conditional(const weighted_sample& s,
                                                double c, double x_m) {
  return detail::mle_mixture_cached(detail::make_shift_cache(s, c, true), x_m);
}

// ---------------------------------------------------------------------------
// Outer step: KS minimization over the shift (and threshold) parameters
// ---------------------------------------------------------------------------

namespace detail {

inline std::pair<double, double> default_c_bracket(const weighted_sample& s) {
  const double lo_inc = s.min_income();
  const double med = s.quantile(0.5);
  double lo = lo_inc - 5.0 * (med - lo_inc);
  double hi = lo_inc - 1.0;
  if (!(lo < hi)) lo = hi - 1.0;
  return {lo, hi};
}

// Inner fit at a fixed shift for the single-threshold-free families;
// returns the KS statistic, or +inf when the inner step fails.
template <typename InnerFit>
double ks_at_shift(const weighted_sample& s, InnerFit&& inner, double c,
                   fit_diagnostics& diag,
                   std::optional<fitted_model>* best = nullptr) {
  ++diag.outer_evaluations;
  std::optional<distribution> d;
  try {
    d = inner(c);
  } catch (const std::exception&) {
    ++diag.inner_failures;
    return std::numeric_limits<double>::infinity();
  }
  double ks;
  try {
    ks = ks_statistic(s, *d);
  } catch (const std::exception&) {
    ++diag.inner_failures;
    return std::numeric_limits<double>::infinity();
  }
  if (!std::isfinite(ks)) {
    ++diag.inner_failures;
    return std::numeric_limits<double>::infinity();
  }
  if (best && (!best->has_value() || ks < (*best)->ks_stat)) {
    fitted_model fm;
    fm.model = *d;
    fm.ks_stat = ks;
    *best = fm;
  }
  return ks;
}

// Coarse grid over the shift bracket followed by a golden-section polish
// between the neighbours of the best grid point (the KS objective over c is
// not unimodal in general, so a straight golden section can land in the
// wrong basin).
template <typename InnerFit>
fitted_model grid_over_shift(const weighted_sample& s, InnerFit&& inner,
                             const fit_options& opt, int grid_points,
                             const char* label) {
  const auto [lo, hi] =
      opt.c_bracket ? *opt.c_bracket : default_c_bracket(s);
  if (!(hi < s.min_income()))
    throw parameter_error("shift bracket must lie below the minimum income");
  fit_diagnostics diag;
  std::optional<fitted_model> best;
  const int m = std::max(2, grid_points);
  int best_idx = -1;
  double best_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    const double c = lo + (hi - lo) * i / (m - 1.0);
    const double v = ks_at_shift(s, inner, c, diag, &best);
    if (v < best_val) {
      best_val = v;
      best_idx = i;
    }
  }
  if (!best)
    throw fit_error(std::string(label) +
                    ": inner step failed at every shift candidate");
  const double step = (hi - lo) / (m - 1.0);
  const double r_lo = lo + step * std::max(0, best_idx - 1);
  const double r_hi = lo + step * std::min(m - 1, best_idx + 1);
  if (r_hi - r_lo > opt.tolerance_c) {
    auto objective = [&](double c) {
      return ks_at_shift(s, inner, c, diag, &best);
    };
    roots::golden_section(objective, r_lo, r_hi, opt.tolerance_c,
                          opt.max_iterations);
  }
  best->diagnostics = diag;
  return *best;
}

inline void finish(fitted_model& fm, const weighted_sample& s) {
  fm.log_likelihood = weighted_log_likelihood(fm.model, s);
}

}  // namespace detail

inline fitted_model fit_css(const weighted_sample& s, double year,
                            const css_constants& constants,
                            const fit_options& opt = {});

// Two-step fit of one family: conditional MLE inside, KS minimization over
// the shift (plus k for the cutoff family and x_m for the mixture) outside.
inline fitted_model fit(family_kind fam, const weighted_sample& s,
                        const fit_options& opt = {}) {
  if (s.size() < 2) throw data_error("fit: at least two observations needed");
  fitted_model out;
  switch (fam) {
    case family_kind::shifted_inverse_gamma: {
      auto inner = [&](double c) -> distribution {
        const auto e = mle_invgamma_conditional(s, c);
        return inverse_gamma_dist{e.alpha, e.beta, c};
      };
      out = detail::grid_over_shift(s, inner, opt, opt.c_scan_points,
                                    "inverse-gamma fit");
      break;
    }
    case family_kind::shifted_davis: {
      auto inner = [&](double c) -> distribution {
        const auto e = mle_davis_conditional(s, c);
        return davis_dist{e.alpha, e.beta, c};
      };
      out = detail::grid_over_shift(s, inner, opt, opt.c_scan_points,
                                    "davis fit");
      break;
    }
    case family_kind::shifted_fisk:
    case family_kind::shifted_dagum:
    case family_kind::shifted_burr: {
      auto inner = [&](double c) -> distribution {
        return mle_nelder_mead(fam, s, c, opt);
      };
      out = detail::grid_over_shift(s, inner, opt, opt.c_scan_points,
                                    to_string(fam));
      break;
    }
    case family_kind::shifted_gb2: {
      auto inner = [&](double c) -> distribution {
        const auto e = mle_gb2_conditional(s, c, opt);
        return gb2_dist{e.alpha, e.beta, e.p, e.q, c};
      };
      out = detail::grid_over_shift(s, inner, opt, opt.c_grid_points,
                                    "gb2 fit");
      break;
    }
    case family_kind::lognormal_pareto_cutoff: {
      // Nested search: k by golden section inside, c by golden section
      // outside.  The inner objective returns the best KS over k.
      const double k_lo = s.quantile(opt.k_quantiles.first);
      const double k_hi = s.quantile(opt.k_quantiles.second);
      if (!(k_lo < k_hi))
        throw fit_error("cutoff fit: switch-point bracket is degenerate");
      fit_diagnostics diag;
      std::optional<fitted_model> best;
      auto ks_at = [&](const detail::shift_cache& cache, double k) {
        ++diag.outer_evaluations;
        try {
          const auto e = detail::mle_cutoff_cached(cache, k);
          const cutoff_dist d{e.mu, e.sigma_sq, e.alpha, k, cache.c};
          const double ks = ks_statistic(s, distribution{d});
          if (!std::isfinite(ks)) throw fit_error("ks not finite");
          if (!best || ks < best->ks_stat) {
            fitted_model fm;
            fm.model = d;
            fm.ks_stat = ks;
            best = fm;
          }
          return ks;
        } catch (const std::exception&) {
          ++diag.inner_failures;
          return std::numeric_limits<double>::infinity();
        }
      };
      // Best KS over k at fixed c: coarse scan, then polish between the
      // neighbours of the best scan point.
      auto over_k = [&](double c) -> double {
        std::optional<detail::shift_cache> cache;
        try {
          cache = detail::make_shift_cache(s, c, true);
        } catch (const std::exception&) {
          ++diag.inner_failures;
          return std::numeric_limits<double>::infinity();
        }
        auto ks_k = [&](double k) { return ks_at(*cache, k); };
        const int m = std::max(2, opt.k_scan_points);
        int best_idx = -1;
        double best_val = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
          const double k = k_lo + (k_hi - k_lo) * i / (m - 1.0);
          const double v = ks_k(k);
          if (v < best_val) {
            best_val = v;
            best_idx = i;
          }
        }
        if (best_idx < 0) return std::numeric_limits<double>::infinity();
        const double step = (k_hi - k_lo) / (m - 1.0);
        const double r_lo = k_lo + step * std::max(0, best_idx - 1);
        const double r_hi = k_lo + step * std::min(m - 1, best_idx + 1);
        const auto res = roots::golden_section(ks_k, r_lo, r_hi,
                                               opt.tolerance_c,
                                               opt.max_iterations);
        return std::min(best_val, res.value);
      };
      const auto [c_lo, c_hi] =
          opt.c_bracket ? *opt.c_bracket : detail::default_c_bracket(s);
      if (!(c_hi < s.min_income()))
        throw parameter_error("shift bracket must lie below the minimum income");
      const int mc = std::max(2, opt.c_scan_points);
      int best_c_idx = -1;
      double best_c_val = std::numeric_limits<double>::infinity();
      for (int i = 0; i < mc; ++i) {
        const double c = c_lo + (c_hi - c_lo) * i / (mc - 1.0);
        const double v = over_k(c);
        if (v < best_c_val) {
          best_c_val = v;
          best_c_idx = i;
        }
      }
      if (!best)
        throw fit_error("cutoff fit: inner step failed at every candidate");
      const double c_step = (c_hi - c_lo) / (mc - 1.0);
      const double rc_lo = c_lo + c_step * std::max(0, best_c_idx - 1);
      const double rc_hi = c_lo + c_step * std::min(mc - 1, best_c_idx + 1);
      const auto res = roots::golden_section(over_k, rc_lo, rc_hi,
                                             opt.tolerance_c,
                                             opt.max_iterations);
      diag.converged = res.converged;
      best->diagnostics = diag;
      out = *best;
      break;
    }
    case family_kind::lognormal_pareto_mixture: {
      // Brute force over a (c, x_m) grid; threshold candidates are log-spaced
      // between two weighted income quantiles, shifted per candidate c.
      const double t_lo = s.quantile(opt.xm_quantiles.first);
      const double t_hi = s.quantile(opt.xm_quantiles.second);
      if (!(t_lo > 0.0) || !(t_lo < t_hi))
        throw fit_error("mixture fit: threshold bracket is degenerate");
      const auto [c_lo, c_hi] =
          opt.c_bracket ? *opt.c_bracket : detail::default_c_bracket(s);
      if (!(c_hi < s.min_income()))
        throw parameter_error("shift bracket must lie below the minimum income");
      fit_diagnostics diag;
      std::optional<fitted_model> best;
      double best_c = 0.0, best_t = 0.0;
      auto ks_at = [&](const detail::shift_cache& cache, double thr) {
        ++diag.outer_evaluations;
        try {
          const auto e = detail::mle_mixture_cached(cache, thr - cache.c);
          const mixture_dist d{e.mu,    e.sigma_sq, e.alpha,
                               thr - cache.c, e.lambda,   cache.c};
          const double ks = ks_statistic(s, distribution{d});
          if (!std::isfinite(ks)) throw fit_error("ks not finite");
          if (!best || ks < best->ks_stat) {
            fitted_model fm;
            fm.model = d;
            fm.ks_stat = ks;
            best = fm;
            best_c = cache.c;
            best_t = thr;
          }
          return ks;
        } catch (const std::exception&) {
          ++diag.inner_failures;
          return std::numeric_limits<double>::infinity();
        }
      };
      const int mc = std::max(2, opt.c_grid_points);
      const int mt = std::max(2, opt.xm_grid_points);
      for (int i = 0; i < mc; ++i) {
        const double c = c_lo + (c_hi - c_lo) * i / (mc - 1.0);
        std::optional<detail::shift_cache> cache;
        try {
          cache = detail::make_shift_cache(s, c, true);
        } catch (const std::exception&) {
          diag.inner_failures += mt;
          diag.outer_evaluations += mt;
          continue;
        }
        for (int t = 0; t < mt; ++t) {
          const double thr = t_lo * std::pow(t_hi / t_lo, t / (mt - 1.0));
          ks_at(*cache, thr);
        }
      }
      if (!best)
        throw fit_error("mixture fit: inner step failed at every candidate");
      // Coordinate polish around the best grid cell: threshold first at the
      // winning shift, then the shift at the refined threshold.
      {
        const double log_step = std::log(t_hi / t_lo) / (mt - 1.0);
        const double tt_lo = std::max(t_lo, best_t * std::exp(-log_step));
        const double tt_hi = std::min(t_hi, best_t * std::exp(log_step));
        const auto cache = detail::make_shift_cache(s, best_c, true);
        roots::golden_section([&](double thr) { return ks_at(cache, thr); },
                              tt_lo, tt_hi,
                              std::max(opt.tolerance_c, 1e-12 * best_t),
                              opt.max_iterations);
        const double c_step = (c_hi - c_lo) / (mc - 1.0);
        const double cc_lo = std::max(c_lo, best_c - c_step);
        const double cc_hi = std::min(c_hi, best_c + c_step);
        const double thr_fixed = best_t;
        auto over_c = [&](double c) -> double {
          std::optional<detail::shift_cache> cch;
          try {
            cch = detail::make_shift_cache(s, c, true);
          } catch (const std::exception&) {
            ++diag.inner_failures;
            return std::numeric_limits<double>::infinity();
          }
          return ks_at(*cch, thr_fixed);
        };
        if (cc_hi - cc_lo > opt.tolerance_c)
          roots::golden_section(over_c, cc_lo, cc_hi, opt.tolerance_c,
                                opt.max_iterations);
      }
      best->diagnostics = diag;
      out = *best;
      break;
    }
    case family_kind::css_inverse_gamma:
      return fit_css(s, opt.css_year, opt.css, opt);
  }
  detail::finish(out, s);
  return out;
}

// One-parameter reduced fit: KS minimization over alpha with the scale and
// shift resolved from the year and the reduction constants.
inline fitted_model fit_css(const weighted_sample& s, double year,
                            const css_constants& constants,
                            const fit_options& opt) {
  if (s.size() < 2)
    throw data_error("fit_css: at least two observations needed");
  fit_diagnostics diag;
  std::optional<fitted_model> best;
  auto objective = [&](double log_alpha) {
    ++diag.outer_evaluations;
    const css_dist d{std::exp(log_alpha), year, constants};
    try {
      const auto resolved = resolve(d);
      if (!(resolved.c < s.min_income()))
        throw fit_error("resolved shift at or above the minimum income");
      const double ks = ks_statistic(s, distribution{d});
      if (!std::isfinite(ks)) throw fit_error("ks not finite");
      if (!best || ks < best->ks_stat) {
        fitted_model fm;
        fm.model = d;
        fm.ks_stat = ks;
        best = fm;
      }
      return ks;
    } catch (const std::exception&) {
      ++diag.inner_failures;
      return std::numeric_limits<double>::infinity();
    }
  };
  // Coarse log-spaced scan, then golden section between the neighbours of
  // the best coarse point (the objective need not be unimodal globally).
  const double a_lo = std::log(opt.css_alpha_bracket.first);
  const double a_hi = std::log(opt.css_alpha_bracket.second);
  constexpr int scan_points = 32;
  int best_idx = -1;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<double> grid(scan_points);
  for (int i = 0; i < scan_points; ++i) {
    grid[i] = a_lo + (a_hi - a_lo) * i / (scan_points - 1.0);
    const double v = objective(grid[i]);
    if (v < best_val) {
      best_val = v;
      best_idx = i;
    }
  }
  if (best_idx < 0)
    throw fit_error("fit_css: no feasible alpha in the search bracket");
  const double g_lo = grid[std::max(0, best_idx - 1)];
  const double g_hi = grid[std::min(scan_points - 1, best_idx + 1)];
  const auto res = roots::golden_section(objective, g_lo, g_hi,
                                         opt.tolerance_inner,
                                         opt.max_iterations);
  diag.converged = res.converged;
  best->diagnostics = diag;
  detail::finish(*best, s);
  return *best;
}

// ---------------------------------------------------------------------------
// Bootstrap standard errors
// ---------------------------------------------------------------------------

namespace detail {

inline weighted_sample resample(const weighted_sample& s, rng::engine& eng) {
  // Weighted resampling with replacement by inverting the cumulative
  // weights; the replicate carries unit weights.
  const auto& cum = s.cumulative_weights();
  const auto& inc = s.incomes();
  const double total = cum.back();
  std::vector<double> incomes(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double u = eng.uniform() * total;
    const auto it = std::lower_bound(cum.begin(), cum.end(), u);
    const std::size_t idx = static_cast<std::size_t>(
        std::min<std::ptrdiff_t>(it - cum.begin(),
                                 static_cast<std::ptrdiff_t>(inc.size()) - 1));
    incomes[i] = inc[idx];
  }
  return weighted_sample(std::move(incomes),
                         std::vector<double>(s.size(), 1.0));
}

}  // namespace detail

struct bootstrap_result {
  std::vector<std::string> parameter_names;
  std::vector<double> standard_errors;
  int replicates_used = 0;
  int replicates_failed = 0;
};

inline bootstrap_result bootstrap_se(family_kind fam,
                                     const weighted_sample& s,
                                     const fit_options& opt, int replicates,
                                     std::uint64_t seed) {
  if (replicates < 2)
    throw parameter_error("bootstrap_se: at least two replicates needed");
  rng::engine master(seed);
  std::vector<std::uint64_t> rep_seeds(static_cast<std::size_t>(replicates));
  for (auto& sv : rep_seeds) sv = master.next_u64();

  std::vector<std::string> names;
  std::vector<std::vector<double>> draws;
  int failed = 0;
  for (int r = 0; r < replicates; ++r) {
    rng::engine eng(rep_seeds[static_cast<std::size_t>(r)]);
    try {
      const auto rs = detail::resample(s, eng);
      const auto fm = fit(fam, rs, opt);
      const auto params = named_params(fm.model);
      if (names.empty())
        for (const auto& kv : params) names.push_back(kv.first);
      std::vector<double> row;
      row.reserve(params.size());
      for (const auto& kv : params) row.push_back(kv.second);
      draws.push_back(std::move(row));
    } catch (const std::exception&) {
      ++failed;
    }
  }
  if (failed * 10 > replicates)
    throw fit_error("bootstrap_se: more than 10% of replicates failed");
  if (draws.size() < 2)
    throw fit_error("bootstrap_se: too few successful replicates");

  bootstrap_result out;
  out.parameter_names = names;
  out.replicates_used = static_cast<int>(draws.size());
  out.replicates_failed = failed;
  out.standard_errors.assign(names.size(), 0.0);
  const double m = static_cast<double>(draws.size());
  for (std::size_t pidx = 0; pidx < names.size(); ++pidx) {
    double mean = 0.0;
    for (const auto& row : draws) mean += row[pidx];
    mean /= m;
    double ss = 0.0;
    for (const auto& row : draws) {
      const double dlt = row[pidx] - mean;
      ss += dlt * dlt;
    }
    out.standard_errors[pidx] = std::sqrt(ss / (m - 1.0));
  }
  return out;
}

}  // namespace incdist
