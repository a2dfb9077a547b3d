#pragma once

// The nine shifted parametric income distributions: density, CDF, quantile,
// mean, and deterministic sampling for each family.
//
// All families share the convention that `c` shifts the support left edge:
// density is zero for x <= c.  Scale parameters are in dollars, shapes are
// dimensionless, and the log-normal pieces use log-dollar parameters.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "incdist/common.hpp"
#include "incdist/quadrature.hpp"
#include "incdist/random.hpp"
#include "incdist/roots.hpp"
#include "incdist/special_functions.hpp"

namespace incdist {

// ---------------------------------------------------------------------------
// Parameter structs
// ---------------------------------------------------------------------------

// Coefficients of the linear relationship c_t = psi0 + psi1 t + psi2 alpha_t
// together with the proportionality constant phi = c_t / beta_t.
struct css_constants {
  double phi;   // dimensionless, negative for the published fit
  double psi0;  // dollars
  double psi1;  // dollars per year
  double psi2;  // dollars
};

// The published fitted constants.
inline css_constants reference_css_constants() {
  return css_constants{-0.133, 727800.0, -366.0, -2194.0};
}

struct inverse_gamma_dist {
  double alpha, beta, c;
};

// One-parameter reduced inverse-gamma: alpha plus a year resolve to a full
// shifted inverse-gamma through the constant-shift-scale relationship.
struct css_dist {
  double alpha;
  double year;
  css_constants constants;
};

struct davis_dist {
  double alpha, beta, c;
};

struct gb2_dist {
  double alpha, beta, p, q, c;
};

struct dagum_dist {
  double alpha, beta, p, c;
};

struct burr_dist {
  double alpha, beta, q, c;
};

struct fisk_dist {
  double alpha, beta, c;
};

// Log-normal body switching to a Pareto tail at income k; the Pareto scale
// x_m is pinned by requiring total mass one, so the free parameters are
// (mu, sigma_sq, alpha, k, c).
struct cutoff_dist {
  double mu, sigma_sq, alpha, k, c;
};

// Convex mixture: lambda * log-normal + (1 - lambda) * Pareto(x_m) where the
// Pareto component lives on x >= x_m + c.
struct mixture_dist {
  double mu, sigma_sq, alpha, x_m, lambda, c;
};

using distribution =
    std::variant<inverse_gamma_dist, css_dist, davis_dist, gb2_dist,
                 dagum_dist, burr_dist, fisk_dist, cutoff_dist, mixture_dist>;

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace detail {
inline void require(bool ok, const char* what) {
  if (!ok) throw parameter_error(what);
}
}  // namespace detail

inline void validate(const inverse_gamma_dist& d) {
  detail::require(d.alpha > 0.0 && std::isfinite(d.alpha),
                  "inverse-gamma: alpha > 0 required");
  detail::require(d.beta > 0.0 && std::isfinite(d.beta),
                  "inverse-gamma: beta > 0 required");
  detail::require(std::isfinite(d.c), "inverse-gamma: shift must be finite");
}

inline void validate(const css_constants& k) {
  detail::require(k.phi != 0.0 && std::isfinite(k.phi),
                  "css constants: phi must be nonzero");
  detail::require(std::isfinite(k.psi0) && std::isfinite(k.psi1) &&
                      std::isfinite(k.psi2),
                  "css constants: coefficients must be finite");
}

// Resolve the one-parameter model to its full shifted inverse-gamma form.
inline inverse_gamma_dist resolve(const css_dist& d) {
  validate(d.constants);
  detail::require(d.alpha > 0.0 && std::isfinite(d.alpha),
                  "css model: alpha > 0 required");
  detail::require(std::isfinite(d.year), "css model: year must be finite");
  const double c_hat =
      d.constants.psi0 + d.constants.psi1 * d.year + d.constants.psi2 * d.alpha;
  const double beta_hat = c_hat / d.constants.phi;
  detail::require(beta_hat > 0.0,
                  "css model: implied scale is not positive for this "
                  "year/alpha combination");
  return inverse_gamma_dist{d.alpha, beta_hat, c_hat};
}

inline void validate(const css_dist& d) { (void)resolve(d); }

inline void validate(const davis_dist& d) {
  detail::require(d.alpha > 1.0 && std::isfinite(d.alpha),
                  "davis: alpha > 1 required for a normalizable density");
  detail::require(d.beta > 0.0 && std::isfinite(d.beta),
                  "davis: beta > 0 required");
  detail::require(std::isfinite(d.c), "davis: shift must be finite");
}

inline void validate(const gb2_dist& d) {
  detail::require(d.alpha > 0.0 && std::isfinite(d.alpha),
                  "gb2: alpha > 0 required");
  detail::require(d.beta > 0.0 && std::isfinite(d.beta),
                  "gb2: beta > 0 required");
  detail::require(d.p > 0.0 && std::isfinite(d.p), "gb2: p > 0 required");
  detail::require(d.q > 0.0 && std::isfinite(d.q), "gb2: q > 0 required");
  detail::require(std::isfinite(d.c), "gb2: shift must be finite");
}

inline void validate(const dagum_dist& d) {
  detail::require(d.alpha > 0.0 && std::isfinite(d.alpha),
                  "dagum: alpha > 0 required");
  detail::require(d.beta > 0.0 && std::isfinite(d.beta),
                  "dagum: beta > 0 required");
  detail::require(d.p > 0.0 && std::isfinite(d.p), "dagum: p > 0 required");
  detail::require(std::isfinite(d.c), "dagum: shift must be finite");
}

inline void validate(const burr_dist& d) {
  detail::require(d.alpha > 0.0 && std::isfinite(d.alpha),
                  "burr: alpha > 0 required");
  detail::require(d.beta > 0.0 && std::isfinite(d.beta),
                  "burr: beta > 0 required");
  detail::require(d.q > 0.0 && std::isfinite(d.q), "burr: q > 0 required");
  detail::require(std::isfinite(d.c), "burr: shift must be finite");
}

inline void validate(const fisk_dist& d) {
  detail::require(d.alpha > 0.0 && std::isfinite(d.alpha),
                  "fisk: alpha > 0 required");
  detail::require(d.beta > 0.0 && std::isfinite(d.beta),
                  "fisk: beta > 0 required");
  detail::require(std::isfinite(d.c), "fisk: shift must be finite");
}

inline void validate(const cutoff_dist& d) {
  detail::require(std::isfinite(d.mu), "cutoff: mu must be finite");
  detail::require(d.sigma_sq > 0.0 && std::isfinite(d.sigma_sq),
                  "cutoff: sigma^2 > 0 required");
  detail::require(d.alpha > 0.0 && std::isfinite(d.alpha),
                  "cutoff: alpha > 0 required");
  detail::require(std::isfinite(d.c), "cutoff: shift must be finite");
  detail::require(d.k > d.c, "cutoff: switch point k must exceed the shift");
}

inline void validate(const mixture_dist& d) {
  detail::require(std::isfinite(d.mu), "mixture: mu must be finite");
  detail::require(d.sigma_sq > 0.0 && std::isfinite(d.sigma_sq),
                  "mixture: sigma^2 > 0 required");
  detail::require(d.alpha > 0.0 && std::isfinite(d.alpha),
                  "mixture: alpha > 0 required");
  detail::require(d.x_m > 0.0 && std::isfinite(d.x_m),
                  "mixture: x_m > 0 required");
  detail::require(d.lambda > 0.0 && d.lambda < 1.0,
                  "mixture: lambda in (0, 1) required");
  detail::require(std::isfinite(d.c), "mixture: shift must be finite");
}

inline void validate(const distribution& d) {
  std::visit([](const auto& v) { validate(v); }, d);
}

// Machine-readable family tag (used by the serializers and the CLI).
inline const char* family_tag(const distribution& d) {
  struct visitor {
    const char* operator()(const inverse_gamma_dist&) const {
      return "shifted_inverse_gamma";
    }
    const char* operator()(const css_dist&) const { return "css_inverse_gamma"; }
    const char* operator()(const davis_dist&) const { return "shifted_davis"; }
    const char* operator()(const gb2_dist&) const { return "shifted_gb2"; }
    const char* operator()(const dagum_dist&) const { return "shifted_dagum"; }
    const char* operator()(const burr_dist&) const { return "shifted_burr"; }
    const char* operator()(const fisk_dist&) const { return "shifted_fisk"; }
    const char* operator()(const cutoff_dist&) const {
      return "lognormal_pareto_cutoff";
    }
    const char* operator()(const mixture_dist&) const {
      return "lognormal_pareto_mixture";
    }
  };
  return std::visit(visitor{}, d);
}

// Left edge of the support (density is zero at or below this point).
inline double support_left_edge(const distribution& d) {
  struct visitor {
    double operator()(const inverse_gamma_dist& v) const { return v.c; }
    double operator()(const css_dist& v) const { return resolve(v).c; }
    double operator()(const davis_dist& v) const { return v.c; }
    double operator()(const gb2_dist& v) const { return v.c; }
    double operator()(const dagum_dist& v) const { return v.c; }
    double operator()(const burr_dist& v) const { return v.c; }
    double operator()(const fisk_dist& v) const { return v.c; }
    double operator()(const cutoff_dist& v) const { return v.c; }
    double operator()(const mixture_dist& v) const { return v.c; }
  };
  return std::visit(visitor{}, d);
}

// ---------------------------------------------------------------------------
// Shifted inverse-gamma
// ---------------------------------------------------------------------------

inline double pdf(const inverse_gamma_dist& d, double x) {
  validate(d);
  const double y = x - d.c;
  if (!(y > 0.0)) return 0.0;
  const double log_pdf = d.alpha * std::log(d.beta) - sf::log_gamma(d.alpha) -
                         (d.alpha + 1.0) * std::log(y) - d.beta / y;
  return std::exp(log_pdf);
}

inline double cdf(const inverse_gamma_dist& d, double x) {
  validate(d);
  const double y = x - d.c;
  if (!(y > 0.0)) return 0.0;
  return sf::regularized_gamma_upper(d.alpha, d.beta / y);
}

namespace detail {

// Solve Q(a, t) = q for t (upper regularized gamma), q in (0, 1).
inline double gamma_upper_inverse(double a, double q) {
  // Wilson-Hilferty starting point for the equivalent lower-tail problem.
  const double z = sf::normal_cdf_inverse(1.0 - q);
  const double h = 1.0 - 1.0 / (9.0 * a) + z / (3.0 * std::sqrt(a));
  double t = a * h * h * h;
  if (!(t > 0.0) || !std::isfinite(t)) t = a;
  auto f = [&](double tt) { return sf::regularized_gamma_upper(a, tt) - q; };
  // Expand a bracket around the starting point (Q decreases in t).
  double lo = t, hi = t;
  double f_lo = f(lo), f_hi = f_lo;
  for (int i = 0; i < 200 && f_lo < 0.0; ++i) {
    lo *= 0.5;
    f_lo = f(lo);
  }
  for (int i = 0; i < 200 && f_hi > 0.0; ++i) {
    hi *= 2.0;
    f_hi = f(hi);
  }
  return roots::brent(f, lo, hi, f_lo, f_hi, 1e-14);
}

}  // namespace detail

inline double quantile(const inverse_gamma_dist& d, double u) {
  validate(d);
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("quantile: u in (0, 1)");
  // cdf = Q(alpha, beta/y) so beta/y solves Q(alpha, t) = u.
  const double t = detail::gamma_upper_inverse(d.alpha, u);
  return d.c + d.beta / t;
}

inline std::optional<double> mean(const inverse_gamma_dist& d) {
  validate(d);
  if (d.alpha <= 1.0) return std::nullopt;
  return d.beta / (d.alpha - 1.0) + d.c;
}

inline double draw(const inverse_gamma_dist& d, rng::engine& gen) {
  return d.c + d.beta / gen.gamma(d.alpha);
}

// ---------------------------------------------------------------------------
// Reduced (constant-shift-scale) inverse-gamma
// ---------------------------------------------------------------------------

inline double pdf(const css_dist& d, double x) { return pdf(resolve(d), x); }
inline double cdf(const css_dist& d, double x) { return cdf(resolve(d), x); }
inline double quantile(const css_dist& d, double u) {
  return quantile(resolve(d), u);
}
inline std::optional<double> mean(const css_dist& d) {
  return mean(resolve(d));
}
inline double draw(const css_dist& d, rng::engine& gen) {
  return draw(resolve(d), gen);
}

// ---------------------------------------------------------------------------
// Shifted Davis
// ---------------------------------------------------------------------------

namespace detail {

inline double davis_log_norm(double alpha, double beta) {
  return alpha * std::log(beta) - sf::log_gamma(alpha) -
         std::log(sf::zeta(alpha));
}

// log(e^t - 1) without overflow.
inline double log_expm1(double t) {
  if (t > 36.0) return t;  // e^{-t} below double epsilon
  return std::log(std::expm1(t));
}

}  // namespace detail

inline double pdf(const davis_dist& d, double x) {
  validate(d);
  const double y = x - d.c;
  if (!(y > 0.0)) return 0.0;
  const double t = d.beta / y;
  const double log_pdf = detail::davis_log_norm(d.alpha, d.beta) -
                         (d.alpha + 1.0) * std::log(y) - detail::log_expm1(t);
  return std::exp(log_pdf);
}

// CDF values at an ascending list of points, computed by one cumulative
// adaptive-quadrature sweep (the Davis CDF has no closed form).
inline std::vector<double> cdf_batch(const davis_dist& d,
                                     const std::vector<double>& ascending_x) {
  validate(d);
  std::vector<double> out(ascending_x.size(), 0.0);
  auto f = [&](double x) { return pdf(d, x); };
  double acc = 0.0;
  double prev = d.c;
  for (std::size_t i = 0; i < ascending_x.size(); ++i) {
    const double x = ascending_x[i];
    if (x > prev) {
      acc += quad::integrate(f, prev, x, 1e-11);
      prev = x;
    }
    out[i] = std::min(1.0, std::max(0.0, acc));
  }
  return out;
}

inline double cdf(const davis_dist& d, double x) {
  validate(d);
  if (!(x > d.c)) return 0.0;
  return cdf_batch(d, {x})[0];
}

inline double quantile(const davis_dist& d, double u) {
  validate(d);
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("quantile: u in (0, 1)");
  // Expand a bracket starting from the scale of the k=1 mixture component.
  double lo = d.c + d.beta * 0.01, hi = d.c + d.beta;
  while (cdf(d, lo) > u && lo - d.c > 1e-300) lo = d.c + (lo - d.c) * 0.25;
  while (cdf(d, hi) < u) hi = d.c + (hi - d.c) * 4.0;
  auto f = [&](double x) { return cdf(d, x) - u; };
  return roots::brent(f, lo, hi, f(lo), f(hi), 1e-12);
}

inline std::optional<double> mean(const davis_dist& d) {
  validate(d);
  if (d.alpha <= 2.0) return std::nullopt;
  // Expectation of the zeta-weighted mixture of inverse-gammas with scales
  // k * beta: sum_k k^{-alpha}/zeta(alpha) * k beta/(alpha-1).
  return d.c + d.beta * sf::zeta(d.alpha - 1.0) /
                   ((d.alpha - 1.0) * sf::zeta(d.alpha));
}

inline double draw(const davis_dist& d, rng::engine& gen) {
  // The density is the zeta-weighted mixture over k >= 1 of inverse-gamma
  // densities with shape alpha and scale k*beta; draw the component index
  // from the normalized power law, then the component.
  const double k = gen.zipf(d.alpha);
  return d.c + k * d.beta / gen.gamma(d.alpha);
}

// ---------------------------------------------------------------------------
// Shifted generalized beta of the second kind (GB2) and its nested families
// ---------------------------------------------------------------------------

inline double pdf(const gb2_dist& d, double x) {
  validate(d);
  const double y = x - d.c;
  if (!(y > 0.0)) return 0.0;
  const double lr = std::log(y) - std::log(d.beta);
  const double log_pdf = std::log(d.alpha) + (d.alpha * d.p - 1.0) * std::log(y) -
                         d.alpha * d.p * std::log(d.beta) -
                         sf::log_beta(d.p, d.q) -
                         (d.p + d.q) * sf::log1pexp(d.alpha * lr);
  return std::exp(log_pdf);
}

inline double cdf(const gb2_dist& d, double x) {
  validate(d);
  const double y = x - d.c;
  if (!(y > 0.0)) return 0.0;
  const double t = d.alpha * (std::log(y) - std::log(d.beta));
  // z = y^alpha / (beta^alpha + y^alpha), computed stably from t.
  const double z = (t <= 0.0) ? std::exp(t) / (1.0 + std::exp(t))
                              : 1.0 / (1.0 + std::exp(-t));
  return sf::regularized_beta(d.p, d.q, z);
}

inline double quantile(const gb2_dist& d, double u) {
  validate(d);
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("quantile: u in (0, 1)");
  auto f = [&](double z) { return sf::regularized_beta(d.p, d.q, z) - u; };
  double lo = 1e-300, hi = 1.0 - 1e-16;
  const double z = roots::brent(f, lo, hi, f(lo), f(hi), 1e-14);
  // y = beta * (z/(1-z))^{1/alpha}
  const double log_odds = std::log(z) - std::log1p(-z);
  return d.c + d.beta * std::exp(log_odds / d.alpha);
}

inline std::optional<double> mean(const gb2_dist& d) {
  validate(d);
  if (d.q * d.alpha <= 1.0) return std::nullopt;
  const double log_ratio = sf::log_beta(d.p + 1.0 / d.alpha, d.q - 1.0 / d.alpha) -
                           sf::log_beta(d.p, d.q);
  return d.c + d.beta * std::exp(log_ratio);
}

inline double draw(const gb2_dist& d, rng::engine& gen) {
  // Beta-prime(p, q) via a gamma ratio, then the power/scale transform.
  const double g1 = gen.gamma(d.p);
  const double g2 = gen.gamma(d.q);
  return d.c + d.beta * std::pow(g1 / g2, 1.0 / d.alpha);
}

// --- Dagum (GB2 with q = 1) ---

inline double pdf(const dagum_dist& d, double x) {
  validate(d);
  const double y = x - d.c;
  if (!(y > 0.0)) return 0.0;
  const double lr = std::log(y) - std::log(d.beta);
  const double log_pdf = std::log(d.alpha * d.p) +
                         (d.alpha * d.p - 1.0) * std::log(y) -
                         d.alpha * d.p * std::log(d.beta) -
                         (d.p + 1.0) * sf::log1pexp(d.alpha * lr);
  return std::exp(log_pdf);
}

inline double cdf(const dagum_dist& d, double x) {
  validate(d);
  const double y = x - d.c;
  if (!(y > 0.0)) return 0.0;
  const double lr = std::log(y) - std::log(d.beta);
  // (1 + (y/beta)^{-alpha})^{-p}
  return std::exp(-d.p * sf::log1pexp(-d.alpha * lr));
}

inline double quantile(const dagum_dist& d, double u) {
  validate(d);
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("quantile: u in (0, 1)");
  // y = beta * (u^{-1/p} - 1)^{-1/alpha}
  const double r = std::expm1(-std::log(u) / d.p);
  return d.c + d.beta * std::pow(r, -1.0 / d.alpha);
}

inline std::optional<double> mean(const dagum_dist& d) {
  validate(d);
  if (d.alpha <= 1.0) return std::nullopt;
  const double log_mean = std::log(d.p) +
                          sf::log_beta(d.p + 1.0 / d.alpha, 1.0 - 1.0 / d.alpha);
  return d.c + d.beta * std::exp(log_mean);
}

inline double draw(const dagum_dist& d, rng::engine& gen) {
  return quantile(d, gen.uniform());
}

// --- Burr (GB2 with p = 1) ---

inline double pdf(const burr_dist& d, double x) {
  validate(d);
  const double y = x - d.c;
  if (!(y > 0.0)) return 0.0;
  const double lr = std::log(y) - std::log(d.beta);
  const double log_pdf = std::log(d.alpha * d.q) + (d.alpha - 1.0) * std::log(y) -
                         d.alpha * std::log(d.beta) -
                         (d.q + 1.0) * sf::log1pexp(d.alpha * lr);
  return std::exp(log_pdf);
}

inline double cdf(const burr_dist& d, double x) {
  validate(d);
  const double y = x - d.c;
  if (!(y > 0.0)) return 0.0;
  const double lr = std::log(y) - std::log(d.beta);
  // 1 - (1 + (y/beta)^alpha)^{-q}
  return -std::expm1(-d.q * sf::log1pexp(d.alpha * lr));
}

inline double quantile(const burr_dist& d, double u) {
  validate(d);
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("quantile: u in (0, 1)");
  // y = beta * ((1-u)^{-1/q} - 1)^{1/alpha}
  const double r = std::expm1(-std::log1p(-u) / d.q);
  return d.c + d.beta * std::pow(r, 1.0 / d.alpha);
}

inline std::optional<double> mean(const burr_dist& d) {
  validate(d);
  if (d.q * d.alpha <= 1.0) return std::nullopt;
  const double log_mean = std::log(d.q) +
                          sf::log_beta(1.0 + 1.0 / d.alpha, d.q - 1.0 / d.alpha);
  return d.c + d.beta * std::exp(log_mean);
}

inline double draw(const burr_dist& d, rng::engine& gen) {
  return quantile(d, gen.uniform());
}

// --- Fisk (GB2 with p = q = 1) ---

inline double pdf(const fisk_dist& d, double x) {
  validate(d);
  const double y = x - d.c;
  if (!(y > 0.0)) return 0.0;
  const double lr = std::log(y) - std::log(d.beta);
  const double log_pdf = std::log(d.alpha) + (d.alpha - 1.0) * std::log(y) -
                         d.alpha * std::log(d.beta) -
                         2.0 * sf::log1pexp(d.alpha * lr);
  return std::exp(log_pdf);
}

inline double cdf(const fisk_dist& d, double x) {
  validate(d);
  const double y = x - d.c;
  if (!(y > 0.0)) return 0.0;
  const double t = d.alpha * (std::log(y) - std::log(d.beta));
  return (t <= 0.0) ? std::exp(t) / (1.0 + std::exp(t))
                    : 1.0 / (1.0 + std::exp(-t));
}

inline double quantile(const fisk_dist& d, double u) {
  validate(d);
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("quantile: u in (0, 1)");
  const double log_odds = std::log(u) - std::log1p(-u);
  return d.c + d.beta * std::exp(log_odds / d.alpha);
}

inline std::optional<double> mean(const fisk_dist& d) {
  validate(d);
  if (d.alpha <= 1.0) return std::nullopt;
  const double t = sf::pi / d.alpha;
  return d.c + d.beta * t / std::sin(t);
}

inline double draw(const fisk_dist& d, rng::engine& gen) {
  return quantile(d, gen.uniform());
}

// ---------------------------------------------------------------------------
// Log-normal with Pareto cutoff
// ---------------------------------------------------------------------------

// Pareto scale x_m implied by the mass constraint (total probability one):
// the tail above the switch point carries exactly the log-normal's upper-tail
// mass, which forces x_m = (k-c) * [1 - Phi((log(k-c)-mu)/sigma)]^{1/alpha}.
inline double pareto_scale(const cutoff_dist& d) {
  validate(d);
  const double kappa = d.k - d.c;
  const double sigma = std::sqrt(d.sigma_sq);
  const double z = (std::log(kappa) - d.mu) / sigma;
  const double upper = 0.5 * std::erfc(z / sf::sqrt_two);  // 1 - Phi(z)
  return kappa * std::pow(upper, 1.0 / d.alpha);
}

inline double pdf(const cutoff_dist& d, double x) {
  validate(d);
  const double y = x - d.c;
  if (!(y > 0.0)) return 0.0;
  const double kappa = d.k - d.c;
  const double sigma = std::sqrt(d.sigma_sq);
  if (y < kappa) {
    const double z = (std::log(y) - d.mu) / sigma;
    return std::exp(-0.5 * z * z) / (y * sigma * sf::sqrt_two_pi);
  }
  const double x_m = pareto_scale(d);
  return std::exp(std::log(d.alpha) + d.alpha * std::log(x_m) -
                  (d.alpha + 1.0) * std::log(y));
}

inline double cdf(const cutoff_dist& d, double x) {
  validate(d);
  const double y = x - d.c;
  if (!(y > 0.0)) return 0.0;
  const double kappa = d.k - d.c;
  const double sigma = std::sqrt(d.sigma_sq);
  if (y < kappa) return sf::normal_cdf((std::log(y) - d.mu) / sigma);
  const double x_m = pareto_scale(d);
  return 1.0 - std::pow(x_m / y, d.alpha);
}

inline double quantile(const cutoff_dist& d, double u) {
  validate(d);
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("quantile: u in (0, 1)");
  const double kappa = d.k - d.c;
  const double sigma = std::sqrt(d.sigma_sq);
  const double mass_below = sf::normal_cdf((std::log(kappa) - d.mu) / sigma);
  if (u < mass_below)
    return d.c + std::exp(d.mu + sigma * sf::normal_cdf_inverse(u));
  const double x_m = pareto_scale(d);
  return d.c + x_m * std::pow(1.0 - u, -1.0 / d.alpha);
}

inline std::optional<double> mean(const cutoff_dist& d) {
  validate(d);
  if (d.alpha <= 1.0) return std::nullopt;
  const double kappa = d.k - d.c;
  const double sigma = std::sqrt(d.sigma_sq);
  // Partial expectation of the log-normal body below the switch point...
  const double body = std::exp(d.mu + 0.5 * d.sigma_sq) *
                      sf::normal_cdf((std::log(kappa) - d.mu - d.sigma_sq) / sigma);
  // ...plus the Pareto tail integral from kappa upward.
  const double x_m = pareto_scale(d);
  const double tail = d.alpha * std::pow(x_m, d.alpha) *
                      std::pow(kappa, 1.0 - d.alpha) / (d.alpha - 1.0);
  return d.c + body + tail;
}

inline double draw(const cutoff_dist& d, rng::engine& gen) {
  return quantile(d, gen.uniform());
}

// ---------------------------------------------------------------------------
// Log-normal and Pareto mixture
// ---------------------------------------------------------------------------

inline double pdf(const mixture_dist& d, double x) {
  validate(d);
  const double y = x - d.c;
  if (!(y > 0.0)) return 0.0;
  const double sigma = std::sqrt(d.sigma_sq);
  const double z = (std::log(y) - d.mu) / sigma;
  double value = d.lambda * std::exp(-0.5 * z * z) / (y * sigma * sf::sqrt_two_pi);
  if (y >= d.x_m)
    value += (1.0 - d.lambda) *
             std::exp(std::log(d.alpha) + d.alpha * std::log(d.x_m) -
                      (d.alpha + 1.0) * std::log(y));
  return value;
}

inline double cdf(const mixture_dist& d, double x) {
  validate(d);
  const double y = x - d.c;
  if (!(y > 0.0)) return 0.0;
  const double sigma = std::sqrt(d.sigma_sq);
  double value = d.lambda * sf::normal_cdf((std::log(y) - d.mu) / sigma);
  if (y >= d.x_m)
    value += (1.0 - d.lambda) * (1.0 - std::pow(d.x_m / y, d.alpha));
  return value;
}

inline double quantile(const mixture_dist& d, double u) {
  validate(d);
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("quantile: u in (0, 1)");
  const double sigma = std::sqrt(d.sigma_sq);
  const double mass_below =
      d.lambda * sf::normal_cdf((std::log(d.x_m) - d.mu) / sigma);
  if (u < mass_below)
    return d.c + std::exp(d.mu + sigma * sf::normal_cdf_inverse(u / d.lambda));
  // Above the graft point both components contribute; invert numerically.
  auto f = [&](double y) { return cdf(d, d.c + y) - u; };
  double lo = d.x_m;
  double f_lo = f(lo);
  if (f_lo >= 0.0) return d.c + lo;
  double hi = d.x_m * 2.0;
  while (f(hi) < 0.0) hi *= 2.0;
  const double y = roots::brent(f, lo, hi, f_lo, f(hi), 1e-13);
  return d.c + y;
}

inline std::optional<double> mean(const mixture_dist& d) {
  validate(d);
  if (d.alpha <= 1.0) return std::nullopt;
  const double body = std::exp(d.mu + 0.5 * d.sigma_sq);
  const double tail = d.alpha * d.x_m / (d.alpha - 1.0);
  return d.c + d.lambda * body + (1.0 - d.lambda) * tail;
}

inline double draw(const mixture_dist& d, rng::engine& gen) {
  // Pick the component by the mixing weight, then draw from it.
  if (gen.uniform() < d.lambda) {
    const double sigma = std::sqrt(d.sigma_sq);
    return d.c + std::exp(d.mu + sigma * gen.normal());
  }
  return d.c + d.x_m * std::pow(gen.uniform(), -1.0 / d.alpha);
}

// ---------------------------------------------------------------------------
// Log densities (used by the weighted likelihood computations)
// ---------------------------------------------------------------------------

inline double log_pdf(const inverse_gamma_dist& d, double x) {
  const double y = x - d.c;
  if (!(y > 0.0)) return -std::numeric_limits<double>::infinity();
  return d.alpha * std::log(d.beta) - sf::log_gamma(d.alpha) -
         (d.alpha + 1.0) * std::log(y) - d.beta / y;
}

inline double log_pdf(const css_dist& d, double x) {
  return log_pdf(resolve(d), x);
}

inline double log_pdf(const davis_dist& d, double x) {
  const double y = x - d.c;
  if (!(y > 0.0)) return -std::numeric_limits<double>::infinity();
  return detail::davis_log_norm(d.alpha, d.beta) -
         (d.alpha + 1.0) * std::log(y) - detail::log_expm1(d.beta / y);
}

inline double log_pdf(const gb2_dist& d, double x) {
  const double y = x - d.c;
  if (!(y > 0.0)) return -std::numeric_limits<double>::infinity();
  const double lr = std::log(y) - std::log(d.beta);
  return std::log(d.alpha) + (d.alpha * d.p - 1.0) * std::log(y) -
         d.alpha * d.p * std::log(d.beta) - sf::log_beta(d.p, d.q) -
         (d.p + d.q) * sf::log1pexp(d.alpha * lr);
}

inline double log_pdf(const dagum_dist& d, double x) {
  const double y = x - d.c;
  if (!(y > 0.0)) return -std::numeric_limits<double>::infinity();
  const double lr = std::log(y) - std::log(d.beta);
  return std::log(d.alpha * d.p) + (d.alpha * d.p - 1.0) * std::log(y) -
         d.alpha * d.p * std::log(d.beta) -
         (d.p + 1.0) * sf::log1pexp(d.alpha * lr);
}

inline double log_pdf(const burr_dist& d, double x) {
  const double y = x - d.c;
  if (!(y > 0.0)) return -std::numeric_limits<double>::infinity();
  const double lr = std::log(y) - std::log(d.beta);
  return std::log(d.alpha * d.q) + (d.alpha - 1.0) * std::log(y) -
         d.alpha * std::log(d.beta) - (d.q + 1.0) * sf::log1pexp(d.alpha * lr);
}

inline double log_pdf(const fisk_dist& d, double x) {
  const double y = x - d.c;
  if (!(y > 0.0)) return -std::numeric_limits<double>::infinity();
  const double lr = std::log(y) - std::log(d.beta);
  return std::log(d.alpha) + (d.alpha - 1.0) * std::log(y) -
         d.alpha * std::log(d.beta) - 2.0 * sf::log1pexp(d.alpha * lr);
}

inline double log_pdf(const cutoff_dist& d, double x) {
  const double y = x - d.c;
  if (!(y > 0.0)) return -std::numeric_limits<double>::infinity();
  const double kappa = d.k - d.c;
  const double sigma = std::sqrt(d.sigma_sq);
  if (y < kappa) {
    const double z = (std::log(y) - d.mu) / sigma;
    return -0.5 * z * z - std::log(y) - std::log(sigma) -
           std::log(sf::sqrt_two_pi);
  }
  const double x_m = pareto_scale(d);
  return std::log(d.alpha) + d.alpha * std::log(x_m) -
         (d.alpha + 1.0) * std::log(y);
}

inline double log_pdf(const mixture_dist& d, double x) {
  const double y = x - d.c;
  if (!(y > 0.0)) return -std::numeric_limits<double>::infinity();
  const double sigma = std::sqrt(d.sigma_sq);
  const double z = (std::log(y) - d.mu) / sigma;
  const double log_body = std::log(d.lambda) - 0.5 * z * z - std::log(y) -
                          std::log(sigma) - std::log(sf::sqrt_two_pi);
  if (y < d.x_m) return log_body;
  const double log_tail = std::log1p(-d.lambda) + std::log(d.alpha) +
                          d.alpha * std::log(d.x_m) -
                          (d.alpha + 1.0) * std::log(y);
  const double hi = std::max(log_body, log_tail);
  return hi + sf::log1pexp(std::min(log_body, log_tail) - hi);
}

// ---------------------------------------------------------------------------
// Parameter listing (serializers, bootstrap)
// ---------------------------------------------------------------------------

using named_value = std::pair<std::string, double>;

inline std::vector<named_value> named_params(const distribution& d) {
  struct visitor {
    std::vector<named_value> operator()(const inverse_gamma_dist& v) const {
      return {{"alpha", v.alpha}, {"beta", v.beta}, {"c", v.c}};
    }
    std::vector<named_value> operator()(const css_dist& v) const {
      const auto r = resolve(v);
      return {{"alpha", v.alpha}, {"year", v.year},  {"beta", r.beta},
              {"c", r.c},         {"phi", v.constants.phi}};
    }
    std::vector<named_value> operator()(const davis_dist& v) const {
      return {{"alpha", v.alpha}, {"beta", v.beta}, {"c", v.c}};
    }
    std::vector<named_value> operator()(const gb2_dist& v) const {
      return {{"alpha", v.alpha}, {"beta", v.beta}, {"p", v.p}, {"q", v.q},
              {"c", v.c}};
    }
    std::vector<named_value> operator()(const dagum_dist& v) const {
      return {{"alpha", v.alpha}, {"beta", v.beta}, {"p", v.p}, {"c", v.c}};
    }
    std::vector<named_value> operator()(const burr_dist& v) const {
      return {{"alpha", v.alpha}, {"beta", v.beta}, {"q", v.q}, {"c", v.c}};
    }
    std::vector<named_value> operator()(const fisk_dist& v) const {
      return {{"alpha", v.alpha}, {"beta", v.beta}, {"c", v.c}};
    }
    std::vector<named_value> operator()(const cutoff_dist& v) const {
      return {{"mu", v.mu},   {"sigma_sq", v.sigma_sq},
              {"alpha", v.alpha}, {"x_m", pareto_scale(v)},
              {"c", v.c},     {"k", v.k}};
    }
    std::vector<named_value> operator()(const mixture_dist& v) const {
      return {{"mu", v.mu},     {"sigma_sq", v.sigma_sq}, {"alpha", v.alpha},
              {"x_m", v.x_m}, {"c", v.c},               {"lambda", v.lambda}};
    }
  };
  return std::visit(visitor{}, d);
}

// ---------------------------------------------------------------------------
// Variant dispatch
// ---------------------------------------------------------------------------

inline double pdf(const distribution& d, double x) {
  return std::visit([&](const auto& v) { return pdf(v, x); }, d);
}

inline double log_pdf(const distribution& d, double x) {
  return std::visit([&](const auto& v) { return log_pdf(v, x); }, d);
}

inline double cdf(const distribution& d, double x) {
  return std::visit([&](const auto& v) { return cdf(v, x); }, d);
}

inline double quantile(const distribution& d, double u) {
  return std::visit([&](const auto& v) { return quantile(v, u); }, d);
}

inline std::optional<double> mean(const distribution& d) {
  return std::visit([&](const auto& v) { return mean(v); }, d);
}

inline double draw(const distribution& d, rng::engine& gen) {
  return std::visit([&](const auto& v) { return draw(v, gen); }, d);
}

// Deterministic sample of size n (n >= 1) from a fixed seed.
inline std::vector<double> sample(const distribution& d, std::size_t n,
                                  std::uint64_t seed) {
  validate(d);
  if (n == 0) throw parameter_error("sample: n >= 1 required");
  rng::engine gen(seed);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = draw(d, gen);
  return out;
}

}  // namespace incdist
