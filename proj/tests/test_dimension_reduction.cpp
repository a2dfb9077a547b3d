#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include <incdist/dimension_reduction.hpp>
#include <incdist/distributions.hpp>

#include "oracles.hpp"

using namespace incdist;

namespace {

// Series generated exactly from known constants (zero residual case).
param_series exact_series(const css_constants& k,
                          const std::vector<double>& years,
                          const std::vector<double>& alphas) {
  param_series out;
  for (std::size_t i = 0; i < years.size(); ++i) {
    const double c = k.psi0 + k.psi1 * years[i] + k.psi2 * alphas[i];
    out.push_back({years[i], alphas[i], c / k.phi, c});
  }
  return out;
}

}  // namespace

TEST_CASE("householder least squares matches the normal equations") {
  std::mt19937_64 gen(99);
  auto u = [&] { return (gen() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t m = 12, k = 3;
    std::vector<std::vector<double>> a(m, std::vector<double>(k));
    std::vector<double> b(m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < k; ++j) a[i][j] = u() * (j == 0 ? 1.0 : 10.0);
      b[i] = u() * 5.0;
    }
    const auto qr = detail::qr_least_squares(a, b);
    const auto ne = oracle::least_squares_normal(a, b);
    for (std::size_t j = 0; j < k; ++j)
      REQUIRE(qr[j] == Catch::Approx(ne[j]).margin(1e-9).epsilon(1e-8));
  }
}

TEST_CASE("singular designs are rejected") {
  // third column is a multiple of the first
  std::vector<std::vector<double>> a = {
      {1.0, 2.0, 3.0}, {1.0, 5.0, 3.0}, {1.0, -1.0, 3.0}, {1.0, 0.5, 3.0}};
  std::vector<double> b = {1.0, 2.0, 3.0, 4.0};
  REQUIRE_THROWS_AS(detail::qr_least_squares(a, b), data_error);
}

TEST_CASE("phi estimate is the shift-to-scale ratio of sums") {
  param_series ps = {{1980, 3.0, 100.0, -20.0},
                     {1981, 3.2, 150.0, -10.0},
                     {1982, 2.9, 250.0, -35.0}};
  REQUIRE(estimate_phi(ps) == Catch::Approx(-65.0 / 500.0));
  param_series degenerate = {{1980, 3.0, 100.0, -20.0},
                             {1981, 3.0, -100.0, -20.0}};
  REQUIRE_THROWS_AS(estimate_phi(degenerate), data_error);
}

TEST_CASE("normalization divides each column by its sum") {
  param_series ps = {{1, 2.0, 10.0, -4.0}, {2, 4.0, 30.0, -8.0}};
  const auto ns = normalize_series(ps);
  REQUIRE(ns.alpha[0] == Catch::Approx(2.0 / 6.0));
  REQUIRE(ns.alpha[1] == Catch::Approx(4.0 / 6.0));
  REQUIRE(ns.beta[0] == Catch::Approx(10.0 / 40.0));
  REQUIRE(ns.c[1] == Catch::Approx(-8.0 / -12.0));
  REQUIRE(ns.alpha[0] + ns.alpha[1] == Catch::Approx(1.0));
  REQUIRE(ns.beta[0] + ns.beta[1] == Catch::Approx(1.0));
  REQUIRE(ns.c[0] + ns.c[1] == Catch::Approx(1.0));
}

TEST_CASE("constants are recovered exactly from a consistent series") {
  const css_constants k{-0.133, 727800.0, -366.0, -2194.0};
  const auto ps = exact_series(k, {1967, 1970, 1975, 1981, 1990, 1996},
                               {4.2, 3.9, 4.5, 5.1, 4.8, 4.0});
  const auto r = estimate_constants(ps);
  REQUIRE(r.constants.phi == Catch::Approx(k.phi).epsilon(1e-12));
  REQUIRE(r.constants.psi0 == Catch::Approx(k.psi0).epsilon(1e-9));
  REQUIRE(r.constants.psi1 == Catch::Approx(k.psi1).epsilon(1e-9));
  REQUIRE(r.constants.psi2 == Catch::Approx(k.psi2).epsilon(1e-9));
  REQUIRE(r.objective < 1e-8);
  for (const double res : r.c_residuals) REQUIRE(std::abs(res) < 1e-5);
  for (const double res : r.scale_residuals) REQUIRE(std::abs(res) < 1e-5);
}

TEST_CASE("psi regression agrees with the normal-equations oracle") {
  std::mt19937_64 gen(123);
  auto u = [&] { return (gen() >> 11) * 0x1.0p-53; };
  const css_constants k{-0.15, 500000.0, -250.0, -1500.0};
  param_series ps;
  for (int i = 0; i < 9; ++i) {
    const double year = 1970 + 3 * i;
    const double alpha = 3.0 + 2.0 * u();
    double c = k.psi0 + k.psi1 * year + k.psi2 * alpha;
    const double beta = (c + 2000.0 * (u() - 0.5)) / k.phi;  // noisy scale
    c += 1500.0 * (u() - 0.5);                               // noisy shift
    ps.push_back({year, alpha, beta, c});
  }
  const double phi = estimate_phi(ps);
  const auto psi = estimate_psi(ps, phi);

  std::vector<std::vector<double>> a;
  std::vector<double> b;
  for (const auto& p : ps) {
    a.push_back({1.0, p.year, p.alpha});
    b.push_back(0.5 * (p.c + phi * p.beta));
  }
  const auto ne = oracle::least_squares_normal(a, b);
  REQUIRE(psi[0] == Catch::Approx(ne[0]).epsilon(1e-8));
  REQUIRE(psi[1] == Catch::Approx(ne[1]).epsilon(1e-8));
  REQUIRE(psi[2] == Catch::Approx(ne[2]).epsilon(1e-8));

  // residual identities, both in shift units: r_c = c - c_hat,
  // r_s = phi beta - c_hat
  const auto fit = estimate_constants(ps);
  double objective = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double chat = fit.constants.psi0 + fit.constants.psi1 * ps[i].year +
                        fit.constants.psi2 * ps[i].alpha;
    REQUIRE(fit.c_residuals[i] == Catch::Approx(ps[i].c - chat).margin(1e-9));
    REQUIRE(fit.scale_residuals[i] ==
            Catch::Approx(phi * ps[i].beta - chat).margin(1e-7));
    objective += fit.c_residuals[i] * fit.c_residuals[i] +
                 fit.scale_residuals[i] * fit.scale_residuals[i];
  }
  REQUIRE(fit.objective == Catch::Approx(objective).epsilon(1e-12));
}

TEST_CASE("centered-year option changes nothing observable") {
  const css_constants k{-0.133, 727800.0, -366.0, -2194.0};
  std::mt19937_64 gen(5);
  auto u = [&] { return (gen() >> 11) * 0x1.0p-53; };
  auto ps = exact_series(k, {1967, 1973, 1979, 1985, 1991},
                         {4.0, 4.4, 3.7, 5.0, 4.6});
  for (auto& p : ps) {
    p.c += 900.0 * (u() - 0.5);
    p.beta += 3000.0 * (u() - 0.5);
  }
  const auto plain = estimate_constants(ps, false);
  const auto centered = estimate_constants(ps, true);
  REQUIRE(centered.constants.psi0 ==
          Catch::Approx(plain.constants.psi0).epsilon(1e-9));
  REQUIRE(centered.constants.psi1 ==
          Catch::Approx(plain.constants.psi1).epsilon(1e-9));
  REQUIRE(centered.constants.psi2 ==
          Catch::Approx(plain.constants.psi2).epsilon(1e-9));
  REQUIRE(centered.objective == Catch::Approx(plain.objective).epsilon(1e-9));
}

TEST_CASE("scale/shift prediction reports feasibility instead of clamping") {
  const css_constants k{-0.133, 727800.0, -366.0, -2194.0};
  const auto good = predict_scale_shift(k, 1967.0, 5.0);
  // c = 727800 - 366*1967 - 2194*5 = -3092; beta = c/phi > 0
  REQUIRE(good.c == Catch::Approx(-3092.0).epsilon(1e-12));
  REQUIRE(good.beta == Catch::Approx(-3092.0 / -0.133).epsilon(1e-12));
  REQUIRE(good.feasible);

  // late years stay feasible (c more negative, beta = c/phi still positive)
  REQUIRE(predict_scale_shift(k, 2100.0, 5.0).feasible);

  // early years drive the shift positive, so the implied scale is negative
  const auto bad = predict_scale_shift(k, 1800.0, 5.0);
  REQUIRE_FALSE(bad.feasible);
  REQUIRE(bad.c > 0.0);
  REQUIRE(bad.beta < 0.0);

  REQUIRE_THROWS_AS(predict_scale_shift(css_constants{0.0, 1.0, 1.0, 1.0},
                                        1980.0, 4.0),
                    parameter_error);
}

TEST_CASE("scale change decomposition is additive and linear") {
  const css_constants k{-0.133, 727800.0, -366.0, -2194.0};
  const double t0 = 1970, a0 = 4.8, t1 = 1985, a1 = 3.3;
  const auto dec = decompose_scale_change(k, t0, a0, t1, a1);
  const double b0 = predict_scale_shift(k, t0, a0).beta;
  const double b1 = predict_scale_shift(k, t1, a1).beta;
  REQUIRE(dec.time_effect + dec.shape_effect ==
          Catch::Approx(b1 - b0).epsilon(1e-10));
  REQUIRE(dec.time_effect == Catch::Approx(k.psi1 / k.phi * (t1 - t0)));
  REQUIRE(dec.shape_effect == Catch::Approx(k.psi2 / k.phi * (a1 - a0)));
}

TEST_CASE("proportional variant recovers its generating line") {
  const double phi = -0.2, g0 = 90.0, g1 = -0.04;
  param_series ps;
  for (int i = 0; i < 6; ++i) {
    const double year = 1975 + 4 * i;
    const double alpha = 3.5 + 0.3 * std::sin(double(i));
    // (c + phi beta) / (2 alpha) = g0 + g1 year exactly, and the per-year
    // asymmetries delta alternate so their sum is zero and the internally
    // estimated phi equals the constructed one.
    const double target = (g0 + g1 * year) * 2.0 * alpha;
    const double delta = (i % 2 == 0 ? 1.0 : -1.0) * 7.0;
    const double c = 0.5 * target + delta;
    const double beta = (0.5 * target - delta) / phi;
    ps.push_back({year, alpha, beta, c});
  }
  REQUIRE(estimate_phi(ps) == Catch::Approx(phi).epsilon(1e-12));
  const auto v = estimate_proportional_variant(ps);
  REQUIRE(v.phi == Catch::Approx(phi).epsilon(1e-12));
  REQUIRE(v.psi0 == Catch::Approx(g0).epsilon(1e-9));
  REQUIRE(v.psi1 == Catch::Approx(g1).epsilon(1e-9));
}

TEST_CASE("reduction pipeline fits a synthetic panel end to end") {
  const css_constants k = reference_css_constants();
  // keep the alpha path away from an affine function of the year, or the
  // [1, year, alpha] design degenerates
  const double alphas[4] = {4.0, 4.35, 3.9, 4.2};
  std::vector<double> years;
  std::vector<weighted_sample> samples;
  for (int i = 0; i < 4; ++i) {
    const double year = 1985 + 2 * i;
    const css_dist d{alphas[i], year, k};
    auto xs = sample(d, 3000, 700 + i);
    years.push_back(year);
    samples.emplace_back(std::move(xs), std::vector<double>(3000, 1.0));
  }
  const auto rep = reduction_pipeline(years, samples);
  REQUIRE(rep.failed_years.empty());
  REQUIRE(rep.series.size() == 4);
  REQUIRE(rep.fits.size() == 4);
  // four noisy years pin phi only loosely; sign and magnitude must survive
  REQUIRE(rep.regression.constants.phi < -0.05);
  REQUIRE(rep.regression.constants.phi > -0.3);
  for (const auto& yf : rep.fits) {
    REQUIRE(std::holds_alternative<css_dist>(yf.one_param.model));
    REQUIRE(yf.one_param.ks_stat < 0.2);
    REQUIRE(yf.one_param.ks_stat < yf.three_param.ks_stat + 0.1);
  }
}

TEST_CASE("reduction pipeline records failing years and keeps going") {
  // Three years whose incomes sit above the common shift bracket, plus one
  // shifted far down so the bracket is invalid for it (bracket high is not
  // below its minimum income): that year must be recorded, not propagated.
  const double alphas[3] = {3.0, 3.8, 3.1};
  const double shifts[3] = {-96000.0, -95600.0, -96400.0};
  std::vector<double> years;
  std::vector<weighted_sample> samples;
  for (int i = 0; i < 3; ++i) {
    const inverse_gamma_dist d{alphas[i], 120000.0, shifts[i]};
    auto xs = sample(d, 1200, 800 + i);
    years.push_back(1980.0 + i);
    samples.emplace_back(std::move(xs), std::vector<double>(1200, 1.0));
  }
  const inverse_gamma_dist low{3.0, 20000.0, -200000.0};
  auto bad = sample(low, 400, 850);
  years.push_back(1999.0);
  samples.emplace_back(std::move(bad), std::vector<double>(400, 1.0));

  fit_options opt;
  opt.c_bracket = {{-130000.0, -95000.0}};
  const auto rep = reduction_pipeline(years, samples, opt);
  REQUIRE(rep.failed_years.size() == 1);
  REQUIRE(rep.failed_years[0].first == 1999.0);
  REQUIRE_FALSE(rep.failed_years[0].second.empty());
  REQUIRE(rep.series.size() == 3);
  REQUIRE(rep.fits.size() == 3);
  for (const auto& yf : rep.fits)
    REQUIRE(std::isfinite(yf.one_param.ks_stat));

  // fewer than three surviving years aborts even when the input has four
  const std::vector<double> y2 = {years[0], years[1], 1998.0, 1999.0};
  const std::vector<weighted_sample> s2 = {samples[0], samples[1], samples[3],
                                           samples[3]};
  REQUIRE_THROWS_AS(reduction_pipeline(y2, s2, opt), fit_error);

  // fewer than three input years violates the precondition outright
  REQUIRE_THROWS_AS(reduction_pipeline({1980.0}, {samples[0]}, opt),
                    parameter_error);
}
