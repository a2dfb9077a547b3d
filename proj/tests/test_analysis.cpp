#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <incdist/analysis.hpp>
#include <incdist/distributions.hpp>
#include <incdist/special_functions.hpp>
#include <incdist/weighted_data.hpp>

#include "oracles.hpp"

using namespace incdist;

namespace {

// A shifted inverse-gamma whose shift/scale obey c = phi * beta, the
// relation under which the closed-form Gini applies.
inverse_gamma_dist css_consistent(double alpha, double phi, double beta) {
  return inverse_gamma_dist{alpha, beta, phi * beta};
}

// Tail probability assembled directly from the regularized gamma, so the
// slowly-decaying region keeps full precision instead of rounding to
// 1 - 1.0 = 0.
double survival(const inverse_gamma_dist& d, double x) {
  return sf::regularized_gamma_lower(d.alpha, d.beta / (x - d.c));
}

}  // namespace

TEST_CASE("closed-form gini matches the tail-probability integral") {
  for (const double phi : {-0.133, -0.3, 0.05}) {
    for (const double alpha : {1.4, 2.0, 3.3, 6.0}) {
      const auto d = css_consistent(alpha, phi, 50000.0);
      const double mu = *mean(d);
      const double numeric = oracle::gini_from_tail(
          [&](double x) { return survival(d, x); }, d.c, mu, 50000.0);
      INFO("phi " << phi << " alpha " << alpha);
      REQUIRE(gini_css(alpha, phi) ==
              Catch::Approx(numeric).margin(1e-8).epsilon(1e-7));
    }
  }
}

TEST_CASE("gini is scale-free but not shift-free") {
  // same alpha and phi, different beta: identical by the formula, and the
  // integral oracle confirms the invariance
  const double alpha = 2.5, phi = -0.2;
  for (const double beta : {1000.0, 400000.0}) {
    const auto d = css_consistent(alpha, phi, beta);
    const double numeric = oracle::gini_from_tail(
        [&](double x) { return survival(d, x); }, d.c, *mean(d), beta);
    REQUIRE(numeric == Catch::Approx(gini_css(alpha, phi)).epsilon(1e-7));
  }
}

TEST_CASE("gini diverges at the singular shape value") {
  const double phi = -0.133;
  const double star = gini_singularity(phi);
  REQUIRE(star == Catch::Approx(1.0 - 1.0 / phi));
  REQUIRE(std::abs(gini_css(star - 1e-3, phi)) > 1e3);
  REQUIRE(std::abs(gini_css(star + 1e-3, phi)) > 1e3);
  // opposite signs on the two sides of the pole
  REQUIRE(gini_css(star - 1e-3, phi) * gini_css(star + 1e-3, phi) < 0.0);
  REQUIRE_THROWS_AS(gini_css(0.4, phi), parameter_error);
  REQUIRE_THROWS_AS(gini_singularity(0.0), parameter_error);
}

TEST_CASE("gini grid marks the singular row and finds the interior minimum") {
  // with phi = -0.5 the pole sits exactly on the grid point alpha = 3
  const auto prof = gini_grid(-0.5, 2.0, 4.0, 3);
  REQUIRE(prof.rows.size() == 3);
  REQUIRE(std::isinf(prof.rows[1].gini));
  REQUIRE(prof.singularity.has_value());
  REQUIRE(*prof.singularity == Catch::Approx(3.0));

  // stationary point: derivative changes sign there (finite differences)
  const auto wide = gini_grid(-0.133, 0.6, 8.0, 100);
  REQUIRE(wide.stationary_points.size() == 1);
  const double a_star = wide.stationary_points[0];
  auto g = [](double a) { return gini_css(a, -0.133); };
  REQUIRE(oracle::derivative(g, a_star, 1e-6) ==
          Catch::Approx(0.0).margin(1e-6));
  REQUIRE(oracle::derivative(g, a_star - 0.05, 1e-6) < 0.0);
  REQUIRE(oracle::derivative(g, a_star + 0.05, 1e-6) > 0.0);

  REQUIRE_THROWS_AS(gini_grid(-0.133, 0.3, 5.0, 10), parameter_error);
  REQUIRE_THROWS_AS(gini_grid(-0.133, 2.0, 5.0, 1), parameter_error);
}

TEST_CASE("empirical gini equals the quadratic-form definition") {
  std::mt19937_64 gen(31);
  auto u = [&] { return (gen() >> 11) * 0x1.0p-53; };
  std::vector<double> xs, ws;
  for (int i = 0; i < 300; ++i) {
    xs.push_back(1000.0 + 99000.0 * u() * u());
    ws.push_back(0.5 + 3.0 * u());
  }
  const weighted_sample s(xs, ws);
  // brute force over all pairs with the normalized weights
  const auto& x = s.incomes();
  const auto& w = s.weights();
  double mean_x = 0.0, num = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mean_x += w[i] * x[i];
  mean_x /= s.n();
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j)
      num += w[i] * w[j] * std::abs(x[i] - x[j]);
  const double brute = num / (2.0 * s.n() * s.n() * mean_x);
  REQUIRE(gini_empirical(s) == Catch::Approx(brute).epsilon(1e-12));
}

TEST_CASE("empirical gini converges to the closed form on simulated data") {
  const double alpha = 3.1, phi = -0.133;
  const auto d = css_consistent(alpha, phi, 80000.0);
  auto xs = sample(distribution{d}, 400000, 777);
  const weighted_sample s(std::move(xs),
                          std::vector<double>(400000, 1.0));
  REQUIRE(gini_empirical(s) ==
          Catch::Approx(gini_css(alpha, phi)).margin(0.004));
}

TEST_CASE("per-capita income matches the quadrature mean") {
  const css_constants k = reference_css_constants();
  const double year = 1990.0, alpha = 4.0;
  const auto pc = per_capita_css(k, year, alpha);
  REQUIRE(pc.has_value());
  const auto d = resolve(css_dist{alpha, year, k});
  const double numeric = oracle::integrate_tail(
      [&](double x) { return x * pdf(d, x); }, d.c, d.beta, 1e-12);
  REQUIRE(*pc == Catch::Approx(numeric).epsilon(1e-7));
  REQUIRE(*pc == Catch::Approx(*mean(d)).epsilon(1e-12));

  REQUIRE_FALSE(per_capita_css(k, year, 0.9).has_value());
  REQUIRE_THROWS_AS(per_capita_css(css_constants{0.0, 1, 1, 1}, year, alpha),
                    parameter_error);
}

TEST_CASE("per-capita annual increment is the year difference") {
  const css_constants k = reference_css_constants();
  const double alpha = 4.4;
  const auto inc = per_capita_annual_increment(k, alpha);
  REQUIRE(inc.has_value());
  const double by_difference = *per_capita_css(k, 1991.0, alpha) -
                               *per_capita_css(k, 1990.0, alpha);
  REQUIRE(*inc == Catch::Approx(by_difference).epsilon(1e-9));
}

TEST_CASE("percent change helpers are the documented ratios") {
  REQUIRE(percent_change_linear(50000.0, -366.0) ==
          Catch::Approx(-366.0 / 50000.0));
  REQUIRE(percent_change_linear_corrected(50000.0, -366.0, -0.133) ==
          Catch::Approx((-366.0 / -0.133) / 50000.0));
  REQUIRE(percent_change_exponential(0.02) ==
          Catch::Approx(std::expm1(0.02)));
  REQUIRE_THROWS_AS(percent_change_linear(0.0, 1.0), parameter_error);
  REQUIRE_THROWS_AS(percent_change_linear_corrected(1.0, 1.0, 0.0),
                    parameter_error);
}

TEST_CASE("maximum-entropy moments: quadrature version") {
  const inverse_gamma_dist d{3.5, 90000.0, -7000.0};
  const auto rep = maxent_check(d);
  // the log moment matches its formula and the derived inverse moment
  // (alpha/beta) matches the measured one; the stated beta/alpha does not
  REQUIRE(rep.log_residual == Catch::Approx(0.0).margin(1e-8));
  REQUIRE(rep.inverse_residual_derived == Catch::Approx(0.0).margin(1e-10));
  REQUIRE(std::abs(rep.inverse_residual_stated) >
          1000.0 * std::abs(rep.inverse_residual_derived + 1e-300));
  REQUIRE(rep.log_moment_formula ==
          Catch::Approx(std::log(d.beta) - sf::digamma(d.alpha)));
  REQUIRE(rep.inverse_moment_derived == Catch::Approx(d.alpha / d.beta));
  REQUIRE(rep.inverse_moment_stated == Catch::Approx(d.beta / d.alpha));
}

TEST_CASE("maximum-entropy moments: empirical version") {
  const inverse_gamma_dist d{3.5, 90000.0, -7000.0};
  auto xs = sample(distribution{d}, 200000, 999);
  const weighted_sample s(std::move(xs), std::vector<double>(200000, 1.0));
  const auto rep = maxent_check(d, s);
  REQUIRE(rep.log_residual == Catch::Approx(0.0).margin(0.01));
  REQUIRE(rep.inverse_residual_derived == Catch::Approx(0.0).margin(1e-6));
}
