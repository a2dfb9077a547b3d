#include <catch2/catch_amalgamated.hpp>

#include <boost/math/special_functions/erf.hpp>

#include <incdist/special_functions.hpp>

#include "oracles.hpp"

using namespace incdist;

TEST_CASE("log_gamma matches Boost over a wide range") {
  for (const double x : {1e-3, 0.1, 0.5, 1.0, 1.5, 2.0, 3.7, 10.0, 55.5,
                         171.0, 1e4, 1e8}) {
    const double ref = boost::math::lgamma(x);
    REQUIRE(sf::log_gamma(x) ==
            Catch::Approx(ref).margin(1e-12).epsilon(1e-13));
  }
}

TEST_CASE("digamma and trigamma match Boost") {
  for (const double x :
       {1e-3, 0.07, 0.5, 1.0, 1.46163, 2.0, 6.5, 30.0, 1e3, 1e7}) {
    REQUIRE(sf::digamma(x) ==
            Catch::Approx(boost::math::digamma(x)).margin(1e-12).epsilon(1e-12));
    REQUIRE(sf::trigamma(x) ==
            Catch::Approx(boost::math::polygamma(1, x)).epsilon(1e-11));
  }
}

TEST_CASE("digamma_inverse inverts digamma") {
  for (const double a : {0.01, 0.3, 0.9, 1.0, 2.5, 17.0, 400.0, 1e6}) {
    const double y = sf::digamma(a);
    REQUIRE(sf::digamma_inverse(y) == Catch::Approx(a).epsilon(1e-10));
  }
}

TEST_CASE("zeta matches Boost, zeta_prime matches finite differences") {
  for (const double s : {1.01, 1.1, 1.5, 2.0, 3.0, 4.5, 9.0, 20.0, 55.0}) {
    REQUIRE(sf::zeta(s) == Catch::Approx(boost::math::zeta(s)).epsilon(1e-12));
    // near the pole the truncation error grows like h^4 / (s-1)^6, so the
    // step must shrink with the distance to s = 1
    const double h = std::min(1e-3, 3e-3 * (s - 1.0));
    const double fd = oracle::derivative5(
        [](double t) { return boost::math::zeta(t); }, s, h);
    REQUIRE(sf::zeta_prime(s) == Catch::Approx(fd).margin(1e-9).epsilon(1e-8));
  }
}

TEST_CASE("regularized incomplete gamma matches Boost and is complementary") {
  for (const double a : {0.05, 0.7, 1.0, 2.5, 12.0, 120.0, 4000.0}) {
    for (const double frac : {0.05, 0.4, 1.0, 1.7, 6.0}) {
      const double z = a * frac;
      if (!(z > 0.0)) continue;
      const double p = sf::regularized_gamma_lower(a, z);
      const double q = sf::regularized_gamma_upper(a, z);
      REQUIRE(p == Catch::Approx(boost::math::gamma_p(a, z))
                       .margin(1e-14)
                       .epsilon(1e-12));
      REQUIRE(q == Catch::Approx(boost::math::gamma_q(a, z))
                       .margin(1e-14)
                       .epsilon(1e-12));
      REQUIRE(p + q == Catch::Approx(1.0).epsilon(1e-13));
    }
  }
}

TEST_CASE("regularized incomplete beta matches Boost") {
  for (const double a : {0.2, 1.0, 3.5, 40.0}) {
    for (const double b : {0.4, 1.0, 2.2, 17.0}) {
      for (const double x : {0.001, 0.2, 0.5, 0.8, 0.999}) {
        REQUIRE(sf::regularized_beta(a, b, x) ==
                Catch::Approx(boost::math::ibeta(a, b, x))
                    .margin(1e-14)
                    .epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("normal cdf and its inverse") {
  for (const double x : {-8.0, -2.5, -0.3, 0.0, 0.7, 3.1, 8.0}) {
    const double ref = 0.5 * boost::math::erfc(-x / std::sqrt(2.0));
    REQUIRE(sf::normal_cdf(x) == Catch::Approx(ref).margin(1e-16).epsilon(1e-13));
  }
  // round trip far into both tails
  for (const double p : {1e-12, 1e-6, 0.025, 0.5, 0.975, 1.0 - 1e-9}) {
    REQUIRE(sf::normal_cdf(sf::normal_cdf_inverse(p)) ==
            Catch::Approx(p).epsilon(1e-10));
  }
  REQUIRE(sf::normal_cdf_inverse(0.975) ==
          Catch::Approx(1.959963984540054).epsilon(1e-12));
}

TEST_CASE("log1pexp is accurate at both extremes") {
  REQUIRE(sf::log1pexp(-745.0) == Catch::Approx(std::exp(-745.0)).epsilon(1e-12));
  REQUIRE(sf::log1pexp(0.0) == Catch::Approx(std::log(2.0)).epsilon(1e-15));
  REQUIRE(sf::log1pexp(800.0) == Catch::Approx(800.0).epsilon(1e-15));
  REQUIRE(sf::log1pexp(30.0) ==
          Catch::Approx(std::log1p(std::exp(30.0))).epsilon(1e-15));
}

TEST_CASE("log_beta consistency with log_gamma") {
  for (const double a : {0.3, 2.0, 15.0})
    for (const double b : {0.8, 4.0, 90.0})
      REQUIRE(sf::log_beta(a, b) ==
              Catch::Approx(boost::math::lgamma(a) + boost::math::lgamma(b) -
                            boost::math::lgamma(a + b))
                  .margin(1e-12));
}
