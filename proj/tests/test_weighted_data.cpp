#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include <incdist/weighted_data.hpp>

using namespace incdist;

TEST_CASE("load_csv maps named columns and reports bad rows") {
  std::istringstream in(
      "id,wage,wt\n"
      "1,52000,1.5\n"
      "2,-200,0.5\n"
      "3,9000,2.0\n");
  const auto rows = load_csv(in, "wage", "wt");
  REQUIRE(rows.size() == 3);
  REQUIRE(rows[1].income == -200.0);
  REQUIRE(rows[2].weight == 2.0);

  std::istringstream missing("a,b\n1,2\n");
  REQUIRE_THROWS_AS(load_csv(missing, "income", "weight"), data_error);

  std::istringstream junk("income,weight\n5,1\nbroken,1\n");
  try {
    load_csv(junk, "income", "weight");
    FAIL("expected data_error");
  } catch (const data_error& e) {
    REQUIRE(std::string(e.what()).find("row 3") != std::string::npos);
  }

  std::istringstream badweight("income,weight\n5,0\n");
  REQUIRE_THROWS_AS(load_csv(badweight, "income", "weight"), data_error);
}

TEST_CASE("clean removes zero incomes, trims, and sorts") {
  std::vector<observation> raw = {
      {30000, 1}, {0, 7}, {-500, 1}, {90000, 2}, {10000, 1}, {0, 1}};
  const auto s = clean(raw, 1, 1);  // drops -500 (bottom) and 90000 (top)
  REQUIRE(s.size() == 2);
  REQUIRE(s.incomes().front() == 10000.0);
  REQUIRE(s.incomes().back() == 30000.0);
  REQUIRE(std::is_sorted(s.incomes().begin(), s.incomes().end()));

  REQUIRE_THROWS_AS(clean({{0, 1}, {0, 2}}), data_error);
  REQUIRE_THROWS_AS(clean({{5, 1}, {6, 1}}, 1, 1), parameter_error);
}

TEST_CASE("weights are normalized to mean one and prefix sums are exact") {
  const auto s = clean({{5, 10}, {7, 30}, {11, 20}});
  double total = 0.0;
  for (const double w : s.weights()) total += w;
  REQUIRE(total == Catch::Approx(s.n()).epsilon(1e-15));
  REQUIRE(s.cumulative_weights().back() == Catch::Approx(s.n()).epsilon(1e-15));
  // relative weights preserved
  REQUIRE(s.weights()[1] / s.weights()[0] == Catch::Approx(3.0));
  REQUIRE_THROWS_AS(weighted_sample({1.0}, {-2.0}), data_error);
}

TEST_CASE("ecdf steps at weighted observations") {
  const auto s = clean({{10, 1}, {20, 1}, {20, 2}, {40, 4}});
  REQUIRE(s.ecdf(5.0) == 0.0);
  REQUIRE(s.ecdf(10.0) == Catch::Approx(1.0 / 8.0));
  REQUIRE(s.ecdf(20.0) == Catch::Approx(4.0 / 8.0));
  REQUIRE(s.ecdf(39.0) == Catch::Approx(4.0 / 8.0));
  REQUIRE(s.ecdf(40.0) == 1.0);
}

TEST_CASE("bin_density integrates to one and respects the bin layout") {
  std::vector<observation> raw;
  std::mt19937_64 gen(7);
  for (int i = 0; i < 5000; ++i) {
    const double u = (gen() >> 11) * 0x1.0p-53;
    raw.push_back({1000.0 + 250000.0 * u * u, 1.0 + (i % 3)});
  }
  const auto s = clean(raw);
  const auto bd = bin_density(s, 60000.0, 6000.0, 1.2);

  double mass = 0.0;
  for (const auto& b : bd.bins) {
    REQUIRE(b.upper > b.lower);
    REQUIRE(b.density >= 0.0);
    mass += b.density * (b.upper - b.lower);
  }
  REQUIRE(mass == Catch::Approx(1.0).epsilon(1e-12));

  for (const auto& b : bd.bins) {
    if (b.upper <= 60000.0) {
      REQUIRE(b.upper - b.lower == Catch::Approx(6000.0));
    } else {
      REQUIRE(b.upper / b.lower >= 1.2 - 1e-9);
    }
  }
  REQUIRE(bd.bins.front().lower <= s.min_income());
  REQUIRE(bd.bins.back().upper >= s.max_income());
}

TEST_CASE("bin_density handles samples entirely below the boundary") {
  const auto s = clean({{2000, 1}, {7000, 1}, {15000, 2}});
  const auto bd = bin_density(s, 60000.0, 6000.0, 1.2);
  double mass = 0.0;
  for (const auto& b : bd.bins) mass += b.density * (b.upper - b.lower);
  REQUIRE(mass == Catch::Approx(1.0).epsilon(1e-12));
}
