#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <variant>

#include <incdist/serialization.hpp>

#include "schema_check.hpp"

using namespace incdist;

namespace {

ordered_json load_schema(const std::string& name) {
  std::ifstream in(std::string(INCDIST_SCHEMA_DIR) + "/" + name);
  REQUIRE(in.good());
  return ordered_json::parse(in);
}

std::vector<distribution> every_family() {
  return {
      inverse_gamma_dist{3.0, 120000.0, -8000.0},
      css_dist{4.0, 1990.0, reference_css_constants()},
      davis_dist{3.0, 140000.0, -6000.0},
      gb2_dist{1.8, 60000.0, 1.5, 1.3, -4000.0},
      dagum_dist{2.6, 55000.0, 1.4, -3000.0},
      burr_dist{2.2, 70000.0, 1.6, -2500.0},
      fisk_dist{2.8, 48000.0, -1500.0},
      cutoff_dist{10.3, 0.35, 1.6, 60000.0, -4000.0},
      mixture_dist{10.1, 0.6, 2.1, 70000.0, 0.9, -5000.0},
  };
}

}  // namespace

TEST_CASE("format_double is exact and fixed-format") {
  for (const double v : {0.1, -3.125, 1.0 / 3.0, 123456789.123456, 1e-300,
                         722.000000000001}) {
    REQUIRE(std::stod(format_double(v)) == v);
  }
  REQUIRE(format_double(std::numeric_limits<double>::infinity()) == "inf");
  REQUIRE(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  REQUIRE(format_double(2.0) == "2");
}

TEST_CASE("distribution json round trips every family") {
  for (const auto& d : every_family()) {
    const auto j = to_json(d);
    const auto back = distribution_from_json(j);
    REQUIRE(back.index() == d.index());
    const auto a = named_params(d);
    const auto b = named_params(back);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      REQUIRE(a[i].first == b[i].first);
      REQUIRE(a[i].second == b[i].second);  // bit-exact via JSON numbers
    }
  }
  REQUIRE_THROWS_AS(
      distribution_from_json(ordered_json{{"family", "weibull"},
                                          {"params", ordered_json::object()}}),
      parameter_error);
}

TEST_CASE("distribution json validates against the shipped schema") {
  const auto schema = load_schema("distribution.schema.json");
  for (const auto& d : every_family()) {
    const auto errors = schema_check::validate(to_json(d), schema);
    for (const auto& e : errors) INFO(e);
    REQUIRE(errors.empty());
  }
}

TEST_CASE("fitted model json carries fit metadata") {
  fitted_model fm;
  fm.model = fisk_dist{2.8, 48000.0, -1500.0};
  fm.ks_stat = 0.011;
  fm.log_likelihood = -1234.5;
  fm.dataset_label = "unit";
  fm.diagnostics = {42, 3, true};
  const auto j = to_json(fm);
  REQUIRE(j["family"] == "shifted_fisk");
  REQUIRE(j["ks_stat"] == 0.011);
  REQUIRE(j["dataset"] == "unit");
  REQUIRE(j["diagnostics"]["outer_evaluations"] == 42);
  REQUIRE(j["diagnostics"]["converged"] == true);
}

TEST_CASE("parameter series csv round trips") {
  param_series ps = {{1967.0, 4.2, 61234.5678901234, -8123.000000000004},
                     {1981.0, 5.0, 71111.25, -9042.5}};
  std::ostringstream os;
  write_param_series_csv(os, ps);
  std::istringstream in(os.str());
  const auto back = read_param_series_csv(in);
  REQUIRE(back.size() == ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    REQUIRE(back[i].year == ps[i].year);
    REQUIRE(back[i].alpha == ps[i].alpha);
    REQUIRE(back[i].beta == ps[i].beta);
    REQUIRE(back[i].c == ps[i].c);
  }

  std::istringstream bad("year,alpha,beta\n1,2,3\n");
  REQUIRE_THROWS_AS(read_param_series_csv(bad), data_error);
  std::istringstream junk("year,alpha,beta,c\n1967,x,3,4\n");
  REQUIRE_THROWS_AS(read_param_series_csv(junk), data_error);
}

TEST_CASE("csv writers emit stable headers") {
  binned_density bd;
  bd.bins = {{0.0, 6000.0, 1.5e-6}, {6000.0, 12000.0, 9e-6}};
  std::ostringstream os;
  write_binned_density_csv(os, bd);
  REQUIRE(os.str().rfind("lower,upper,density\n", 0) == 0);

  std::ostringstream oc;
  write_density_curve_csv(oc, {1.0, 2.0}, {0.5, 0.25});
  REQUIRE(oc.str() == "x,pdf\n1,0.5\n2,0.25\n");

  std::ostringstream og;
  write_gini_profile_csv(og, {2.0}, {std::numeric_limits<double>::infinity()});
  REQUIRE(og.str() == "alpha,gini\n2,inf\n");
}

TEST_CASE("regression result json shape") {
  regression_result r;
  r.constants = {-0.133, 727800.0, -366.0, -2194.0};
  r.years = {1967.0, 1968.0};
  r.c_residuals = {1.0, -2.0};
  r.scale_residuals = {3.0, -4.0};
  r.objective = 30.0;
  const auto j = to_json(r);
  REQUIRE(j["constants"]["phi"] == -0.133);
  REQUIRE(j["residuals"].size() == 2);
  REQUIRE(j["residuals"][1]["scale_residual"] == -4.0);
  REQUIRE(j["objective"] == 30.0);
}
