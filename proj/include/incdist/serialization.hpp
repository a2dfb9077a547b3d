#pragma once

// JSON and CSV serialization of models, regression output and series.
// JSON uses insertion-ordered objects and CSV doubles use %.17g, so outputs
// are byte-stable across runs.

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "incdist/common.hpp"
#include "incdist/dimension_reduction.hpp"
#include "incdist/distributions.hpp"
#include "incdist/estimation.hpp"
#include "incdist/weighted_data.hpp"

namespace incdist {

using ordered_json = nlohmann::ordered_json;

// Shortest-unambiguous is locale-dependent-free and round-trips doubles.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

inline ordered_json to_json(const distribution& d) {
  ordered_json j;
  j["family"] = family_tag(d);
  ordered_json params = ordered_json::object();
  for (const auto& kv : named_params(d)) params[kv.first] = kv.second;
  j["params"] = params;
  if (const auto* css = std::get_if<css_dist>(&d)) {
    j["constants"] = {{"phi", css->constants.phi},
                      {"psi0", css->constants.psi0},
                      {"psi1", css->constants.psi1},
                      {"psi2", css->constants.psi2}};
  }
  return j;
}

inline distribution distribution_from_json(const ordered_json& j) {
  const std::string fam = j.at("family").get<std::string>();
  const auto& p = j.at("params");
  auto get = [&](const char* name) { return p.at(name).get<double>(); };
  if (fam == "shifted_inverse_gamma")
    return inverse_gamma_dist{get("alpha"), get("beta"), get("c")};
  if (fam == "css_inverse_gamma") {
    const auto& k = j.at("constants");
    return css_dist{get("alpha"),
                    get("year"),
                    css_constants{k.at("phi").get<double>(),
                                  k.at("psi0").get<double>(),
                                  k.at("psi1").get<double>(),
                                  k.at("psi2").get<double>()}};
  }
  if (fam == "shifted_davis")
    return davis_dist{get("alpha"), get("beta"), get("c")};
  if (fam == "shifted_gb2")
    return gb2_dist{get("alpha"), get("beta"), get("p"), get("q"), get("c")};
  if (fam == "shifted_dagum")
    return dagum_dist{get("alpha"), get("beta"), get("p"), get("c")};
  if (fam == "shifted_burr")
    return burr_dist{get("alpha"), get("beta"), get("q"), get("c")};
  if (fam == "shifted_fisk")
    return fisk_dist{get("alpha"), get("beta"), get("c")};
  if (fam == "lognormal_pareto_cutoff")
    return cutoff_dist{get("mu"), get("sigma_sq"), get("alpha"), get("k"),
                       get("c")};
  if (fam == "lognormal_pareto_mixture")
    return mixture_dist{get("mu"),  get("sigma_sq"), get("alpha"),
                        get("x_m"), get("lambda"),   get("c")};
  throw parameter_error("unknown family tag '" + fam + "'");
}

inline ordered_json to_json(const fitted_model& fm) {
  ordered_json j = to_json(fm.model);
  j["ks_stat"] = fm.ks_stat;
  j["log_likelihood"] = fm.log_likelihood;
  if (!fm.dataset_label.empty()) j["dataset"] = fm.dataset_label;
  j["diagnostics"] = {{"outer_evaluations", fm.diagnostics.outer_evaluations},
                      {"inner_failures", fm.diagnostics.inner_failures},
                      {"converged", fm.diagnostics.converged}};
  return j;
}

// ---------------------------------------------------------------------------
// Regression output
// ---------------------------------------------------------------------------

inline ordered_json to_json(const regression_result& r) {
  ordered_json j;
  j["constants"] = {{"phi", r.constants.phi},
                    {"psi0", r.constants.psi0},
                    {"psi1", r.constants.psi1},
                    {"psi2", r.constants.psi2}};
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < r.years.size(); ++i)
    rows.push_back({{"year", r.years[i]},
                    {"c_residual", r.c_residuals[i]},
                    {"scale_residual", r.scale_residuals[i]}});
  j["residuals"] = rows;
  j["objective"] = r.objective;
  return j;
}

// ---------------------------------------------------------------------------
// CSV writers and readers
// ---------------------------------------------------------------------------

inline void write_param_series_csv(std::ostream& os,
                                   const param_series& series) {
  os << "year,alpha,beta,c\n";
  for (const auto& r : series)
    os << format_double(r.year) << ',' << format_double(r.alpha) << ','
       << format_double(r.beta) << ',' << format_double(r.c) << '\n';
}

inline param_series read_param_series_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line))
    throw data_error("parameter series CSV: missing header");
  const auto header = detail::split_csv_line(line);
  if (header.size() != 4 || detail::trim_ws(header[0]) != "year" ||
      detail::trim_ws(header[1]) != "alpha" ||
      detail::trim_ws(header[2]) != "beta" ||
      detail::trim_ws(header[3]) != "c")
    throw data_error("parameter series CSV: header must be year,alpha,beta,c");
  param_series out;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    if (detail::trim_ws(line).empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 4)
      throw data_error("parameter series CSV: wrong field count on row " +
                       std::to_string(row));
    year_params r;
    double* slots[4] = {&r.year, &r.alpha, &r.beta, &r.c};
    for (int i = 0; i < 4; ++i) {
      if (!detail::parse_double(detail::trim_ws(fields[i]), *slots[i]))
        throw data_error("parameter series CSV: bad number on row " +
                         std::to_string(row));
    }
    out.push_back(r);
    ++row;
  }
  return out;
}

inline void write_binned_density_csv(std::ostream& os,
                                     const binned_density& bd) {
  os << "lower,upper,density\n";
  for (const auto& b : bd.bins)
    os << format_double(b.lower) << ',' << format_double(b.upper) << ','
       << format_double(b.density) << '\n';
}

// Model density sampled on explicit points (for overlay plots).
inline void write_density_curve_csv(std::ostream& os,
                                    const std::vector<double>& xs,
                                    const std::vector<double>& fs) {
  os << "x,pdf\n";
  for (std::size_t i = 0; i < xs.size(); ++i)
    os << format_double(xs[i]) << ',' << format_double(fs[i]) << '\n';
}

inline void write_gini_profile_csv(std::ostream& os,
                                   const std::vector<double>& alphas,
                                   const std::vector<double>& ginis) {
  os << "alpha,gini\n";
  for (std::size_t i = 0; i < alphas.size(); ++i)
    os << format_double(alphas[i]) << ',' << format_double(ginis[i]) << '\n';
}

}  // namespace incdist
