// Command-line front end: fit, compare, reduce, sample, gini, bins.
//
// Precedence for every option: command-line flag > --config JSON file >
// built-in default (with INCDIST_OUT_DIR supplying the default output
// directory).  The resolved configuration is echoed into every JSON output
// and all outputs are byte-stable for a fixed (inputs, flags, seed).
//
// Exit codes: 0 success, 1 runtime failure (machine-readable JSON on
// stdout), 2 usage/config error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <incdist/incdist.hpp>

namespace fs = std::filesystem;
using incdist::ordered_json;

namespace {

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Config plumbing: every option is registered once and knows how to load
// itself from the config file and dump itself into the resolved echo.
// ---------------------------------------------------------------------------

class config_map {
 public:
  template <typename T>
  CLI::Option* bind(CLI::App* cmd, const std::string& flag, T& var,
                    const std::string& desc) {
    CLI::Option* opt = cmd->add_option(flag, var, desc);
    add_entry(flag, opt, var);
    return opt;
  }

  CLI::Option* bind_flag(CLI::App* cmd, const std::string& flag, bool& var,
                         const std::string& desc) {
    CLI::Option* opt = cmd->add_flag(flag, var, desc);
    add_entry(flag, opt, var);
    return opt;
  }

  // Apply config-file values to options the command line left untouched.
  void apply(const ordered_json& cfg) {
    for (const auto& item : cfg.items()) {
      entry* e = find(item.key());
      if (e == nullptr)
        throw usage_error("config: unknown key '" + item.key() + "'");
      if (e->opt->count() == 0) {
        try {
          e->load(item.value());
        } catch (const std::exception&) {
          throw usage_error("config: bad value for key '" + item.key() + "'");
        }
      }
    }
  }

  ordered_json resolved() const {
    ordered_json out = ordered_json::object();
    for (const auto& e : entries_) out[e.key] = e.dump();
    return out;
  }

 private:
  struct entry {
    std::string key;
    CLI::Option* opt;
    std::function<void(const ordered_json&)> load;
    std::function<ordered_json()> dump;
  };

  template <typename T>
  void add_entry(const std::string& flag, CLI::Option* opt, T& var) {
    std::string key = flag;
    while (!key.empty() && key.front() == '-') key.erase(key.begin());
    entries_.push_back(entry{key, opt,
                             [&var](const ordered_json& v) { var = v.get<T>(); },
                             [&var]() -> ordered_json { return var; }});
  }

  entry* find(const std::string& key) {
    for (auto& e : entries_)
      if (e.key == key) return &e;
    return nullptr;
  }

  std::vector<entry> entries_;
};

// ---------------------------------------------------------------------------
// Shared option blocks
// ---------------------------------------------------------------------------

struct data_options {
  std::string path;
  std::string income_col = "income";
  std::string weight_col = "weight";
  std::uint64_t trim_lower = 0;
  std::uint64_t trim_upper = 0;
};

struct fit_flag_block {
  double c_lo = 0.0, c_hi = 0.0;
  bool bracket_set = false;
  double tol_c = 1.0;
  double tol_inner = 1e-8;
  int max_iter = 2000;
  int c_scan = 24;
  int c_grid = 200;
  int xm_grid = 50;
  int k_scan = 12;
  double css_year = 0.0;
  double phi = incdist::reference_css_constants().phi;
  double psi0 = incdist::reference_css_constants().psi0;
  double psi1 = incdist::reference_css_constants().psi1;
  double psi2 = incdist::reference_css_constants().psi2;
  CLI::Option* c_lo_opt = nullptr;
  CLI::Option* c_hi_opt = nullptr;
};

struct bin_flag_block {
  double boundary = 60000.0;
  double width = 6000.0;
  double ratio = 1.2;
};

void bind_data_options(config_map& cm, CLI::App* cmd, data_options& d,
                       const char* positional_desc) {
  cmd->add_option("data", d.path, positional_desc)->required();
  cm.bind(cmd, "--income-col", d.income_col, "income column name");
  cm.bind(cmd, "--weight-col", d.weight_col, "weight column name");
  cm.bind(cmd, "--trim-lower", d.trim_lower,
          "observations to drop from the bottom after removing $0 incomes");
  cm.bind(cmd, "--trim-upper", d.trim_upper,
          "observations to drop from the top");
}

void bind_fit_options(config_map& cm, CLI::App* cmd, fit_flag_block& f) {
  f.c_lo_opt = cm.bind(cmd, "--c-lo", f.c_lo, "shift bracket lower edge");
  f.c_hi_opt = cm.bind(cmd, "--c-hi", f.c_hi, "shift bracket upper edge");
  cm.bind(cmd, "--tol-c", f.tol_c, "absolute tolerance for shift search ($)");
  cm.bind(cmd, "--tol-inner", f.tol_inner, "inner-step relative tolerance");
  cm.bind(cmd, "--max-iter", f.max_iter, "iteration cap for inner solvers");
  cm.bind(cmd, "--c-scan", f.c_scan, "coarse scan points over the shift");
  cm.bind(cmd, "--c-grid", f.c_grid, "shift grid points (gb2/mixture)");
  cm.bind(cmd, "--xm-grid", f.xm_grid, "threshold grid points (mixture)");
  cm.bind(cmd, "--k-scan", f.k_scan, "switch-point scan points (cutoff)");
  cm.bind(cmd, "--css-year", f.css_year, "year for the reduced-model fit");
  cm.bind(cmd, "--phi", f.phi, "reduced-model phi");
  cm.bind(cmd, "--psi0", f.psi0, "reduced-model psi0");
  cm.bind(cmd, "--psi1", f.psi1, "reduced-model psi1");
  cm.bind(cmd, "--psi2", f.psi2, "reduced-model psi2");
}

void bind_bin_options(config_map& cm, CLI::App* cmd, bin_flag_block& b) {
  cm.bind(cmd, "--bin-boundary", b.boundary,
          "linear/logarithmic bin boundary ($)");
  cm.bind(cmd, "--bin-width", b.width, "linear bin width ($)");
  cm.bind(cmd, "--bin-ratio", b.ratio, "minimum logarithmic bin ratio");
}

incdist::fit_options make_fit_options(const fit_flag_block& f) {
  incdist::fit_options opt;
  const bool lo_set = f.c_lo_opt != nullptr && f.c_lo_opt->count() > 0;
  const bool hi_set = f.c_hi_opt != nullptr && f.c_hi_opt->count() > 0;
  if (lo_set != hi_set)
    throw usage_error("--c-lo and --c-hi must be given together");
  if (lo_set) opt.c_bracket = {f.c_lo, f.c_hi};
  opt.tolerance_c = f.tol_c;
  opt.tolerance_inner = f.tol_inner;
  opt.max_iterations = f.max_iter;
  opt.c_scan_points = f.c_scan;
  opt.c_grid_points = f.c_grid;
  opt.xm_grid_points = f.xm_grid;
  opt.k_scan_points = f.k_scan;
  opt.css_year = f.css_year;
  opt.css = incdist::css_constants{f.phi, f.psi0, f.psi1, f.psi2};
  return opt;
}

incdist::weighted_sample load_sample(const data_options& d) {
  auto raw = incdist::load_csv(d.path, d.income_col, d.weight_col);
  return incdist::clean(std::move(raw), d.trim_lower, d.trim_upper);
}

incdist::family_kind parse_family(const std::string& name) {
  const auto fam = incdist::family_from_string(name);
  if (!fam)
    throw usage_error("unknown family '" + name +
                      "' (expected one of: inverse-gamma, css, davis, gb2, "
                      "dagum, burr, fisk, cutoff, mixture)");
  return *fam;
}

// "alpha=3,beta=4e4,c=-8000" -> ordered name/value pairs
std::vector<std::pair<std::string, double>> parse_kv_list(
    const std::string& text) {
  std::vector<std::pair<std::string, double>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = incdist::detail::trim_ws(item);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw usage_error("bad parameter entry '" + item + "' (expected k=v)");
    const std::string key = incdist::detail::trim_ws(item.substr(0, eq));
    double value = 0.0;
    if (!incdist::detail::parse_double(
            incdist::detail::trim_ws(item.substr(eq + 1)), value))
      throw usage_error("bad numeric value in '" + item + "'");
    out.emplace_back(key, value);
  }
  if (out.empty()) throw usage_error("empty parameter list");
  return out;
}

incdist::distribution build_distribution(
    incdist::family_kind fam,
    const std::vector<std::pair<std::string, double>>& kvs,
    const incdist::css_constants& fallback_constants) {
  std::map<std::string, double> kv;
  for (const auto& [k, v] : kvs) {
    if (!kv.emplace(k, v).second)
      throw usage_error("duplicate parameter '" + k + "'");
  }
  auto take = [&](const char* name) {
    const auto it = kv.find(name);
    if (it == kv.end())
      throw usage_error(std::string("missing parameter '") + name + "'");
    const double v = it->second;
    kv.erase(it);
    return v;
  };
  auto take_or = [&](const char* name, double dflt) {
    const auto it = kv.find(name);
    if (it == kv.end()) return dflt;
    const double v = it->second;
    kv.erase(it);
    return v;
  };
  using namespace incdist;
  distribution d;
  switch (fam) {
    case family_kind::shifted_inverse_gamma:
      d = inverse_gamma_dist{take("alpha"), take("beta"), take("c")};
      break;
    case family_kind::css_inverse_gamma: {
      const double alpha = take("alpha");
      const double year = take("year");
      const css_constants k{take_or("phi", fallback_constants.phi),
                            take_or("psi0", fallback_constants.psi0),
                            take_or("psi1", fallback_constants.psi1),
                            take_or("psi2", fallback_constants.psi2)};
      d = css_dist{alpha, year, k};
      break;
    }
    case family_kind::shifted_davis:
      d = davis_dist{take("alpha"), take("beta"), take("c")};
      break;
    case family_kind::shifted_gb2:
      d = gb2_dist{take("alpha"), take("beta"), take("p"), take("q"),
                   take("c")};
      break;
    case family_kind::shifted_dagum:
      d = dagum_dist{take("alpha"), take("beta"), take("p"), take("c")};
      break;
    case family_kind::shifted_burr:
      d = burr_dist{take("alpha"), take("beta"), take("q"), take("c")};
      break;
    case family_kind::shifted_fisk:
      d = fisk_dist{take("alpha"), take("beta"), take("c")};
      break;
    case family_kind::lognormal_pareto_cutoff:
      d = cutoff_dist{take("mu"), take("sigma_sq"), take("alpha"), take("k"),
                      take("c")};
      break;
    case family_kind::lognormal_pareto_mixture:
      d = mixture_dist{take("mu"),  take("sigma_sq"), take("alpha"),
                       take("x_m"), take("lambda"),   take("c")};
      break;
  }
  if (!kv.empty())
    throw usage_error("unexpected parameter '" + kv.begin()->first + "'");
  try {
    validate(d);
  } catch (const std::exception& e) {
    throw usage_error(std::string("invalid parameters: ") + e.what());
  }
  return d;
}

void write_text_file(const fs::path& path, const std::string& body) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw incdist::data_error("cannot write '" + path.string() + "'");
  os << body;
}

void emit(const ordered_json& doc) { std::cout << doc.dump(2) << "\n"; }

// Model pdf on the sample-density grid (bin midpoints) plus a logarithmic
// tail extension past the last bin, for overlay plots.
std::pair<std::vector<double>, std::vector<double>> model_density_grid(
    const incdist::distribution& d, const incdist::binned_density& bd) {
  std::vector<double> xs, fs;
  for (const auto& b : bd.bins) xs.push_back(0.5 * (b.lower + b.upper));
  const double top = bd.bins.back().upper;
  constexpr int tail_points = 32;
  for (int i = 1; i <= tail_points; ++i)
    xs.push_back(top * std::pow(8.0, i / static_cast<double>(tail_points)));
  fs.reserve(xs.size());
  for (const double x : xs) fs.push_back(incdist::pdf(d, x));
  return {std::move(xs), std::move(fs)};
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct cli_state {
  // globals
  std::uint64_t seed = 1;
  std::string out_dir;
  std::string config_path;

  // one map per subcommand so shared flag names stay independent
  config_map cm_fit, cm_compare, cm_reduce, cm_sample, cm_gini, cm_bins;
  config_map* active = nullptr;

  // fit/compare
  data_options fit_data;
  std::string family_name;
  std::string families_csv = "all";
  std::string dataset_label;
  fit_flag_block fitopts;
  bin_flag_block binopts;

  // reduce
  data_options reduce_manifest;
  fit_flag_block reduce_fitopts;
  bool center_years = false;

  // sample
  std::string sample_family;
  std::string sample_params;
  std::uint64_t sample_n = 0;

  // gini
  double gini_phi = incdist::reference_css_constants().phi;
  double gini_alpha_lo = 0.6;
  double gini_alpha_hi = 12.0;
  int gini_points = 229;
  std::string gini_data;
  std::string gini_income_col = "income";
  std::string gini_weight_col = "weight";

  // bins
  data_options bins_data;
};

fs::path ensure_out_dir(const std::string& dir) {
  fs::path p = dir.empty() ? fs::path(".") : fs::path(dir);
  fs::create_directories(p);
  return p;
}

ordered_json base_doc(const std::string& command, const cli_state& st) {
  ordered_json doc;
  doc["command"] = command;
  ordered_json cfg = st.active->resolved();
  cfg["seed"] = st.seed;
  cfg["out-dir"] = st.out_dir;
  doc["config"] = cfg;
  return doc;
}

int cmd_fit(cli_state& st) {
  const auto fam = parse_family(st.family_name);
  const auto opt = make_fit_options(st.fitopts);
  auto s = load_sample(st.fit_data);

  incdist::fitted_model fm;
  if (fam == incdist::family_kind::css_inverse_gamma)
    fm = incdist::fit_css(s, opt.css_year, opt.css, opt);
  else
    fm = incdist::fit(fam, s, opt);
  fm.dataset_label = st.dataset_label.empty()
                         ? fs::path(st.fit_data.path).stem().string()
                         : st.dataset_label;

  const auto bd =
      incdist::bin_density(s, st.binopts.boundary, st.binopts.width,
                           st.binopts.ratio);
  const auto [xs, fs_vals] = model_density_grid(fm.model, bd);

  const fs::path out = ensure_out_dir(st.out_dir);
  const std::string stem = fs::path(st.fit_data.path).stem().string() + "." +
                           incdist::to_string(fam);
  const fs::path model_path = out / (stem + ".model.json");
  const fs::path sample_density_path = out / (stem + ".sample_density.csv");
  const fs::path model_density_path = out / (stem + ".model_density.csv");

  ordered_json doc = base_doc("fit", st);
  doc["result"] = incdist::to_json(fm);
  doc["outputs"] = {{"model_json", model_path.string()},
                    {"sample_density_csv", sample_density_path.string()},
                    {"model_density_csv", model_density_path.string()}};

  write_text_file(model_path, doc.dump(2) + "\n");
  {
    std::ostringstream os;
    incdist::write_binned_density_csv(os, bd);
    write_text_file(sample_density_path, os.str());
  }
  {
    std::ostringstream os;
    incdist::write_density_curve_csv(os, xs, fs_vals);
    write_text_file(model_density_path, os.str());
  }
  emit(doc);
  return 0;
}

int cmd_compare(cli_state& st) {
  std::vector<incdist::family_kind> fams;
  if (st.families_csv == "all") {
    fams = incdist::all_families();
  } else {
    std::stringstream ss(st.families_csv);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!incdist::detail::trim_ws(item).empty())
        fams.push_back(parse_family(incdist::detail::trim_ws(item)));
    if (fams.empty()) throw usage_error("empty family list");
  }
  const auto opt = make_fit_options(st.fitopts);
  auto s = load_sample(st.fit_data);

  ordered_json rows = ordered_json::array();
  int ok_count = 0;
  for (const auto fam : fams) {
    ordered_json row;
    row["family"] = incdist::to_string(fam);
    try {
      incdist::fitted_model fm;
      if (fam == incdist::family_kind::css_inverse_gamma)
        fm = incdist::fit_css(s, opt.css_year, opt.css, opt);
      else
        fm = incdist::fit(fam, s, opt);
      row["ok"] = true;
      ordered_json params = ordered_json::object();
      for (const auto& kv : incdist::named_params(fm.model))
        params[kv.first] = kv.second;
      row["params"] = params;
      row["ks_stat"] = fm.ks_stat;
      row["log_likelihood"] = fm.log_likelihood;
      ++ok_count;
    } catch (const std::exception& e) {
      row["ok"] = false;
      row["error"] = e.what();
    }
    rows.push_back(row);
  }

  const fs::path out = ensure_out_dir(st.out_dir);
  const fs::path path =
      out / (fs::path(st.fit_data.path).stem().string() + ".compare.json");
  ordered_json doc = base_doc("compare", st);
  doc["result"] = {{"rows", rows}};
  doc["outputs"] = {{"compare_json", path.string()}};
  write_text_file(path, doc.dump(2) + "\n");
  emit(doc);
  if (ok_count == 0) throw incdist::fit_error("every family failed to fit");
  return 0;
}

int cmd_reduce(cli_state& st) {
  // Manifest: CSV with header year,path; paths resolve relative to the
  // manifest location.
  std::ifstream in(st.reduce_manifest.path);
  if (!in)
    throw incdist::data_error("cannot open '" + st.reduce_manifest.path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw incdist::data_error("manifest: missing header");
  {
    const auto header = incdist::detail::split_csv_line(line);
    if (header.size() != 2 ||
        incdist::detail::trim_ws(header[0]) != "year" ||
        incdist::detail::trim_ws(header[1]) != "path")
      throw incdist::data_error("manifest: header must be year,path");
  }
  const fs::path base = fs::path(st.reduce_manifest.path).parent_path();
  std::vector<double> years;
  std::vector<incdist::weighted_sample> samples;
  while (std::getline(in, line)) {
    if (incdist::detail::trim_ws(line).empty()) continue;
    const auto fields = incdist::detail::split_csv_line(line);
    if (fields.size() != 2)
      throw incdist::data_error("manifest: expected year,path rows");
    double year = 0.0;
    if (!incdist::detail::parse_double(incdist::detail::trim_ws(fields[0]),
                                       year))
      throw incdist::data_error("manifest: bad year '" + fields[0] + "'");
    fs::path p(incdist::detail::trim_ws(fields[1]));
    if (p.is_relative()) p = base / p;
    data_options d = st.reduce_manifest;
    d.path = p.string();
    years.push_back(year);
    samples.push_back(load_sample(d));
  }
  const auto opt = make_fit_options(st.reduce_fitopts);
  const auto report =
      incdist::reduction_pipeline(years, samples, opt, st.center_years);

  const fs::path out = ensure_out_dir(st.out_dir);
  const std::string stem = fs::path(st.reduce_manifest.path).stem().string();
  const fs::path constants_path = out / (stem + ".constants.json");
  const fs::path series_path = out / (stem + ".series.csv");
  const fs::path normalized_path = out / (stem + ".normalized.csv");
  const fs::path diff_path = out / (stem + ".normalized_diff.csv");
  const fs::path quot_path = out / (stem + ".normalized_quot.csv");
  const fs::path css_path = out / (stem + ".css_alpha.csv");

  ordered_json doc = base_doc("reduce", st);
  ordered_json result = incdist::to_json(report.regression);
  ordered_json yrows = ordered_json::array();
  for (std::size_t i = 0; i < report.fits.size(); ++i) {
    const auto& yf = report.fits[i];
    const auto& p3 = report.series[i];
    const auto& css = std::get<incdist::css_dist>(yf.one_param.model);
    yrows.push_back({{"year", yf.year},
                     {"alpha", p3.alpha},
                     {"beta", p3.beta},
                     {"c", p3.c},
                     {"ks_three_param", yf.three_param.ks_stat},
                     {"css_alpha", css.alpha},
                     {"ks_one_param", yf.one_param.ks_stat}});
  }
  result["years"] = yrows;
  ordered_json failed = ordered_json::array();
  for (const auto& [year, what] : report.failed_years)
    failed.push_back({{"year", year}, {"error", what}});
  result["failed_years"] = failed;
  doc["result"] = result;
  doc["outputs"] = {{"constants_json", constants_path.string()},
                    {"series_csv", series_path.string()},
                    {"normalized_csv", normalized_path.string()},
                    {"normalized_diff_csv", diff_path.string()},
                    {"normalized_quot_csv", quot_path.string()},
                    {"css_alpha_csv", css_path.string()}};

  write_text_file(constants_path, doc.dump(2) + "\n");
  {
    std::ostringstream os;
    incdist::write_param_series_csv(os, report.series);
    write_text_file(series_path, os.str());
  }
  {
    const auto ns = incdist::normalize_series(report.series);
    std::ostringstream os, od, oq;
    os << "year,alpha,beta,c\n";
    od << "year,alpha_minus_beta,alpha_minus_c,beta_minus_c\n";
    oq << "year,alpha_over_beta,alpha_over_c,beta_over_c\n";
    for (std::size_t i = 0; i < ns.year.size(); ++i) {
      using incdist::format_double;
      os << format_double(ns.year[i]) << ',' << format_double(ns.alpha[i])
         << ',' << format_double(ns.beta[i]) << ',' << format_double(ns.c[i])
         << '\n';
      od << format_double(ns.year[i]) << ','
         << format_double(ns.alpha[i] - ns.beta[i]) << ','
         << format_double(ns.alpha[i] - ns.c[i]) << ','
         << format_double(ns.beta[i] - ns.c[i]) << '\n';
      oq << format_double(ns.year[i]) << ','
         << format_double(ns.alpha[i] / ns.beta[i]) << ','
         << format_double(ns.alpha[i] / ns.c[i]) << ','
         << format_double(ns.beta[i] / ns.c[i]) << '\n';
    }
    write_text_file(normalized_path, os.str());
    write_text_file(diff_path, od.str());
    write_text_file(quot_path, oq.str());
  }
  {
    std::ostringstream os;
    os << "year,css_alpha,ks_three_param,ks_one_param\n";
    for (std::size_t i = 0; i < report.fits.size(); ++i) {
      const auto& yf = report.fits[i];
      const auto& css = std::get<incdist::css_dist>(yf.one_param.model);
      using incdist::format_double;
      os << format_double(yf.year) << ',' << format_double(css.alpha) << ','
         << format_double(yf.three_param.ks_stat) << ','
         << format_double(yf.one_param.ks_stat) << '\n';
    }
    write_text_file(css_path, os.str());
  }
  emit(doc);
  return 0;
}

int cmd_sample(cli_state& st) {
  if (st.sample_n == 0) throw usage_error("-n must be at least 1");
  const auto fam = parse_family(st.sample_family);
  const auto kvs = parse_kv_list(st.sample_params);
  const auto d = build_distribution(
      fam, kvs,
      incdist::css_constants{st.fitopts.phi, st.fitopts.psi0, st.fitopts.psi1,
                             st.fitopts.psi2});

  const auto xs =
      incdist::sample(d, static_cast<std::size_t>(st.sample_n), st.seed);
  const fs::path out = ensure_out_dir(st.out_dir);
  const fs::path path =
      out / ("sample." + std::string(incdist::to_string(fam)) + ".n" +
             std::to_string(st.sample_n) + ".seed" + std::to_string(st.seed) +
             ".csv");
  {
    std::ostringstream os;
    os << "income,weight\n";
    for (const double x : xs) os << incdist::format_double(x) << ",1\n";
    write_text_file(path, os.str());
  }
  ordered_json doc = base_doc("sample", st);
  ordered_json params = ordered_json::object();
  for (const auto& kv : incdist::named_params(d)) params[kv.first] = kv.second;
  doc["result"] = {{"family", incdist::family_tag(d)},
                   {"params", params},
                   {"n", st.sample_n},
                   {"seed", st.seed}};
  doc["outputs"] = {{"csv", path.string()}};
  emit(doc);
  return 0;
}

int cmd_gini(cli_state& st, bool data_mode) {
  ordered_json doc = base_doc("gini", st);
  if (data_mode) {
    data_options d;
    d.path = st.gini_data;
    d.income_col = st.gini_income_col;
    d.weight_col = st.gini_weight_col;
    auto s = load_sample(d);
    doc["result"] = {{"mode", "empirical"},
                     {"gini", incdist::gini_empirical(s)}};
    doc["outputs"] = ordered_json::object();
    emit(doc);
    return 0;
  }
  const auto profile = incdist::gini_grid(st.gini_phi, st.gini_alpha_lo,
                                          st.gini_alpha_hi, st.gini_points);
  const fs::path out = ensure_out_dir(st.out_dir);
  const fs::path path = out / "gini_profile.csv";
  {
    std::vector<double> alphas, ginis;
    for (const auto& row : profile.rows) {
      alphas.push_back(row.alpha);
      ginis.push_back(row.gini);
    }
    std::ostringstream os;
    incdist::write_gini_profile_csv(os, alphas, ginis);
    write_text_file(path, os.str());
  }
  ordered_json result;
  result["mode"] = "profile";
  result["phi"] = st.gini_phi;
  if (profile.singularity)
    result["singularity"] = *profile.singularity;
  else
    result["singularity"] = nullptr;
  result["stationary_points"] = profile.stationary_points;
  doc["result"] = result;
  doc["outputs"] = {{"csv", path.string()}};
  emit(doc);
  return 0;
}

int cmd_bins(cli_state& st) {
  auto s = load_sample(st.bins_data);
  const auto bd = incdist::bin_density(s, st.binopts.boundary,
                                       st.binopts.width, st.binopts.ratio);
  const fs::path out = ensure_out_dir(st.out_dir);
  const fs::path path =
      out / (fs::path(st.bins_data.path).stem().string() + ".bins.csv");
  {
    std::ostringstream os;
    incdist::write_binned_density_csv(os, bd);
    write_text_file(path, os.str());
  }
  double mass = 0.0;
  for (const auto& b : bd.bins) mass += b.density * (b.upper - b.lower);
  ordered_json doc = base_doc("bins", st);
  doc["result"] = {{"bin_count", bd.bins.size()}, {"total_mass", mass}};
  doc["outputs"] = {{"csv", path.string()}};
  emit(doc);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  cli_state st;
  const char* env_dir = std::getenv("INCDIST_OUT_DIR");
  st.out_dir = (env_dir != nullptr && *env_dir != '\0') ? env_dir : ".";

  CLI::App app{"income distribution fitting and reduction toolkit"};
  app.require_subcommand(1);
  auto* seed_opt = app.add_option("--seed", st.seed, "random seed");
  auto* dir_opt =
      app.add_option("--out-dir", st.out_dir, "output directory");
  app.add_option("--config", st.config_path,
                 "JSON config file (flags take precedence)");

  auto* fit = app.add_subcommand("fit", "fit one family to weighted data");
  bind_data_options(st.cm_fit, fit, st.fit_data, "input CSV (income,weight)");
  fit->add_option("--family", st.family_name, "family to fit")->required();
  st.cm_fit.bind(fit, "--label", st.dataset_label,
                 "dataset label for outputs");
  bind_fit_options(st.cm_fit, fit, st.fitopts);
  bind_bin_options(st.cm_fit, fit, st.binopts);

  auto* compare =
      app.add_subcommand("compare", "fit several families side by side");
  bind_data_options(st.cm_compare, compare, st.fit_data,
                    "input CSV (income,weight)");
  st.cm_compare.bind(compare, "--families", st.families_csv,
                     "comma list of families, or 'all'");
  bind_fit_options(st.cm_compare, compare, st.fitopts);

  auto* reduce = app.add_subcommand(
      "reduce", "per-year fits, constants regression, reduced refit");
  bind_data_options(st.cm_reduce, reduce, st.reduce_manifest,
                    "manifest CSV (year,path)");
  bind_fit_options(st.cm_reduce, reduce, st.reduce_fitopts);
  st.cm_reduce.bind_flag(reduce, "--center-years", st.center_years,
                         "center the year column inside the regression");

  auto* smp = app.add_subcommand("sample", "draw synthetic incomes");
  smp->add_option("--family", st.sample_family, "family to sample")
      ->required();
  smp->add_option("--params", st.sample_params,
                  "comma list of name=value parameters")
      ->required();
  smp->add_option("-n,--n", st.sample_n, "number of draws")->required();
  st.cm_sample.bind(smp, "--phi", st.fitopts.phi, "reduced-model phi fallback");
  st.cm_sample.bind(smp, "--psi0", st.fitopts.psi0,
                    "reduced-model psi0 fallback");
  st.cm_sample.bind(smp, "--psi1", st.fitopts.psi1,
                    "reduced-model psi1 fallback");
  st.cm_sample.bind(smp, "--psi2", st.fitopts.psi2,
                    "reduced-model psi2 fallback");

  auto* gini = app.add_subcommand(
      "gini", "closed-form profile over alpha, or empirical value on data");
  st.cm_gini.bind(gini, "--phi", st.gini_phi, "reduced-model phi");
  st.cm_gini.bind(gini, "--alpha-lo", st.gini_alpha_lo, "grid lower edge");
  st.cm_gini.bind(gini, "--alpha-hi", st.gini_alpha_hi, "grid upper edge");
  st.cm_gini.bind(gini, "--points", st.gini_points, "grid size");
  auto* gini_data_opt = st.cm_gini.bind(gini, "--data", st.gini_data,
                                        "weighted CSV for empirical");
  st.cm_gini.bind(gini, "--income-col", st.gini_income_col,
                  "income column name");
  st.cm_gini.bind(gini, "--weight-col", st.gini_weight_col,
                  "weight column name");

  auto* bins = app.add_subcommand("bins", "binned sample density");
  bind_data_options(st.cm_bins, bins, st.bins_data,
                    "input CSV (income,weight)");
  bind_bin_options(st.cm_bins, bins, st.binopts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (fit->parsed())
    st.active = &st.cm_fit;
  else if (compare->parsed())
    st.active = &st.cm_compare;
  else if (reduce->parsed())
    st.active = &st.cm_reduce;
  else if (smp->parsed())
    st.active = &st.cm_sample;
  else if (gini->parsed())
    st.active = &st.cm_gini;
  else
    st.active = &st.cm_bins;

  try {
    if (!st.config_path.empty()) {
      std::ifstream in(st.config_path);
      if (!in) throw usage_error("cannot open config '" + st.config_path + "'");
      ordered_json cfg;
      try {
        cfg = ordered_json::parse(in);
      } catch (const std::exception& e) {
        throw usage_error(std::string("config: invalid JSON: ") + e.what());
      }
      if (!cfg.is_object()) throw usage_error("config: expected an object");
      // Globals first, then the running command's options.
      if (cfg.contains("seed")) {
        if (seed_opt->count() == 0) st.seed = cfg["seed"].get<std::uint64_t>();
        cfg.erase("seed");
      }
      if (cfg.contains("out-dir")) {
        if (dir_opt->count() == 0)
          st.out_dir = cfg["out-dir"].get<std::string>();
        cfg.erase("out-dir");
      }
      st.active->apply(cfg);
    }

    if (fit->parsed()) return cmd_fit(st);
    if (compare->parsed()) return cmd_compare(st);
    if (reduce->parsed()) return cmd_reduce(st);
    if (smp->parsed()) return cmd_sample(st);
    if (gini->parsed()) return cmd_gini(st, gini_data_opt->count() > 0 ||
                                                !st.gini_data.empty());
    if (bins->parsed()) return cmd_bins(st);
    throw usage_error("no command given");
  } catch (const usage_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    ordered_json err;
    err["error"] = {{"message", e.what()}};
    std::cout << err.dump(2) << "\n";
    return 1;
  }
}
