#pragma once

// Survey-weighted income microdata: CSV ingestion, cleaning (zero-income
// drop, optional trimming, weight normalization), the weighted empirical CDF,
// and the linear/logarithmic binned sample density.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "incdist/common.hpp"

namespace incdist {

struct observation {
  double income;  // dollars; may be negative, zero only before cleaning
  double weight;  // strictly positive survey weight
};

// ---------------------------------------------------------------------------
// WeightedSample: sorted incomes with weights normalized to sum to n
// ---------------------------------------------------------------------------

class weighted_sample {
 public:
  weighted_sample(std::vector<double> incomes, std::vector<double> weights) {
    if (incomes.size() != weights.size())
      throw data_error("weighted_sample: income/weight length mismatch");
    if (incomes.empty()) throw data_error("weighted_sample: empty sample");
    const std::size_t m = incomes.size();
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (!std::isfinite(incomes[i]))
        throw data_error("weighted_sample: non-finite income");
      if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
        throw data_error("weighted_sample: weights must be positive");
      total += weights[i];
    }
    // Stable sort by income, keeping ties in input order.
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return incomes[a] < incomes[b];
    });
    incomes_.resize(m);
    weights_.resize(m);
    const double scale = static_cast<double>(m) / total;
    for (std::size_t i = 0; i < m; ++i) {
      incomes_[i] = incomes[order[i]];
      weights_[i] = weights[order[i]] * scale;
    }
    cum_weights_.resize(m);
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      acc += weights_[i];
      cum_weights_[i] = acc;
    }
  }

  std::size_t size() const { return incomes_.size(); }
  double n() const { return static_cast<double>(incomes_.size()); }
  const std::vector<double>& incomes() const { return incomes_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& cumulative_weights() const { return cum_weights_; }
  double min_income() const { return incomes_.front(); }
  double max_income() const { return incomes_.back(); }

  // Right-continuous weighted ECDF: (sum of weights with income <= x) / n.
  double ecdf(double x) const {
    const auto it = std::upper_bound(incomes_.begin(), incomes_.end(), x);
    if (it == incomes_.begin()) return 0.0;
    return cum_weights_[static_cast<std::size_t>(it - incomes_.begin()) - 1] / n();
  }

  // Left limit of the ECDF at x: (sum of weights with income < x) / n.
  double ecdf_left(double x) const {
    const auto it = std::lower_bound(incomes_.begin(), incomes_.end(), x);
    if (it == incomes_.begin()) return 0.0;
    return cum_weights_[static_cast<std::size_t>(it - incomes_.begin()) - 1] / n();
  }

  // Smallest income whose ECDF reaches p.
  double quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::domain_error("weighted quantile: p in [0, 1]");
    const double target = p * n();
    const auto it =
        std::lower_bound(cum_weights_.begin(), cum_weights_.end(),
                         target - 1e-12 * n());
    if (it == cum_weights_.end()) return incomes_.back();
    return incomes_[static_cast<std::size_t>(it - cum_weights_.begin())];
  }

 private:
  std::vector<double> incomes_;      // ascending
  std::vector<double> weights_;      // normalized: sum equals size()
  std::vector<double> cum_weights_;  // inclusive prefix sums of weights_
};

// ---------------------------------------------------------------------------
// Cleaning
// ---------------------------------------------------------------------------

// Drop $0 incomes, trim the lowest/highest observations (stable order for
// ties), and renormalize weights to sum to the remaining count.
inline weighted_sample clean(std::vector<observation> raw,
                             std::size_t trim_lower_count = 0,
                             std::size_t trim_upper_count = 0) {
  std::erase_if(raw, [](const observation& o) { return o.income == 0.0; });
  if (raw.empty()) throw data_error("clean: empty sample after removing zeros");
  if (trim_lower_count + trim_upper_count >= raw.size())
    throw parameter_error("clean: trim counts must leave a nonempty sample");
  std::stable_sort(raw.begin(), raw.end(),
                   [](const observation& a, const observation& b) {
                     return a.income < b.income;
                   });
  raw.erase(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(trim_lower_count));
  raw.erase(raw.end() - static_cast<std::ptrdiff_t>(trim_upper_count), raw.end());
  std::vector<double> incomes, weights;
  incomes.reserve(raw.size());
  weights.reserve(raw.size());
  for (const observation& o : raw) {
    incomes.push_back(o.income);
    weights.push_back(o.weight);
  }
  return weighted_sample(std::move(incomes), std::move(weights));
}

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(current);
      current.clear();
    } else if (ch != '\r') {
      current += ch;
    }
  }
  fields.push_back(current);
  return fields;
}

inline std::string trim_ws(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline bool parse_double(const std::string& field, double& out) {
  const std::string t = trim_ws(field);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && std::isfinite(out);
}

}  // namespace detail

// Read raw observations from a CSV stream with a header row.  Rows are
// numbered from 1 (first data row).  No cleaning is applied.
inline std::vector<observation> load_csv(std::istream& in,
                                         const std::string& income_column = "income",
                                         const std::string& weight_column = "weight") {
  std::string line;
  if (!std::getline(in, line)) throw data_error("load_csv: empty file");
  const auto header = detail::split_csv_line(line);
  std::ptrdiff_t income_idx = -1, weight_idx = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = detail::trim_ws(header[i]);
    if (name == income_column) income_idx = static_cast<std::ptrdiff_t>(i);
    if (name == weight_column) weight_idx = static_cast<std::ptrdiff_t>(i);
  }
  if (income_idx < 0)
    throw data_error("load_csv: missing column '" + income_column + "'");
  if (weight_idx < 0)
    throw data_error("load_csv: missing column '" + weight_column + "'");

  std::vector<observation> out;
  std::size_t row = 1;  // header is row 1; messages use file line numbers
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    const auto need = static_cast<std::size_t>(std::max(income_idx, weight_idx));
    if (fields.size() <= need)
      throw data_error("load_csv: too few fields on row " + std::to_string(row));
    observation o{};
    if (!detail::parse_double(fields[static_cast<std::size_t>(income_idx)], o.income))
      throw data_error("load_csv: bad income on row " + std::to_string(row));
    if (!detail::parse_double(fields[static_cast<std::size_t>(weight_idx)], o.weight))
      throw data_error("load_csv: bad weight on row " + std::to_string(row));
    if (!(o.weight > 0.0))
      throw data_error("load_csv: nonpositive weight on row " + std::to_string(row));
    out.push_back(o);
  }
  return out;
}

inline std::vector<observation> load_csv(const std::string& path,
                                         const std::string& income_column = "income",
                                         const std::string& weight_column = "weight") {
  std::ifstream in(path);
  if (!in) throw data_error("load_csv: cannot open '" + path + "'");
  return load_csv(in, income_column, weight_column);
}

// ---------------------------------------------------------------------------
// Binned sample density
// ---------------------------------------------------------------------------

struct density_bin {
  double lower, upper;  // [lower, upper); the topmost bin is closed
  double density;       // weight fraction divided by bin width
};

struct binned_density {
  std::vector<density_bin> bins;
  double linear_boundary;  // linear bins below, logarithmic above
  double linear_width;
  double log_ratio;        // requested minimum endpoint ratio
};

// Bin edges: width-`linear_width` bins anchored at multiples of the width
// (extending below zero if needed) up to `linear_boundary`, then equal-ratio
// logarithmic bins with ratio at least `log_ratio` reaching the maximum.
inline binned_density bin_density(const weighted_sample& sample,
                                  double linear_boundary = 60000.0,
                                  double linear_width = 6000.0,
                                  double log_ratio = 1.2) {
  if (!(linear_width > 0.0)) throw parameter_error("bin_density: width > 0");
  if (!(log_ratio > 1.0)) throw parameter_error("bin_density: log ratio > 1");
  if (!(linear_boundary > 0.0))
    throw parameter_error("bin_density: linear boundary > 0");

  const double lo = sample.min_income();
  const double hi = sample.max_income();

  std::vector<double> edges;
  const double start = std::floor(lo / linear_width) * linear_width;
  const double linear_end =
      (hi <= linear_boundary)
          ? (std::floor(hi / linear_width) + 1.0) * linear_width
          : linear_boundary;
  for (double e = start; e < linear_end - 0.5 * linear_width; e += linear_width)
    edges.push_back(e);
  edges.push_back(linear_end);

  if (hi > linear_boundary) {
    // Finest equal-ratio partition with each endpoint ratio >= log_ratio.
    const double span = std::log(hi / linear_boundary);
    const int count =
        std::max(1, static_cast<int>(std::floor(span / std::log(log_ratio))));
    for (int i = 1; i <= count; ++i)
      edges.push_back(linear_boundary *
                      std::exp(span * static_cast<double>(i) / count));
    edges.back() = hi;  // close the top edge exactly on the maximum
  }

  binned_density out;
  out.linear_boundary = linear_boundary;
  out.linear_width = linear_width;
  out.log_ratio = log_ratio;

  const auto& incomes = sample.incomes();
  const auto& cum = sample.cumulative_weights();
  const double n = sample.n();
  auto weight_below = [&](double x) {
    // Sum of weights with income < x.
    const auto it = std::lower_bound(incomes.begin(), incomes.end(), x);
    if (it == incomes.begin()) return 0.0;
    return cum[static_cast<std::size_t>(it - incomes.begin()) - 1];
  };

  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = edges[i], b = edges[i + 1];
    const bool top = (i + 2 == edges.size());
    const double mass =
        (top ? cum.back() : weight_below(b)) - weight_below(a);
    out.bins.push_back({a, b, mass / (n * (b - a))});
  }
  return out;
}

}  // namespace incdist
