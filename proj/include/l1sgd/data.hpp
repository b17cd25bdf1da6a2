#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "l1sgd/sparse.hpp"

namespace l1sgd {

/// One training example as read from disk: raw features plus a +/-1 label.
struct labeled_example {
  sparse_vector features;
  int label;  // +1 or -1 after mapping
};

/// Training pattern after label reflection and optional augmentation:
/// every entry is label * original value, and when the augmentation
/// parameter rho > 0 a trailing coordinate label * rho is appended.
struct pattern {
  sparse_vector y;
  double sq_norm;  // |y|^2 = |x|^2 + rho^2, cached
};

/// Immutable training set. `dim` is the augmented dimension (the length of
/// any weight vector trained on it); `max_norm` is the largest pattern norm.
struct dataset {
  std::vector<pattern> patterns;
  std::int32_t dim = 0;
  std::int32_t feature_dim = 0;  // dim minus the augmentation coordinate
  double max_norm = 0.0;
  double rho = 0.0;

  [[nodiscard]] std::size_t size() const { return patterns.size(); }
};

struct parse_error : std::runtime_error {
  parse_error(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_number(line) {}
  std::size_t line_number;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline double parse_double(std::string_view tok, std::size_t line, const char* what) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && tok.front() == '+') ++first;  // from_chars rejects leading '+'
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw parse_error(line, std::string("cannot parse ") + what + " '" + std::string(tok) + "'");
  if (!std::isfinite(v))
    throw parse_error(line, std::string(what) + " '" + std::string(tok) + "' is not finite");
  return v;
}

// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace detail

/// Reads LIBSVM text (`<label> <idx>:<val> ...`, indices 1-based in the
/// file, stored 0-based). Labels may be any numeric values as long as at
/// most two distinct ones appear; the numerically smaller maps to -1 and
/// the larger to +1. Exact +1/-1 labels are kept as written.
inline std::vector<labeled_example> parse_libsvm(std::istream& in) {
  std::vector<labeled_example> examples;
  std::vector<double> raw_labels;
  std::set<double> distinct;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest = detail::trim(line);
    if (rest.empty()) continue;

    const auto next_token = [&rest]() {
      std::size_t cut = rest.find_first_of(" \t");
      std::string_view tok = rest.substr(0, cut);
      rest = cut == std::string_view::npos ? std::string_view{} : detail::trim(rest.substr(cut));
      return tok;
    };

    const double raw = detail::parse_double(next_token(), line_no, "label");
    labeled_example ex;
    ex.label = 0;  // assigned after the mapping pass
    std::int32_t prev_index = -1;
    while (!rest.empty()) {
      std::string_view tok = next_token();
      const std::size_t colon = tok.find(':');
      if (colon == std::string_view::npos || colon == 0 || colon + 1 == tok.size())
        throw parse_error(line_no, "malformed feature '" + std::string(tok) + "'");
      std::int64_t file_index = 0;
      {
        const char* first = tok.data();
        const char* last = tok.data() + colon;
        auto [ptr, ec] = std::from_chars(first, last, file_index);
        if (ec != std::errc{} || ptr != last || file_index < 1)
          throw parse_error(line_no, "bad feature index in '" + std::string(tok) + "'");
      }
      const double value = detail::parse_double(tok.substr(colon + 1), line_no, "feature value");
      const auto index = static_cast<std::int32_t>(file_index - 1);
      if (index <= prev_index)
        throw parse_error(line_no, "feature indices must be strictly increasing");
      prev_index = index;
      ex.features.entries.push_back({index, value});
    }
    examples.push_back(std::move(ex));
    raw_labels.push_back(raw);
    distinct.insert(raw);
    if (distinct.size() > 2) throw parse_error(line_no, "more than two distinct labels");
  }

  if (examples.empty()) return examples;

  const bool plus_minus_one =
      std::all_of(distinct.begin(), distinct.end(), [](double v) { return v == 1.0 || v == -1.0; });
  if (plus_minus_one) {
    for (std::size_t i = 0; i < examples.size(); ++i)
      examples[i].label = raw_labels[i] > 0 ? +1 : -1;
  } else if (distinct.size() == 2) {
    const double low = *distinct.begin();
    for (std::size_t i = 0; i < examples.size(); ++i)
      examples[i].label = raw_labels[i] == low ? -1 : +1;
  } else {
    throw std::invalid_argument("single non +/-1 label value; cannot infer a binary mapping");
  }
  return examples;
}

/// Writes examples back in LIBSVM text form (1-based indices, +1/-1 labels).
inline void write_libsvm(std::ostream& out, const std::vector<labeled_example>& examples) {
  for (const labeled_example& ex : examples) {
    out << (ex.label > 0 ? "+1" : "-1");
    for (const feature& e : ex.features.entries)
      out << ' ' << (e.index + 1) << ':' << detail::format_double(e.value);
    out << '\n';
  }
}

/// Multiplies every feature value by `factor` (labels untouched).
inline void scale_features(std::vector<labeled_example>& examples, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor))
    throw std::invalid_argument("scale factor must be finite and > 0");
  for (labeled_example& ex : examples)
    for (feature& e : ex.features.entries) e.value *= factor;
}

/// Builds the training set: multiplies each pattern by its label, appends
/// the augmentation coordinate label*rho when rho > 0, caches squared
/// norms and records the largest pattern norm.
inline dataset augment_reflect(const std::vector<labeled_example>& examples, double rho = 0.0) {
  if (examples.empty()) throw std::invalid_argument("dataset must contain at least one example");
  if (!(rho >= 0.0) || !std::isfinite(rho))
    throw std::invalid_argument("augmentation parameter rho must be finite and >= 0");

  std::int32_t feature_dim = 0;
  for (const labeled_example& ex : examples)
    feature_dim = std::max(feature_dim, ex.features.min_dim());

  dataset ds;
  ds.rho = rho;
  ds.feature_dim = feature_dim;
  ds.dim = feature_dim + (rho > 0.0 ? 1 : 0);
  ds.patterns.reserve(examples.size());

  double max_sq = 0.0;
  for (const labeled_example& ex : examples) {
    pattern p;
    p.y.entries.reserve(ex.features.nnz() + (rho > 0.0 ? 1 : 0));
    const auto sign = static_cast<double>(ex.label);
    double sq = 0.0;
    for (const feature& e : ex.features.entries) {
      p.y.entries.push_back({e.index, sign * e.value});
      sq += e.value * e.value;
    }
    if (rho > 0.0) {
      p.y.entries.push_back({feature_dim, sign * rho});
      sq += rho * rho;
    }
    p.sq_norm = sq;
    max_sq = std::max(max_sq, sq);
    ds.patterns.push_back(std::move(p));
  }
  ds.max_norm = std::sqrt(max_sq);
  return ds;
}

/// Copy of the dataset with patterns moved into `order`'s sequence. The
/// copies are allocated in visitation order, so a full-epoch scan of the
/// result walks memory forward instead of chasing the permutation; training
/// loops use this to apply a once-before-training permutation physically.
inline dataset reorder_patterns(const dataset& ds, std::span<const std::size_t> order) {
  if (order.size() != ds.size())
    throw std::invalid_argument("order must cover the dataset");
  dataset out;
  out.dim = ds.dim;
  out.feature_dim = ds.feature_dim;
  out.max_norm = ds.max_norm;
  out.rho = ds.rho;
  out.patterns.reserve(ds.size());
  for (std::size_t k : order) out.patterns.push_back(ds.patterns.at(k));
  return out;
}

}  // namespace l1sgd
