#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "l1sgd/data.hpp"
#include "l1sgd/model.hpp"

namespace l1sgd {

/// Trained classifier as stored on disk: the materialized weight vector over
/// the augmented feature space plus the run parameters needed to interpret
/// and reproduce it. Weights are written in shortest round-trip decimal, so
/// save -> load -> save is byte-identical.
struct model_file {
  std::int32_t dim = 0;  // augmented dimension, = feature count + (rho > 0 ? 1 : 0)
  double rho = 0.0;
  double cost = 0.0;
  double lambda = 0.0;
  variant schedule = variant::single;
  std::uint64_t seed = 0;
  std::int64_t epochs_eff = 0;
  std::int64_t margin_errors = 0;
  std::int64_t steps = 0;
  std::vector<double> weights;

  std::int32_t feature_dim() const { return dim - (rho > 0.0 ? 1 : 0); }
};

inline model_file make_model_file(const dataset& ds, const hyperparams& hp,
                                  const model_state& st) {
  model_file mf;
  mf.dim = ds.dim;
  mf.rho = ds.rho;
  mf.cost = hp.cost;
  mf.lambda = hp.lambda;
  mf.schedule = hp.schedule;
  mf.seed = hp.seed;
  mf.epochs_eff = st.epochs_eff;
  mf.margin_errors = st.margin_errors;
  mf.steps = st.steps;
  mf.weights = weight_vector(st, hp.lambda);
  return mf;
}

inline void save_model(std::ostream& out, const model_file& mf) {
  if (mf.weights.size() != static_cast<std::size_t>(mf.dim))
    throw std::invalid_argument("model weight count does not match its dimension");
  out << "l1sgd-model 1\n";
  out << "dim " << mf.dim << '\n';
  out << "rho " << detail::format_double(mf.rho) << '\n';
  out << "C " << detail::format_double(mf.cost) << '\n';
  out << "lambda " << detail::format_double(mf.lambda) << '\n';
  out << "variant " << variant_code(mf.schedule) << '\n';
  out << "seed " << mf.seed << '\n';
  out << "epochs_eff " << mf.epochs_eff << '\n';
  out << "margin_errors " << mf.margin_errors << '\n';
  out << "steps " << mf.steps << '\n';
  for (double w : mf.weights) out << detail::format_double(w) << '\n';
}

namespace detail {

inline std::string_view header_value(const std::string& line, std::string_view key) {
  if (line.size() <= key.size() || line.compare(0, key.size(), key) != 0 ||
      line[key.size()] != ' ')
    throw std::runtime_error("model file: expected '" + std::string(key) + " <value>' line");
  return std::string_view(line).substr(key.size() + 1);
}

template <typename T>
T header_number(const std::string& line, std::string_view key) {
  const std::string_view v = header_value(line, key);
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw std::runtime_error("model file: bad value for '" + std::string(key) + "'");
  return out;
}

inline std::string next_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(std::string("model file: missing ") + what);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace detail

inline model_file load_model(std::istream& in) {
  using detail::header_number;
  using detail::next_line;
  if (next_line(in, "magic line") != "l1sgd-model 1")
    throw std::runtime_error("model file: unrecognized format (expected 'l1sgd-model 1')");
  model_file mf;
  mf.dim = header_number<std::int32_t>(next_line(in, "dim"), "dim");
  if (mf.dim < 1) throw std::runtime_error("model file: dim must be >= 1");
  mf.rho = header_number<double>(next_line(in, "rho"), "rho");
  mf.cost = header_number<double>(next_line(in, "C"), "C");
  mf.lambda = header_number<double>(next_line(in, "lambda"), "lambda");
  const std::string_view var = detail::header_value(next_line(in, "variant"), "variant");
  if (var.size() != 1) throw std::runtime_error("model file: bad variant");
  mf.schedule = variant_from_code(var[0]);
  mf.seed = header_number<std::uint64_t>(next_line(in, "seed"), "seed");
  mf.epochs_eff = header_number<std::int64_t>(next_line(in, "epochs_eff"), "epochs_eff");
  mf.margin_errors = header_number<std::int64_t>(next_line(in, "margin_errors"), "margin_errors");
  mf.steps = header_number<std::int64_t>(next_line(in, "steps"), "steps");
  mf.weights.reserve(static_cast<std::size_t>(mf.dim));
  for (std::int32_t i = 0; i < mf.dim; ++i) {
    const std::string line = next_line(in, "weight coordinate");
    double w = 0.0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), w);
    if (ec != std::errc{} || ptr != line.data() + line.size())
      throw std::runtime_error("model file: bad weight on coordinate " + std::to_string(i));
    mf.weights.push_back(w);
  }
  return mf;
}

/// w . [x, rho] over an un-reflected example: the stored weights cover the
/// augmented space, so the augmentation coordinate contributes rho times the
/// last weight.
inline double decision_value(const model_file& mf, const sparse_vector& x) {
  if (x.min_dim() > mf.feature_dim())
    throw std::invalid_argument("example has " + std::to_string(x.min_dim()) +
                                " features but the model was trained on " +
                                std::to_string(mf.feature_dim()));
  double v = dot(mf.weights, x);
  if (mf.rho > 0.0) v += mf.rho * mf.weights[static_cast<std::size_t>(mf.dim) - 1];
  return v;
}

/// Sign convention: a decision value of exactly zero predicts +1.
inline int predict_label(const model_file& mf, const sparse_vector& x) {
  return decision_value(mf, x) < 0.0 ? -1 : +1;
}

}  // namespace l1sgd
