#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>

#include "l1sgd/data.hpp"
#include "l1sgd/model.hpp"

namespace l1sgd {

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

/// Outcome of the epoch-boundary bookkeeping.
enum class epoch_decision {
  keep_going,     // criterion not triggered
  exact_checked,  // cheap test triggered the exact one, which said continue
  stopped,        // exact relative-gap test satisfied
  budget,         // epoch/step budget exhausted
};

/// One row of a training report; doubles are NaN when not evaluated.
struct epoch_metrics {
  std::int64_t epoch = 0;          // completed epochs (T)
  std::int64_t epoch_eff = 0;      // in single-presentation units (T_eff)
  std::int64_t steps = 0;          // presentations (t)
  std::int64_t margin_errors = 0;  // M
  double approx_obj = nan_value;   // objective from cached inner products
  double exact_obj = nan_value;    // objective from fresh inner products
  double lower_bound = nan_value;  // dual Lagrangian L^T
  double gap = nan_value;          // (exact_obj - lower_bound) / lower_bound
  double w_norm = nan_value;
  epoch_decision decision = epoch_decision::keep_going;
  double seconds = 0.0;  // cumulative wall clock
};

/// Exact primal objective J(w) = 1/2 |w|^2 + C * sum_k max{0, 1 - w.y_k},
/// evaluated with fresh inner products over all patterns.
inline double primal_objective(std::span<const double> w, const dataset& ds, double cost) {
  double sq = 0.0;
  for (double v : w) sq += v * v;
  double loss = 0.0;
  for (const pattern& p : ds.patterns) {
    const double margin = dot(w, p.y);
    if (margin < 1.0) loss += 1.0 - margin;
  }
  return 0.5 * sq + cost * loss;
}

inline double primal_objective(const model_state& st, const dataset& ds, double cost,
                               double lambda) {
  return primal_objective(weight_vector(st, lambda), ds, cost);
}

/// Dual Lagrangian lower bound L^T = C * M / T_eff - 1/2 |w|^2. Only valid
/// at an epoch boundary, where the implicit dual variables C * I_k / T_eff
/// are guaranteed to sit inside the box [0, C].
inline double dual_lagrangian(const model_state& st, const dataset& ds, double cost,
                              double lambda) {
  if (st.epochs_eff < 1)
    throw std::logic_error("dual lower bound is undefined before the first complete epoch");
  if (st.steps != static_cast<std::int64_t>(ds.size()) * st.epochs_eff)
    throw std::logic_error("dual lower bound requested off an epoch boundary");
  return cost * (static_cast<double>(st.margin_errors) / static_cast<double>(st.epochs_eff)) -
         0.5 * weight_norm_sq(st, lambda);
}

/// Objective estimated from each pattern's cached inner product, i.e. the
/// loss each pattern showed the last time it was presented. Costs no new
/// inner products; the |w|^2 term uses the current weight vector.
inline double approximate_objective(const model_state& st, const dataset& ds, double cost,
                                    double lambda) {
  double loss = 0.0;
  for (std::size_t k = 0; k < ds.size(); ++k) {
    double margin = 0.0;  // before any presentation w = 0
    if (st.cached_step[k] > 0)
      margin = st.cached_dot[k] / (lambda * static_cast<double>(st.cached_step[k]));
    if (margin < 1.0) loss += 1.0 - margin;
  }
  return 0.5 * weight_norm_sq(st, lambda) + cost * loss;
}

struct stop_check_result {
  epoch_decision decision = epoch_decision::keep_going;
  double exact_obj = nan_value;  // set when the exact objective was computed
  double gap = nan_value;        // exact relative gap, when computed
};

/// Two-stage stopping test. The cheap approximate gap gates the expensive
/// exact objective behind the comparison coefficient `factor`; only the
/// exact gap can declare the run converged. A non-positive lower bound
/// makes the relative gap meaningless, so the run just continues.
template <typename ExactFn>
stop_check_result stopping_check(double approx_obj, double lower_bound, double epsilon,
                                 double factor, ExactFn&& exact_fn) {
  stop_check_result r;
  if (!(lower_bound > 0.0)) return r;
  if (!((approx_obj - lower_bound) / lower_bound <= factor * epsilon)) return r;
  r.exact_obj = std::forward<ExactFn>(exact_fn)();
  r.gap = (r.exact_obj - lower_bound) / lower_bound;
  r.decision = r.gap <= epsilon ? epoch_decision::stopped : epoch_decision::exact_checked;
  return r;
}

struct norm_bound_result {
  bool holds;
  double slack;  // bound minus |w|
};

/// Checks |w_t| <= sqrt((1 + (R^2/lambda - 1)/t) / lambda), the dynamic
/// norm bound that makes a projection step unnecessary.
inline norm_bound_result norm_bound_check(const model_state& st, double lambda, double max_norm) {
  if (st.steps < 1) throw std::invalid_argument("norm bound is stated for t >= 1");
  const double lhs = std::sqrt(weight_norm_sq(st, lambda));
  const double ratio = max_norm * max_norm / lambda;
  const double rhs =
      std::sqrt((1.0 + (ratio - 1.0) / static_cast<double>(st.steps)) / lambda);
  return {lhs <= rhs, rhs - lhs};
}

}  // namespace l1sgd
