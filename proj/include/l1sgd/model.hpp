#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "l1sgd/data.hpp"

namespace l1sgd {

/// Pattern scheduling variant.
///   random   - patterns drawn uniformly at random, fixed step budget
///   single   - complete epochs, every pattern presented once per epoch
///   multiple - complete epochs, blocks of repeated presentations on a
///              fixed schedule (see epoch_multiplicity in engine.hpp)
enum class variant { random, single, multiple };

inline char variant_code(variant v) {
  switch (v) {
    case variant::random: return 'r';
    case variant::single: return 's';
    case variant::multiple: return 'm';
  }
  return '?';
}

inline variant variant_from_code(char c) {
  switch (c) {
    case 'r': return variant::random;
    case 's': return variant::single;
    case 'm': return variant::multiple;
  }
  throw std::invalid_argument(std::string("unknown variant '") + c + "' (expected r, s or m)");
}

/// Mutable state of a training run.
///
/// The weight vector is kept in the rescaled form acc = lambda * t * w,
/// so a presentation either adds the pattern to acc or does nothing; the
/// per-step shrinking of w is carried entirely by the step counter.
struct model_state {
  std::vector<double> acc;   // sum over k of hits[k] * y_k; w = acc / (lambda * steps)
  std::int64_t steps = 0;    // presentations so far, counting multiplicity (t)
  std::int64_t epochs = 0;   // completed epochs
  std::int64_t epochs_eff = 0;  // completed epochs in single-presentation units (T_eff)
  std::int64_t margin_errors = 0;  // total updates of acc (M)
  std::vector<std::int64_t> hits;  // per-pattern margin-error counts (I_k)

  // Inner product acc . y_k from each pattern's latest presentation and the
  // step count at which it was taken; feeds the approximate objective.
  std::vector<double> cached_dot;
  std::vector<std::int64_t> cached_step;
};

inline model_state make_state(const dataset& ds) {
  model_state st;
  st.acc.assign(static_cast<std::size_t>(ds.dim), 0.0);
  st.hits.assign(ds.size(), 0);
  st.cached_dot.assign(ds.size(), 0.0);
  st.cached_step.assign(ds.size(), 0);
  return st;
}

/// Materializes w = acc / (lambda * steps); the zero vector at steps == 0.
inline std::vector<double> weight_vector(const model_state& st, double lambda) {
  std::vector<double> w(st.acc.size(), 0.0);
  if (st.steps == 0) return w;
  const double inv = 1.0 / (lambda * static_cast<double>(st.steps));
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = st.acc[i] * inv;
  return w;
}

inline double weight_norm_sq(const model_state& st, double lambda) {
  if (st.steps == 0) return 0.0;
  double s = 0.0;
  for (double v : st.acc) s += v * v;
  const double scale = lambda * static_cast<double>(st.steps);
  return s / (scale * scale);
}

/// Run configuration. `lambda` is always derived as 1 / (cost * m) so the
/// two parameterizations cannot drift apart; use the factories below.
struct hyperparams {
  double cost = 1.0;             // penalty parameter C
  double lambda = 0.0;           // regularization, = 1 / (cost * m)
  double rho = 0.0;              // augmentation parameter
  double epsilon = 0.01;         // target relative accuracy
  double approx_factor = 1.2;    // comparison coefficient f gating exact checks
  int multiplicity = 5;          // block length for variant::multiple
  std::int64_t max_steps = 0;    // presentation budget (variant::random)
  std::int64_t max_epochs = 0;   // epoch budget (epoch variants)
  variant schedule = variant::single;
  std::uint64_t seed = 0;
  bool permute_each_epoch = false;
  int exact_every = 50;  // force an exact objective evaluation every K epochs

  static hyperparams from_cost(double cost, std::size_t m) {
    if (!(cost > 0.0) || !std::isfinite(cost)) throw std::invalid_argument("C must be finite and > 0");
    if (m == 0) throw std::invalid_argument("empty dataset");
    hyperparams hp;
    hp.cost = cost;
    hp.lambda = 1.0 / (cost * static_cast<double>(m));
    return hp;
  }

  static hyperparams from_lambda(double lambda, std::size_t m) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
      throw std::invalid_argument("lambda must be finite and > 0");
    if (m == 0) throw std::invalid_argument("empty dataset");
    return from_cost(1.0 / (lambda * static_cast<double>(m)), m);
  }

  void validate() const {
    if (!(cost > 0.0) || !(lambda > 0.0)) throw std::invalid_argument("hyperparams not initialized");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    if (!(approx_factor >= 1.0)) throw std::invalid_argument("comparison coefficient f must be >= 1");
    if (multiplicity < 1) throw std::invalid_argument("multiplicity must be >= 1");
    if (exact_every < 1) throw std::invalid_argument("exact evaluation period must be >= 1");
    if (!(rho >= 0.0)) throw std::invalid_argument("rho must be >= 0");
    if (schedule == variant::random) {
      if (max_steps < 0) throw std::invalid_argument("step budget must be >= 0");
    } else {
      if (max_epochs < 1) throw std::invalid_argument("epoch budget must be >= 1");
    }
  }
};

}  // namespace l1sgd
