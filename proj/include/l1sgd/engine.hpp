#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "l1sgd/data.hpp"
#include "l1sgd/model.hpp"
#include "l1sgd/objective.hpp"
#include "l1sgd/rng.hpp"

namespace l1sgd {

struct margin_result {
  bool is_error;
  double dot;
};

/// The update condition in rescaled coordinates: acc . y <= lambda * t.
/// Equality counts as a margin error, and at t = 0 with acc = 0 the
/// condition holds, so the very first presentation always updates.
inline margin_result margin_check(const model_state& st, const pattern& p, double lambda) {
  const double d = dot(st.acc, p.y);
  return {d <= lambda * static_cast<double>(st.steps), d};
}

/// One presentation of pattern k. The step counter advances whether or not
/// the pattern was a margin error; the dot product and the step count it was
/// taken at are cached for the approximate objective.
inline void single_update(model_state& st, const pattern& p, std::size_t k, double lambda) {
  const margin_result mr = margin_check(st, p, lambda);
  st.cached_dot[k] = mr.dot;
  st.cached_step[k] = st.steps;
  if (mr.is_error) {
    add_scaled(st.acc, p.y, 1.0);
    st.hits[k] += 1;
    st.margin_errors += 1;
  }
  st.steps += 1;
}

/// Number of margin errors incurred by `ell` consecutive presentations of
/// one pattern, in closed form from the entry gap = acc . y - lambda * t.
/// Each update shifts the gap by sq_norm - lambda while the growing
/// threshold removes lambda per step, hence the division by
/// max(sq_norm, lambda): whichever of the two effects dominates caps the
/// number of updates the block can absorb.
inline int multiplicity(double gap, int ell, double lambda, double sq_norm) {
  if (ell < 1) throw std::invalid_argument("multiplicity block length must be >= 1");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  if (!(sq_norm >= 0.0)) throw std::invalid_argument("squared norm must be >= 0");
  const double room = static_cast<double>(ell - 1) * lambda - gap;
  if (room < 0.0) return 0;
  const double q = room / std::max(sq_norm, lambda);
  if (q >= static_cast<double>(ell)) return ell;
  return std::min(ell, static_cast<int>(std::floor(q)) + 1);
}

/// Block of `ell` consecutive presentations of pattern k, folded into one
/// dot product. Bit-for-bit equal to `ell` single_update calls in sequence.
/// The cached dot is the block-entry dot at the block-entry step count.
inline void multiple_update(model_state& st, const pattern& p, std::size_t k, int ell,
                            double lambda) {
  const double d = dot(st.acc, p.y);
  st.cached_dot[k] = d;
  st.cached_step[k] = st.steps;
  const double gap = d - lambda * static_cast<double>(st.steps);
  const int plus = multiplicity(gap, ell, lambda, p.sq_norm);
  if (plus > 0) {
    add_scaled(st.acc, p.y, static_cast<double>(plus));
    st.hits[k] += plus;
    st.margin_errors += plus;
  }
  st.steps += ell;
}

/// Block length for the epoch at schedule position `pos` (0-based count of
/// epochs run so far). The multiple variant interleaves single epochs with
/// bursts of repeated-presentation epochs: positions 1..4 of every group of
/// 9 use the configured block length, the rest run single. Position 0 is a
/// single epoch, so a fresh run always starts with one plain pass.
inline int epoch_multiplicity(variant v, std::int64_t pos, int ell) {
  if (v != variant::multiple) return 1;
  const std::int64_t r = pos % 9;
  return (r > 0 && r < 5) ? ell : 1;
}

struct no_observer {
  void operator()(const model_state&) const noexcept {}
};

/// One pass over the dataset in the given order, each pattern presented as
/// one block of `ell`. Advances the epoch counters: epochs by one, the
/// single-presentation-equivalent count epochs_eff by ell.
template <typename Observer = no_observer>
void run_epoch(model_state& st, const dataset& ds, std::span<const std::size_t> order, int ell,
               double lambda, Observer&& observe = Observer{}) {
  if (order.size() != ds.size()) throw std::invalid_argument("order must cover the dataset");
  if (ell == 1) {
    for (std::size_t k : order) {
      single_update(st, ds.patterns[k], k, lambda);
      observe(std::as_const(st));
    }
  } else {
    for (std::size_t k : order) {
      multiple_update(st, ds.patterns[k], k, ell, lambda);
      observe(std::as_const(st));
    }
  }
  st.epochs += 1;
  st.epochs_eff += ell;
}

enum class stop_reason {
  criterion,   // certified gap fell below epsilon
  step_limit,  // random variant ran its configured number of steps
  budget       // epoch budget exhausted before the criterion was met
};

inline const char* stop_reason_name(stop_reason r) {
  switch (r) {
    case stop_reason::criterion: return "criterion";
    case stop_reason::step_limit: return "step-limit";
    case stop_reason::budget: return "budget";
  }
  return "?";
}

struct train_report {
  std::vector<epoch_metrics> rows;
  stop_reason reason = stop_reason::budget;
  double final_objective = nan_value;    // exact primal at termination
  double final_lower_bound = nan_value;  // last dual value (epoch variants only)
  double final_gap = nan_value;          // (J - L) / L at termination when L > 0
  double box_excess = nan_value;         // random variant: max_k hits_k * m / t - 1, clamped at 0
  double wall_seconds = 0.0;
};

struct train_result {
  model_state state;
  train_report report;
};

/// Patterns drawn uniformly at random for a fixed number of steps. No dual
/// tracking and no stopping criterion: the per-pattern presentation counts
/// are not balanced, so the dual lower bound is unavailable. Counters are
/// logged every m steps; the exact objective is evaluated once at the end,
/// outside the clock.
template <typename Observer = no_observer>
train_result train_random(const dataset& ds, const hyperparams& hp,
                          Observer&& observe = Observer{}) {
  hp.validate();
  if (hp.schedule != variant::random) throw std::invalid_argument("train_random wants variant r");
  const std::size_t m = ds.size();
  train_result out{make_state(ds), {}};
  model_state& st = out.state;
  train_report& rep = out.report;

  splitmix64 rng(hp.seed);
  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  while (st.steps < hp.max_steps) {
    const std::int64_t chunk =
        std::min<std::int64_t>(hp.max_steps - st.steps, static_cast<std::int64_t>(m));
    for (std::int64_t i = 0; i < chunk; ++i) {
      const std::size_t k = static_cast<std::size_t>(rng.below(m));
      single_update(st, ds.patterns[k], k, hp.lambda);
      observe(std::as_const(st));
    }
    epoch_metrics row;
    row.epoch = st.steps / static_cast<std::int64_t>(m);
    row.epoch_eff = row.epoch;
    row.steps = st.steps;
    row.margin_errors = st.margin_errors;
    row.seconds = elapsed();
    row.decision = epoch_decision::keep_going;
    rep.rows.push_back(row);
  }
  rep.wall_seconds = elapsed();

  rep.reason = stop_reason::step_limit;
  rep.final_objective = primal_objective(st, ds, hp.cost, hp.lambda);
  if (!rep.rows.empty()) {
    rep.rows.back().exact_obj = rep.final_objective;
    rep.rows.back().w_norm = std::sqrt(weight_norm_sq(st, hp.lambda));
  }
  double worst = 0.0;
  if (st.steps > 0) {
    for (std::int64_t h : st.hits)
      worst = std::max(worst, static_cast<double>(h) * static_cast<double>(m) /
                                  static_cast<double>(st.steps));
  }
  rep.box_excess = std::max(0.0, worst - 1.0);
  return out;
}

/// Complete-epoch training (single and multiple variants). After every
/// epoch: dual lower bound, approximate objective, and the two-stage
/// stopping check; an exact objective evaluation is forced every
/// hp.exact_every epochs and on the last budgeted epoch so the report never
/// ends on an approximation.
///
/// The default once-before-training permutation is applied to the pattern
/// storage itself, so every epoch scans memory forward; per-epoch
/// reshuffling falls back to an index array. Observers see the state in
/// presentation order; the returned state's per-pattern counters are mapped
/// back to the caller's pattern indices.
template <typename Observer = no_observer>
train_result train_epochs(const dataset& ds, const hyperparams& hp,
                          Observer&& observe = Observer{}) {
  hp.validate();
  if (hp.schedule == variant::random) throw std::invalid_argument("train_epochs wants variant s or m");
  const std::size_t m = ds.size();
  train_result out{make_state(ds), {}};
  model_state& st = out.state;
  train_report& rep = out.report;

  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  splitmix64 rng(hp.seed);

  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  shuffle(std::span<std::size_t>(perm), rng);
  const bool physical = !hp.permute_each_epoch;
  dataset reordered;
  if (physical) reordered = reorder_patterns(ds, perm);
  const dataset& data = physical ? reordered : ds;
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (!physical) order = perm;

  rep.reason = stop_reason::budget;
  while (st.epochs < hp.max_epochs) {
    if (hp.permute_each_epoch && st.epochs > 0) shuffle(std::span<std::size_t>(order), rng);
    const int ell = epoch_multiplicity(hp.schedule, st.epochs, hp.multiplicity);
    run_epoch(st, data, order, ell, hp.lambda, observe);

    for (std::size_t k = 0; k < m; ++k)
      if (st.hits[k] > st.epochs_eff)
        throw std::logic_error("per-pattern error count exceeds the epoch count");

    epoch_metrics row;
    row.epoch = st.epochs;
    row.epoch_eff = st.epochs_eff;
    row.steps = st.steps;
    row.margin_errors = st.margin_errors;
    row.lower_bound = dual_lagrangian(st, data, hp.cost, hp.lambda);
    row.approx_obj = approximate_objective(st, data, hp.cost, hp.lambda);
    row.w_norm = std::sqrt(weight_norm_sq(st, hp.lambda));

    const auto exact = [&] { return primal_objective(st, data, hp.cost, hp.lambda); };
    const stop_check_result sc =
        stopping_check(row.approx_obj, row.lower_bound, hp.epsilon, hp.approx_factor, exact);
    row.decision = sc.decision;
    row.exact_obj = sc.exact_obj;
    row.gap = sc.gap;

    const bool last = st.epochs >= hp.max_epochs;
    if (sc.decision == epoch_decision::keep_going &&
        (st.epochs % hp.exact_every == 0 || last)) {
      row.exact_obj = exact();
      if (row.lower_bound > 0.0)
        row.gap = (row.exact_obj - row.lower_bound) / row.lower_bound;
    }
    if (std::isfinite(row.exact_obj) &&
        row.lower_bound > row.exact_obj + 1e-9 * (1.0 + std::abs(row.exact_obj)))
      throw std::logic_error("dual value exceeds the exact objective");
    if (last && sc.decision != epoch_decision::stopped) row.decision = epoch_decision::budget;
    row.seconds = elapsed();
    rep.rows.push_back(row);

    if (sc.decision == epoch_decision::stopped) {
      rep.reason = stop_reason::criterion;
      break;
    }
  }
  rep.wall_seconds = elapsed();

  if (physical) {
    // counters were accumulated in presentation order; hand them back on
    // the caller's indexing
    model_state mapped = st;
    for (std::size_t i = 0; i < m; ++i) {
      mapped.hits[perm[i]] = st.hits[i];
      mapped.cached_dot[perm[i]] = st.cached_dot[i];
      mapped.cached_step[perm[i]] = st.cached_step[i];
    }
    st = std::move(mapped);
  }

  if (!rep.rows.empty()) {
    const epoch_metrics& tail = rep.rows.back();
    rep.final_objective = tail.exact_obj;
    rep.final_lower_bound = tail.lower_bound;
    rep.final_gap = tail.gap;
  } else {
    rep.final_objective = primal_objective(st, ds, hp.cost, hp.lambda);
  }
  return out;
}

template <typename Observer = no_observer>
train_result train(const dataset& ds, const hyperparams& hp, Observer&& observe = Observer{}) {
  if (hp.schedule == variant::random)
    return train_random(ds, hp, std::forward<Observer>(observe));
  return train_epochs(ds, hp, std::forward<Observer>(observe));
}

}  // namespace l1sgd
