#pragma once

#include <chrono>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "l1sgd/data.hpp"
#include "l1sgd/engine.hpp"
#include "l1sgd/model.hpp"
#include "l1sgd/objective.hpp"
#include "l1sgd/rng.hpp"

namespace l1sgd {

/// One benchmark measurement: a run driven until the exact objective comes
/// within a relative `target` of a known optimum, with the objective
/// evaluations kept off the clock so `seconds` is update work (including
/// permutation) only.
struct bench_cell {
  bool reached = false;
  std::int64_t epochs = 0;  // for the random variant, completed blocks of m steps
  std::int64_t epochs_eff = 0;
  std::int64_t steps = 0;
  double seconds = 0.0;
  double gap = nan_value;  // (J - j_opt) / j_opt at termination
};

namespace detail {

class stopwatch {
 public:
  void start() { begin_ = std::chrono::steady_clock::now(); }
  void stop() { total_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - begin_).count(); }
  double seconds() const { return total_; }

 private:
  std::chrono::steady_clock::time_point begin_{};
  double total_ = 0.0;
};

}  // namespace detail

/// Runs hp.schedule on ds until (J - j_opt) / j_opt <= target, checking at
/// epoch boundaries (every m steps for the random variant). The budget is
/// hp.max_epochs epochs, or hp.max_steps steps for the random variant.
inline bench_cell bench_run(const dataset& ds, const hyperparams& hp, double j_opt,
                            double target) {
  hp.validate();
  if (!(j_opt > 0.0)) throw std::invalid_argument("reference objective must be > 0");
  if (!(target > 0.0)) throw std::invalid_argument("target must be > 0");
  const std::size_t m = ds.size();
  model_state st = make_state(ds);
  splitmix64 rng(hp.seed);
  detail::stopwatch clock;
  bench_cell cell;

  const auto check = [&] {
    cell.gap = (primal_objective(st, ds, hp.cost, hp.lambda) - j_opt) / j_opt;
    return cell.gap <= target;
  };

  if (hp.schedule == variant::random) {
    while (st.steps < hp.max_steps) {
      const std::int64_t chunk =
          std::min<std::int64_t>(hp.max_steps - st.steps, static_cast<std::int64_t>(m));
      clock.start();
      for (std::int64_t i = 0; i < chunk; ++i) {
        const std::size_t k = static_cast<std::size_t>(rng.below(m));
        single_update(st, ds.patterns[k], k, hp.lambda);
      }
      clock.stop();
      cell.epochs = st.steps / static_cast<std::int64_t>(m);
      cell.epochs_eff = cell.epochs;
      if (check()) {
        cell.reached = true;
        break;
      }
    }
  } else {
    // see train_epochs: the one-shot permutation is applied to the storage
    // (on the clock), per-epoch reshuffling keeps the index array
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    dataset reordered;
    const bool physical = !hp.permute_each_epoch;
    clock.start();
    shuffle(std::span<std::size_t>(order), rng);
    if (physical) {
      reordered = reorder_patterns(ds, order);
      std::iota(order.begin(), order.end(), std::size_t{0});
    }
    clock.stop();
    const dataset& data = physical ? reordered : ds;
    while (st.epochs < hp.max_epochs) {
      const int ell = epoch_multiplicity(hp.schedule, st.epochs, hp.multiplicity);
      clock.start();
      if (hp.permute_each_epoch && st.epochs > 0) shuffle(std::span<std::size_t>(order), rng);
      run_epoch(st, data, order, ell, hp.lambda);
      clock.stop();
      cell.epochs = st.epochs;
      cell.epochs_eff = st.epochs_eff;
      if (check()) {
        cell.reached = true;
        break;
      }
    }
  }
  cell.steps = st.steps;
  cell.seconds = clock.seconds();
  return cell;
}

}  // namespace l1sgd
