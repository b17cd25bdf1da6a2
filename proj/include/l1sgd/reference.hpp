#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "l1sgd/data.hpp"
#include "l1sgd/objective.hpp"

namespace l1sgd {

struct reference_solution {
  double objective;  // primal value at the returned weights (upper bound on the optimum)
  double dual_value;
  double gap;  // objective - dual_value at termination
  std::vector<double> weights;
  std::vector<double> alpha;
  int sweeps;
};

struct convergence_error : std::runtime_error {
  convergence_error(double primal, double dual, int sweeps)
      : std::runtime_error("reference solver did not converge after " + std::to_string(sweeps) +
                           " sweeps; best bounds " + std::to_string(dual) + " <= opt <= " +
                           std::to_string(primal)),
        best_primal(primal),
        best_dual(dual) {}
  double best_primal;
  double best_dual;
};

/// Independent optimum oracle: maximizes the boxed dual
///   L(alpha) = sum_k alpha_k - 1/2 |sum_k alpha_k y_k|^2,  0 <= alpha_k <= C,
/// by cyclic exact coordinate ascent, maintaining w = sum alpha_k y_k.
/// Terminates once its own duality gap J(w) - L(alpha) falls below
/// tol * max(1, |L|); the returned objective then brackets the true optimum
/// from above by at most that amount.
inline reference_solution reference_solve(const dataset& ds, double cost, double tol = 1e-10,
                                          int max_sweeps = 200000) {
  if (!(cost > 0.0)) throw std::invalid_argument("C must be > 0");
  const std::size_t m = ds.size();
  std::vector<double> alpha(m, 0.0);
  std::vector<double> w(static_cast<std::size_t>(ds.dim), 0.0);
  double alpha_sum = 0.0;

  double best_primal = primal_objective(w, ds, cost);
  double best_dual = 0.0;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    for (std::size_t k = 0; k < m; ++k) {
      const pattern& p = ds.patterns[k];
      const double grad = dot(w, p.y) - 1.0;  // d/d(alpha_k) of the negated dual
      double next;
      if (p.sq_norm > 0.0)
        next = std::clamp(alpha[k] - grad / p.sq_norm, 0.0, cost);
      else
        next = cost;  // zero pattern: dual is linear in alpha_k with slope 1
      const double delta = next - alpha[k];
      if (delta != 0.0) {
        add_scaled(w, p.y, delta);
        alpha_sum += delta;
        alpha[k] = next;
      }
    }

    double w_sq = 0.0;
    for (double v : w) w_sq += v * v;
    const double dual = alpha_sum - 0.5 * w_sq;
    const double primal = primal_objective(w, ds, cost);
    best_primal = std::min(best_primal, primal);
    best_dual = std::max(best_dual, dual);
    if (primal - dual <= tol * std::max(1.0, std::abs(dual)))
      return {primal, dual, primal - dual, std::move(w), std::move(alpha), sweep};
  }
  throw convergence_error(best_primal, best_dual, max_sweeps);
}

}  // namespace l1sgd
