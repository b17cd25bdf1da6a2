#pragma once

// Shared helpers for the test suite: deterministic dataset generators and
// independent oracles that re-derive the engine's results from first
// principles (sequential simulation, the unscaled weight-space recursion).

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "l1sgd/data.hpp"
#include "l1sgd/rng.hpp"
#include "l1sgd/sparse.hpp"

namespace testsupport {

inline double unit_real(l1sgd::splitmix64& rng) {
  return static_cast<double>(rng.next() >> 11) * 0x1.0p-53;  // uniform in [0, 1)
}

inline double symmetric_real(l1sgd::splitmix64& rng) { return 2.0 * unit_real(rng) - 1.0; }

/// Random sparse examples: each has between 1 and max_nnz entries on
/// distinct increasing indices below d, values in [-1, 1), labels uniform.
inline std::vector<l1sgd::labeled_example> random_examples(std::size_t m, std::int32_t d,
                                                           std::int32_t max_nnz,
                                                           l1sgd::splitmix64& rng) {
  std::vector<l1sgd::labeled_example> out;
  out.reserve(m);
  std::vector<std::int32_t> all(static_cast<std::size_t>(d));
  std::iota(all.begin(), all.end(), 0);
  for (std::size_t i = 0; i < m; ++i) {
    const std::int32_t nnz =
        1 + static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(
                std::min(max_nnz, d))));
    l1sgd::shuffle(std::span<std::int32_t>(all), rng);
    std::vector<std::int32_t> idx(all.begin(), all.begin() + nnz);
    std::sort(idx.begin(), idx.end());
    l1sgd::labeled_example ex;
    ex.label = rng.next() & 1 ? +1 : -1;
    for (std::int32_t j : idx) {
      double v = symmetric_real(rng);
      if (v == 0.0) v = 0.5;
      ex.features.entries.push_back({j, v});
    }
    out.push_back(std::move(ex));
  }
  return out;
}

inline l1sgd::dataset random_dataset(std::size_t m, std::int32_t d, std::int32_t max_nnz,
                                     std::uint64_t seed, double rho = 0.0) {
  l1sgd::splitmix64 rng(seed);
  return l1sgd::augment_reflect(random_examples(m, d, max_nnz, rng), rho);
}

/// Presents one pattern `ell` times in a row, one step at a time, and counts
/// the updates. `gap` is acc . y - lambda * t at block entry. Each update
/// moves the dot by the squared norm; each step grows the threshold by
/// lambda.
inline int simulate_block(double gap, int ell, double lambda, double sq_norm) {
  int plus = 0;
  for (int i = 0; i < ell; ++i) {
    if (gap <= 0.0) {
      ++plus;
      gap += sq_norm;
    }
    gap -= lambda;
  }
  return plus;
}

/// The update recursion in plain weight coordinates, one presentation at a
/// time: on a margin error (w . y <= 1, ties updating, true at w = 0),
/// w <- (t/(t+1)) w + y / (lambda (t+1)); otherwise only the shrinking
/// factor t/(t+1) applies. Step counter starts at 0.
struct weight_space_oracle {
  std::vector<double> w;
  std::int64_t t = 0;
  double lambda;

  weight_space_oracle(std::size_t dim, double lambda_) : w(dim, 0.0), lambda(lambda_) {}

  void present(const l1sgd::pattern& p) {
    const double d = l1sgd::dot(w, p.y);
    const double td = static_cast<double>(t);
    const double shrink = td / (td + 1.0);
    for (double& wi : w) wi *= shrink;
    if (d <= 1.0) l1sgd::add_scaled(w, p.y, 1.0 / (lambda * (td + 1.0)));
    t += 1;
  }
};

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

inline double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace testsupport
