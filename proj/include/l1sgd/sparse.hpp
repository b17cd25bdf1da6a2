#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace l1sgd {

/// One nonzero coordinate of a sparse vector.
struct feature {
  std::int32_t index;  // 0-based
  double value;

  friend bool operator==(const feature&, const feature&) = default;
};

/// Sparse vector as index/value pairs, indices strictly increasing.
struct sparse_vector {
  std::vector<feature> entries;

  [[nodiscard]] std::size_t nnz() const { return entries.size(); }

  [[nodiscard]] double squared_norm() const {
    double s = 0.0;
    for (const feature& e : entries) s += e.value * e.value;
    return s;
  }

  /// Largest index + 1, or 0 when empty.
  [[nodiscard]] std::int32_t min_dim() const {
    return entries.empty() ? 0 : entries.back().index + 1;
  }

  friend bool operator==(const sparse_vector&, const sparse_vector&) = default;
};

/// dense . sparse, iterating only the sparse entries.
inline double dot(std::span<const double> dense, const sparse_vector& v) {
  double s = 0.0;
  for (const feature& e : v.entries) s += dense[e.index] * e.value;
  return s;
}

/// dense += scale * sparse
inline void add_scaled(std::span<double> dense, const sparse_vector& v, double scale) {
  for (const feature& e : v.entries) dense[e.index] += scale * e.value;
}

}  // namespace l1sgd
