#pragma once

#include <Eigen/Dense>

#include <limits>
#include <vector>

#include "krein/error.hpp"

namespace krein {

/// Maximum-weight perfect matching on a square score matrix (Hungarian
/// algorithm with potentials, O(n^3)). Returns col[i], the column assigned
/// to row i. Ties resolve toward smaller indices.
inline std::vector<Eigen::Index> max_weight_assignment(const Eigen::MatrixXd& score) {
  using Eigen::Index;
  const Index n = score.rows();
  if (score.cols() != n) throw validation_error("max_weight_assignment: score matrix must be square");
  if (n == 0) return {};
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; row 0 / column 0 are sentinels.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<Index> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const Index i0 = p[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -score(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const Index j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Index> col(n);
  for (Index j = 1; j <= n; ++j) col[p[j] - 1] = j - 1;
  return col;
}

}  // namespace krein
