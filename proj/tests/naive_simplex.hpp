// SPDX-License-Identifier: Apache-2.0
// Textbook dense-tableau simplex used ONLY as an independent oracle in
// tests. Deliberately naive: full tableau, Bland's rule, no bounded
// variables (upper bounds must be supplied as explicit rows).
#pragma once

#include <cmath>
#include <limits>
#include <vector>

namespace test_oracle {

// min c'x  s.t.  A x <= b,  x >= 0,  with every b_i >= 0 so the slack basis
// is feasible. Returns false when unbounded.
inline bool naive_simplex_min(const std::vector<std::vector<double>>& A,
                              const std::vector<double>& b, const std::vector<double>& c,
                              double& obj_out, std::vector<double>* x_out = nullptr) {
  const int m = static_cast<int>(A.size());
  const int n = static_cast<int>(c.size());
  const int cols = n + m + 1;
  std::vector<std::vector<double>> T(m + 1, std::vector<double>(cols, 0.0));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) T[i][j] = A[i][j];
    T[i][n + i] = 1.0;
    T[i][cols - 1] = b[i];
  }
  for (int j = 0; j < n; ++j) T[m][j] = c[j];
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;

  for (long iter = 0; iter < 100000; ++iter) {
    int q = -1;
    for (int j = 0; j < n + m; ++j)
      if (T[m][j] < -1e-10) {  // Bland: first improving column
        q = j;
        break;
      }
    if (q < 0) break;
    int r = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      if (T[i][q] > 1e-10) {
        const double ratio = T[i][cols - 1] / T[i][q];
        if (ratio < best - 1e-12 ||
            (ratio < best + 1e-12 && (r < 0 || basis[i] < basis[r]))) {
          best = ratio;
          r = i;
        }
      }
    }
    if (r < 0) return false;  // unbounded
    const double piv = T[r][q];
    for (double& v : T[r]) v /= piv;
    for (int i = 0; i <= m; ++i) {
      if (i == r) continue;
      const double f = T[i][q];
      if (f == 0.0) continue;
      for (int j = 0; j < cols; ++j) T[i][j] -= f * T[r][j];
    }
    basis[r] = q;
  }
  obj_out = -T[m][cols - 1];
  if (x_out) {
    x_out->assign(n, 0.0);
    for (int i = 0; i < m; ++i)
      if (basis[i] < n) (*x_out)[static_cast<std::size_t>(basis[i])] = T[i][cols - 1];
  }
  return true;
}

}  // namespace test_oracle
