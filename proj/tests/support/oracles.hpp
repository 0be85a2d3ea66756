#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

// Straightforward reference implementations used to cross-check the library.
namespace scbm::oracle {

using Matrix = std::vector<std::vector<double>>;

// Cyclic Jacobi rotations on a symmetric matrix. Returns eigenvalues in
// descending order with eigenvectors as the columns of `vectors`.
inline std::vector<double> jacobi_eigen(Matrix a, Matrix& vectors) {
  const std::size_t n = a.size();
  vectors.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) vectors[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = vectors[k][p], vkq = vectors[k][q];
          vectors[k][p] = c * vkp - s * vkq;
          vectors[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
  std::vector<double> values(n);
  Matrix sorted(n, std::vector<double>(n));
  for (std::size_t j = 0; j < n; ++j) {
    values[j] = a[order[j]][order[j]];
    for (std::size_t i = 0; i < n; ++i) sorted[i][j] = vectors[i][order[j]];
  }
  vectors = std::move(sorted);
  return values;
}

// Sample covariance (divisor rows - 1) of row-major data.
inline Matrix covariance(const Matrix& rows) {
  const std::size_t m = rows.front().size();
  std::vector<double> mean(m, 0.0);
  for (const auto& r : rows)
    for (std::size_t j = 0; j < m; ++j) mean[j] += r[j] / static_cast<double>(rows.size());
  Matrix c(m, std::vector<double>(m, 0.0));
  for (const auto& r : rows)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) c[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]);
  for (auto& row : c)
    for (auto& x : row) x /= static_cast<double>(rows.size() - 1);
  return c;
}

inline double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline double mean_cross_distance(const Matrix& a, const Matrix& b) {
  double total = 0;
  for (const auto& x : a)
    for (const auto& y : b) total += euclid(x, y);
  return total / static_cast<double>(a.size() * b.size());
}

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// `positive` marks the positive class; labels are compared as integers.
inline Counts confusion(const std::vector<int>& truth, const std::vector<int>& pred, int positive) {
  Counts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool t = truth[i] == positive, p = pred[i] == positive;
    if (t && p) ++c.tp;
    if (!t && p) ++c.fp;
    if (t && !p) ++c.fn;
    if (!t && !p) ++c.tn;
  }
  return c;
}

}  // namespace scbm::oracle
