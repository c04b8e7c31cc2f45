#pragma once

// Minimum-cost rectangular assignment (Kuhn-Munkres with potentials, O(n^2 m)).

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace sse {

struct InfeasibleAssignment : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
struct Assignment {
  /// Column assigned to each row, or -1.
  std::vector<int> row_to_col;
  Scalar total_cost = Scalar(0);

  int pairs() const {
    int n = 0;
    for (int c : row_to_col) n += c >= 0;
    return n;
  }
};

template <typename Scalar>
constexpr Scalar forbidden() {
  return std::numeric_limits<Scalar>::infinity();
}

namespace detail {

// Rows <= cols. Returns row -> col for a square-or-wide finite cost matrix.
template <typename Scalar>
std::vector<int> kuhn_munkres(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(a.cols());
  const Scalar inf = std::numeric_limits<Scalar>::max();
  std::vector<Scalar> u(n + 1, 0), v(m + 1, 0), minv(m + 1);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      Scalar delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const Scalar cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
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
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace detail

/// Minimum-cost one-to-one assignment. Entries equal to +inf are forbidden and never chosen;
/// the result first maximises the number of assigned pairs, then minimises their total cost.
/// Ties resolve deterministically (rows are inserted in index order, lowest column wins).
/// With `strict`, a row whose entries are all forbidden throws InfeasibleAssignment.
template <typename Derived>
Assignment<typename Derived::Scalar> hungarian_assign(const Eigen::MatrixBase<Derived>& cost, bool strict = false) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());

  Assignment<Scalar> result;
  result.row_to_col.assign(n, -1);
  if (n == 0 || m == 0) {
    if (strict && n > 0) throw InfeasibleAssignment("assignment: no columns available");
    return result;
  }

  Scalar finite_sum = 0;
  for (int i = 0; i < n; ++i) {
    bool any = false;
    for (int j = 0; j < m; ++j) {
      const Scalar c = cost(i, j);
      if (std::isnan(c) || c == -std::numeric_limits<Scalar>::infinity())
        throw std::invalid_argument("assignment: cost entries must be finite or +inf");
      if (std::isfinite(c)) {
        finite_sum += std::abs(c);
        any = true;
      }
    }
    if (strict && !any) throw InfeasibleAssignment("assignment: row " + std::to_string(i) + " is fully forbidden");
  }

  // A forbidden pair costs more than any feasible set of pairs, so the optimum uses as few as possible.
  const Scalar big = (finite_sum + Scalar(1)) * Scalar(std::min(n, m) + 1);
  Mat work(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) work(i, j) = std::isfinite(cost(i, j)) ? Scalar(cost(i, j)) : big;

  std::vector<int> r2c;
  if (n <= m) {
    r2c = detail::kuhn_munkres<Scalar>(work);
  } else {
    const std::vector<int> c2r = detail::kuhn_munkres<Scalar>(work.transpose());
    r2c.assign(n, -1);
    for (int j = 0; j < m; ++j)
      if (c2r[j] >= 0) r2c[c2r[j]] = j;
  }

  for (int i = 0; i < n; ++i) {
    const int j = r2c[i];
    if (j < 0 || !std::isfinite(cost(i, j))) continue;
    result.row_to_col[i] = j;
    result.total_cost += cost(i, j);
  }
  return result;
}

}  // namespace sse
