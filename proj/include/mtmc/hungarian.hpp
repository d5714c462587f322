#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace mtmc {

using AssignmentPair = std::pair<Eigen::Index, Eigen::Index>;
using Assignment = std::vector<AssignmentPair>;

namespace detail {

// Square Kuhn-Munkres with row/column potentials (O(N^3)). On return
// `row_to_col` is a minimum-cost perfect matching and
// cost(i, j) - u[i] - v[j] >= 0 holds up to rounding, with equality on it.
template <typename Scalar>
struct SquareSolution {
  std::vector<Eigen::Index> row_to_col;
  std::vector<Scalar> u;
  std::vector<Scalar> v;
};

template <typename Scalar>
SquareSolution<Scalar> solve_square(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a) {
  const Eigen::Index n = a.rows();
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  // 1-based potentials; index 0 is the virtual source column.
  std::vector<Scalar> u(n + 1, 0), v(n + 1, 0), minv(n + 1);
  std::vector<Eigen::Index> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);

  for (Eigen::Index i = 1; i <= n; ++i) {
    p[0] = i;
    Eigen::Index j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const Eigen::Index i0 = p[j0];
      Scalar delta = inf;
      Eigen::Index j1 = 0;
      for (Eigen::Index j = 1; j <= n; ++j) {
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
      for (Eigen::Index j = 0; j <= n; ++j) {
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
      const Eigen::Index j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  SquareSolution<Scalar> out;
  out.row_to_col.assign(n, -1);
  for (Eigen::Index j = 1; j <= n; ++j) out.row_to_col[p[j] - 1] = j - 1;
  out.u.assign(u.begin() + 1, u.end());
  out.v.assign(v.begin() + 1, v.end());
  return out;
}

// Among all perfect matchings on the tight-edge graph (all of them optimal),
// moves to the lexicographically smallest one for the first `ordered_rows`
// rows: each row in turn takes its smallest tight column that still admits a
// perfect matching of the remaining rows.
class TightGraphRefiner {
 public:
  TightGraphRefiner(std::vector<std::vector<Eigen::Index>> tight, std::vector<Eigen::Index> row_to_col)
      : tight_(std::move(tight)), row_to_col_(std::move(row_to_col)) {
    const auto n = static_cast<Eigen::Index>(row_to_col_.size());
    col_to_row_.assign(n, -1);
    for (Eigen::Index r = 0; r < n; ++r) col_to_row_[row_to_col_[r]] = r;
    row_locked_.assign(n, 0);
    col_locked_.assign(n, 0);
  }

  std::vector<Eigen::Index> refine(Eigen::Index ordered_rows) {
    for (Eigen::Index r = 0; r < ordered_rows; ++r) {
      for (Eigen::Index c : tight_[r]) {
        if (col_locked_[c]) continue;
        if (c == row_to_col_[r] || reroute(r, c)) {
          row_locked_[r] = 1;
          col_locked_[c] = 1;
          break;
        }
      }
    }
    return row_to_col_;
  }

 private:
  // Tries to give column c to row r by re-seating c's current row along an
  // alternating path that ends at r's current column.
  bool reroute(Eigen::Index r, Eigen::Index c) {
    const Eigen::Index target = row_to_col_[r];
    visited_.assign(row_to_col_.size(), 0);
    path_.clear();
    row_locked_[r] = 1;
    col_locked_[c] = 1;
    const bool found = search(col_to_row_[c], target);
    row_locked_[r] = 0;
    col_locked_[c] = 0;
    if (!found) return false;
    // path_ holds (row, new column) steps.
    for (const auto& [row, col] : path_) {
      row_to_col_[row] = col;
      col_to_row_[col] = row;
    }
    row_to_col_[r] = c;
    col_to_row_[c] = r;
    return true;
  }

  bool search(Eigen::Index row, Eigen::Index target) {
    for (Eigen::Index col : tight_[row]) {
      if (col_locked_[col] || visited_[col] || col == row_to_col_[row]) continue;
      visited_[col] = 1;
      if (col == target) {
        path_.emplace_back(row, col);
        return true;
      }
      const Eigen::Index next = col_to_row_[col];
      if (row_locked_[next]) continue;
      path_.emplace_back(row, col);
      if (search(next, target)) return true;
      path_.pop_back();
    }
    return false;
  }

  std::vector<std::vector<Eigen::Index>> tight_;
  std::vector<Eigen::Index> row_to_col_;
  std::vector<Eigen::Index> col_to_row_;
  std::vector<char> row_locked_;
  std::vector<char> col_locked_;
  std::vector<char> visited_;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> path_;
};

}  // namespace detail

/// Minimum-cost assignment on an n x m cost matrix. Returns min(n, m) (row, col)
/// pairs sorted by row. Among optimal assignments the lexicographically
/// smallest pair list is returned; costs closer than ~1e-9 (relative to the
/// largest |cost|) are treated as tied.
template <typename Derived>
Assignment hungarian(const Eigen::MatrixBase<Derived>& cost) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index rows = cost.rows();
  const Eigen::Index cols = cost.cols();
  if (rows == 0 || cols == 0) return {};
  if (!cost.allFinite()) throw std::invalid_argument("hungarian: cost matrix has non-finite entries");

  const Eigen::Index n = std::max(rows, cols);
  Matrix square = Matrix::Zero(n, n);
  square.topLeftCorner(rows, cols) = cost;

  const auto solution = detail::solve_square<Scalar>(square);

  const Scalar scale = std::max<Scalar>(Scalar(1), square.cwiseAbs().maxCoeff());
  const Scalar tol = Scalar(1e-9) * scale;
  std::vector<std::vector<Eigen::Index>> tight(n);
  bool unique = true;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (square(i, j) - solution.u[i] - solution.v[j] <= tol) tight[i].push_back(j);
    }
    // The matched edge is tight by construction even if rounding says otherwise.
    const Eigen::Index mate = solution.row_to_col[i];
    if (std::find(tight[i].begin(), tight[i].end(), mate) == tight[i].end()) {
      tight[i].insert(std::upper_bound(tight[i].begin(), tight[i].end(), mate), mate);
    }
    if (tight[i].size() > 1) unique = false;
  }

  std::vector<Eigen::Index> row_to_col = solution.row_to_col;
  if (!unique) {
    row_to_col = detail::TightGraphRefiner(std::move(tight), std::move(row_to_col)).refine(rows);
  }

  Assignment out;
  out.reserve(static_cast<std::size_t>(std::min(rows, cols)));
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (row_to_col[r] < cols) out.emplace_back(r, row_to_col[r]);
  }
  return out;
}

template <typename Derived>
typename Derived::Scalar assignment_cost(const Eigen::MatrixBase<Derived>& cost,
                                         const Assignment& assignment) {
  typename Derived::Scalar total = 0;
  for (const auto& [r, c] : assignment) total += cost(r, c);
  return total;
}

}  // namespace mtmc
