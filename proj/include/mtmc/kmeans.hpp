#pragma once

#include "mtmc/parallel.hpp"
#include "mtmc/rng.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mtmc {

struct KMeansOptions {
  Eigen::Index k = 1;
  std::uint64_t seed = 0;
  int max_iter = 300;
  /// Stop once no center moves farther than this.
  double tol = 1e-6;
  int threads = 1;
};

template <typename Scalar, int Dim>
struct KMeansResult {
  Eigen::Matrix<Scalar, Dim, Eigen::Dynamic> centers;
  std::vector<Eigen::Index> labels;
  Scalar inertia = 0;
  /// Inertia after every assignment step, ending with the returned centers.
  std::vector<Scalar> inertia_history;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

// Nearest center per column of `points` (ties to the lowest index).
template <typename Scalar, int Dim>
void assign_nearest(const Eigen::Matrix<Scalar, Dim, Eigen::Dynamic>& points,
                    const Eigen::Matrix<Scalar, Dim, Eigen::Dynamic>& centers, std::vector<Eigen::Index>& labels,
                    std::vector<Scalar>& dist2, int threads) {
  const Eigen::Index n = points.cols();
  const Eigen::Index k = centers.cols();
  constexpr Eigen::Index kChunk = 512;
  const auto chunks = static_cast<std::size_t>((n + kChunk - 1) / kChunk);
  parallel_for(chunks, threads, [&](std::size_t chunk) {
    const Eigen::Index begin = static_cast<Eigen::Index>(chunk) * kChunk;
    const Eigen::Index end = std::min(n, begin + kChunk);
    for (Eigen::Index i = begin; i < end; ++i) {
      Scalar best = std::numeric_limits<Scalar>::infinity();
      Eigen::Index best_j = 0;
      for (Eigen::Index j = 0; j < k; ++j) {
        const Scalar d = (centers.col(j) - points.col(i)).squaredNorm();
        if (d < best) {
          best = d;
          best_j = j;
        }
      }
      labels[i] = best_j;
      dist2[i] = best;
    }
  });
}

template <typename Scalar>
Scalar ordered_sum(const std::vector<Scalar>& values) {
  Scalar total = 0;
  for (Scalar v : values) total += v;
  return total;
}

}  // namespace detail

/// Lloyd's algorithm from k-means++ seeding. `points` holds one point per
/// column. Empty clusters are reseeded to the point farthest from its center.
template <typename Derived>
KMeansResult<typename Derived::Scalar, Derived::RowsAtCompileTime> kmeans(const Eigen::MatrixBase<Derived>& points_in,
                                                                          const KMeansOptions& options) {
  using Scalar = typename Derived::Scalar;
  constexpr int Dim = Derived::RowsAtCompileTime;
  using Points = Eigen::Matrix<Scalar, Dim, Eigen::Dynamic>;

  const Points points = points_in;
  const Eigen::Index n = points.cols();
  const Eigen::Index k = options.k;
  if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
  if (n < k) throw std::invalid_argument("kmeans: fewer points than clusters");
  if (!points.allFinite()) throw std::invalid_argument("kmeans: non-finite point");

  KMeansResult<Scalar, Dim> result;
  Points centers(points.rows(), k);

  // k-means++ seeding.
  SplitMix64 rng = SplitMix64::stream(options.seed, 0);
  std::vector<Scalar> nearest(n, std::numeric_limits<Scalar>::infinity());
  Eigen::Index chosen = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(n)));
  for (Eigen::Index c = 0; c < k; ++c) {
    if (c > 0) {
      const Scalar total = detail::ordered_sum(nearest);
      if (total > 0) {
        const Scalar target = static_cast<Scalar>(rng.uniform()) * total;
        Scalar running = 0;
        chosen = -1;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (nearest[i] <= 0) continue;
          running += nearest[i];
          chosen = i;
          if (running > target) break;
        }
      } else {
        chosen = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(n)));
      }
    }
    centers.col(c) = points.col(chosen);
    for (Eigen::Index i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], (points.col(i) - centers.col(c)).squaredNorm());
    }
  }

  std::vector<Eigen::Index> labels(n, 0);
  std::vector<Scalar> dist2(n, 0);
  Points sums(points.rows(), k);
  std::vector<Eigen::Index> counts(k);

  for (int iter = 0; iter < options.max_iter; ++iter) {
    detail::assign_nearest<Scalar, Dim>(points, centers, labels, dist2, options.threads);
    result.inertia_history.push_back(detail::ordered_sum(dist2));
    ++result.iterations;

    sums.setZero();
    std::fill(counts.begin(), counts.end(), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.col(labels[i]) += points.col(i);
      ++counts[labels[i]];
    }
    Points updated(points.rows(), k);
    for (Eigen::Index c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        updated.col(c) = sums.col(c) / static_cast<Scalar>(counts[c]);
        continue;
      }
      Eigen::Index far = 0;
      for (Eigen::Index i = 1; i < n; ++i) {
        if (dist2[i] > dist2[far]) far = i;
      }
      updated.col(c) = points.col(far);
      dist2[far] = 0;
    }

    const Scalar shift = (updated - centers).colwise().norm().maxCoeff();
    centers = updated;
    if (shift <= static_cast<Scalar>(options.tol)) {
      result.converged = true;
      break;
    }
  }

  detail::assign_nearest<Scalar, Dim>(points, centers, labels, dist2, options.threads);
  result.inertia = detail::ordered_sum(dist2);
  result.inertia_history.push_back(result.inertia);
  result.centers = std::move(centers);
  result.labels = std::move(labels);
  return result;
}

}  // namespace mtmc
