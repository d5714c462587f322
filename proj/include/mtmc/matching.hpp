#pragma once

#include "mtmc/datamodel.hpp"
#include "mtmc/hungarian.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace mtmc {

enum class SimilarityMode { bev_iou, center_distance };

struct SimilaritySpec {
  SimilarityMode mode = SimilarityMode::bev_iou;
  /// Distance (m) at which center_distance similarity reaches 0.
  double d_max = 1.0;

  void validate() const;
};

std::string to_string(SimilarityMode mode);
SimilarityMode similarity_mode_from_string(const std::string& name);

/// Overlap of the axis-aligned (x, y) footprints over their union; yaw and
/// height are ignored.
template <typename Scalar>
Scalar bev_iou(const Box3<Scalar>& a, const Box3<Scalar>& b) {
  using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
  // Footprint half-sizes: length along x, width along y.
  const Vec2 ha(a.length() / 2, a.width() / 2);
  const Vec2 hb(b.length() / 2, b.width() / 2);
  const Vec2 ca = a.center.template head<2>();
  const Vec2 cb = b.center.template head<2>();
  // Identical footprints score exactly 1 regardless of rounding below.
  if (ca == cb && ha == hb) return Scalar(1);
  const Vec2 lo = (ca - ha).cwiseMax(cb - hb);
  const Vec2 hi = (ca + ha).cwiseMin(cb + hb);
  const Vec2 overlap = (hi - lo).cwiseMax(Vec2::Zero());
  const Scalar inter = overlap.prod();
  if (inter <= 0) return Scalar(0);
  const Scalar area_a = 4 * ha.prod();
  const Scalar area_b = 4 * hb.prod();
  return std::clamp(inter / (area_a + area_b - inter), Scalar(0), Scalar(1));
}

/// 1 at coincident centers, falling linearly to 0 at distance d_max.
template <typename Scalar>
Scalar center_distance_similarity(const Box3<Scalar>& a, const Box3<Scalar>& b, Scalar d_max) {
  const Scalar d = std::hypot(a.x() - b.x(), a.y() - b.y());
  return std::max(Scalar(0), Scalar(1) - d / d_max);
}

template <typename Scalar>
Scalar similarity(const Box3<Scalar>& a, const Box3<Scalar>& b, const SimilaritySpec& spec) {
  switch (spec.mode) {
    case SimilarityMode::bev_iou:
      return bev_iou(a, b);
    case SimilarityMode::center_distance:
      return center_distance_similarity(a, b, static_cast<Scalar>(spec.d_max));
  }
  return Scalar(0);
}

struct MatchedPair {
  TrackId gt_id = 0;
  TrackId pred_id = 0;
  double similarity = 0.0;

  friend bool operator==(const MatchedPair&, const MatchedPair&) = default;
};

/// Outcome of matching one frame of one class. All lists are ordered by track id
/// (pairs by gt id).
struct FrameMatchSet {
  std::vector<MatchedPair> pairs;
  std::vector<TrackId> unmatched_gt;
  std::vector<TrackId> unmatched_pred;

  friend bool operator==(const FrameMatchSet&, const FrameMatchSet&) = default;
};

/// Pairwise similarities of one frame, with both sides sorted by track id.
/// Built once and reused across gating thresholds.
struct FrameSimilarity {
  std::vector<TrackId> gt_ids;
  std::vector<TrackId> pred_ids;
  Eigen::MatrixXd values;  // gt x pred
};

FrameSimilarity frame_similarity(std::span<const Detection> gt, std::span<const Detection> pred,
                                 const SimilaritySpec& spec);

/// Maximum-total-similarity matching restricted to pairs with similarity >= alpha.
FrameMatchSet match_gated(const FrameSimilarity& sim, double alpha);

/// Per-frame optimal gated matching of same-class ground truth and predictions.
FrameMatchSet match_frame(std::span<const Detection> gt, std::span<const Detection> pred,
                          double alpha, const SimilaritySpec& spec);

}  // namespace mtmc
