#pragma once

#include "mtmc/datamodel.hpp"
#include "mtmc/matching.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mtmc {

// ---------------------------------------------------------------------------
// Identity persistence
// ---------------------------------------------------------------------------

/// Maximal stretch of consecutive window positions where a tracker id is
/// present and matched. `start` and `end` are inclusive window positions.
struct RunRecord {
  TrackId tracker_id = 0;
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t duration() const { return end - start + 1; }
  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// M_k over the window: 1 where tracker id k is in that frame's matched pairs.
/// Unmatched predictions (false positives) never set a 1.
std::vector<std::uint8_t> match_indicator_series(std::span<const FrameMatchSet> matches, TrackId k);

std::vector<RunRecord> extract_runs(std::span<const std::uint8_t> series, TrackId tracker_id = 0);

/// Runs of every tracker id, ordered by (tracker_id, start).
std::vector<RunRecord> collect_runs(std::span<const FrameMatchSet> matches);

/// Total run length in frames divided by (number of runs * f0); 0 when there are no runs.
double avg_track_dur(std::span<const FrameMatchSet> matches, double f0);

// ---------------------------------------------------------------------------
// HOTA family
// ---------------------------------------------------------------------------

struct PairKey {
  TrackId gt = 0;
  TrackId pred = 0;
  friend bool operator==(const PairKey&, const PairKey&) = default;
  friend auto operator<=>(const PairKey&, const PairKey&) = default;
};

struct PairKeyHash {
  std::size_t operator()(const PairKey& k) const noexcept {
    const auto a = static_cast<std::uint64_t>(k.gt);
    const auto b = static_cast<std::uint64_t>(k.pred);
    return static_cast<std::size_t>(a * 0x9E3779B97F4A7C15ULL ^ (b + 0x632BE59BD9B4E019ULL + (a << 6) + (a >> 2)));
  }
};

/// Detection and association tallies at one gate.
struct AssociationLedger {
  std::int64_t tp = 0;
  std::int64_t fn = 0;
  std::int64_t fp = 0;
  /// Frames in which each (gt, pred) pair is matched (TPA).
  std::unordered_map<PairKey, std::int64_t, PairKeyHash> pair_matches;
  /// Frames in which each gt / pred id is present.
  std::unordered_map<TrackId, std::int64_t> gt_presence;
  std::unordered_map<TrackId, std::int64_t> pred_presence;

  std::int64_t tpa(PairKey c) const;
  std::int64_t fna(PairKey c) const;
  std::int64_t fpa(PairKey c) const;
  /// A(c) = TPA / (TPA + FNA + FPA).
  double association(PairKey c) const;
};

AssociationLedger association_ledger(std::span<const FrameMatchSet> matches);

struct HotaComponents {
  double hota = 0.0;
  double deta = 0.0;
  double assa = 0.0;
  double loca = 0.0;
};

/// Conventions: an empty scene (TP + FN + FP = 0) scores 1 on every component;
/// TP = 0 otherwise scores 0 on every component.
HotaComponents hota_at_alpha(const AssociationLedger& ledger, std::span<const FrameMatchSet> matches);

/// 0.05, 0.10, ..., 0.95.
std::vector<double> default_alpha_grid();

struct HotaResult {
  HotaComponents mean;
  std::vector<HotaComponents> per_alpha;
};

/// Per-window-frame similarities of single-class sequences.
std::vector<FrameSimilarity> window_similarities(const Sequence& gt, const Sequence& pred,
                                                 const EvalWindow& window, const SimilaritySpec& spec);

std::vector<FrameMatchSet> match_window(std::span<const FrameSimilarity> similarities, double alpha);
std::vector<FrameMatchSet> match_window(const Sequence& gt, const Sequence& pred, const EvalWindow& window,
                                        const SimilaritySpec& spec, double alpha);

/// HOTA, DetA, AssA and LocA averaged over the alpha grid. The sequences must
/// hold a single class (see class_report for mixed scenes).
HotaResult hota(const Sequence& gt, const Sequence& pred, const EvalWindow& window, const SimilaritySpec& spec,
                std::span<const double> alpha_grid, int threads = 1);

/// 101-point interpolated average precision with greedy confidence-ordered
/// matching (each ground truth consumed once). Single-class input.
double detection_ap(const Sequence& gt, const Sequence& pred, const EvalWindow& window, const SimilaritySpec& spec,
                    double alpha);

// ---------------------------------------------------------------------------
// Post-processing
// ---------------------------------------------------------------------------

/// Convex region of the ground plane; boundary points are inside.
class Roi {
 public:
  static Roi rectangle(double x_min, double y_min, double x_max, double y_max);
  /// Vertices in either winding order; must be convex with non-zero area.
  static Roi polygon(std::vector<Eigen::Vector2d> vertices);

  bool contains(const Eigen::Vector2d& point) const;
  double area() const;
  const std::vector<Eigen::Vector2d>& vertices() const { return vertices_; }

 private:
  explicit Roi(std::vector<Eigen::Vector2d> ccw_vertices) : vertices_(std::move(ccw_vertices)) {}
  std::vector<Eigen::Vector2d> vertices_;
};

/// Keeps detections whose (x, y) center is inside `roi` (if given) and whose
/// confidence is at least `conf_threshold`. Frames are kept even if emptied.
Sequence postprocess_filter(const Sequence& seq, const std::optional<Roi>& roi, double conf_threshold);

/// Subset of a sequence holding one class; frame structure is preserved.
Sequence filter_class(const Sequence& seq, ClassId class_id);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct ClassMetrics {
  double hota = 0.0;
  double deta = 0.0;
  double assa = 0.0;
  double loca = 0.0;
  double avg_track_dur_seconds = 0.0;
  double ap = 0.0;
};

struct EvalOptions {
  SimilaritySpec similarity;
  std::vector<double> alpha_grid = default_alpha_grid();
  /// Gate used for AvgTrackDur.
  double dur_alpha = 0.5;
  /// Gate used for detection AP.
  double ap_alpha = 0.5;
  /// Class whose AvgTrackDur is singled out in reports.
  ClassId primary_class = 0;
  int threads = 1;

  void validate() const;
};

struct WindowSummary {
  std::size_t evaluated_frames = 0;
  std::size_t gt_frames = 0;
  FrameIndex first_frame = 0;
  FrameIndex last_frame = 0;
  double f0 = 1.0;
  double seconds = 0.0;
};

struct MetricsReport {
  std::map<ClassId, ClassMetrics> per_class;
  /// Unweighted mean over classes present in the ground truth.
  ClassMetrics class_average;
  WindowSummary window;
  std::vector<double> alpha_grid;
  double dur_alpha = 0.5;
  double ap_alpha = 0.5;
  SimilaritySpec similarity;
  ClassId primary_class = 0;
  std::optional<double> primary_avg_track_dur_seconds;
  /// Prediction classes absent from the ground truth; ignored for scoring.
  std::vector<ClassId> dropped_classes;
  std::vector<std::string> warnings;
};

MetricsReport class_report(const Sequence& gt, const Sequence& pred, const EvalWindow& window,
                           const EvalOptions& options);

/// Every ground-truth frame, scored at the native rate.
EvalWindow full_window(const Sequence& gt);

}  // namespace mtmc
