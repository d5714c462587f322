#include "mtmc/metrics.hpp"

#include "mtmc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace mtmc {

// --- identity persistence --------------------------------------------------

std::vector<std::uint8_t> match_indicator_series(std::span<const FrameMatchSet> matches, TrackId k) {
  std::vector<std::uint8_t> series(matches.size(), 0);
  for (std::size_t t = 0; t < matches.size(); ++t) {
    for (const auto& pair : matches[t].pairs) {
      if (pair.pred_id == k) {
        series[t] = 1;
        break;
      }
    }
  }
  return series;
}

std::vector<RunRecord> extract_runs(std::span<const std::uint8_t> series, TrackId tracker_id) {
  std::vector<RunRecord> runs;
  std::size_t t = 0;
  while (t < series.size()) {
    if (!series[t]) {
      ++t;
      continue;
    }
    const std::size_t start = t;
    while (t + 1 < series.size() && series[t + 1]) ++t;
    runs.push_back({tracker_id, start, t});
    ++t;
  }
  return runs;
}

std::vector<RunRecord> collect_runs(std::span<const FrameMatchSet> matches) {
  std::map<TrackId, std::vector<RunRecord>> by_id;
  for (std::size_t t = 0; t < matches.size(); ++t) {
    for (const auto& pair : matches[t].pairs) {
      auto& runs = by_id[pair.pred_id];
      if (!runs.empty() && runs.back().end + 1 == t) {
        runs.back().end = t;
      } else {
        runs.push_back({pair.pred_id, t, t});
      }
    }
  }
  std::vector<RunRecord> out;
  for (auto& [id, runs] : by_id) out.insert(out.end(), runs.begin(), runs.end());
  return out;
}

double avg_track_dur(std::span<const FrameMatchSet> matches, double f0) {
  if (!(f0 > 0)) throw std::invalid_argument("avg_track_dur: f0 must be > 0");
  // Every matched (id, frame) instance belongs to exactly one run, so the run
  // lengths sum to the number of matched instances.
  std::unordered_map<TrackId, std::size_t> last_matched;
  std::int64_t total_frames = 0;
  std::int64_t run_count = 0;
  for (std::size_t t = 0; t < matches.size(); ++t) {
    for (const auto& pair : matches[t].pairs) {
      ++total_frames;
      auto [it, inserted] = last_matched.try_emplace(pair.pred_id, t);
      if (inserted || it->second + 1 != t) ++run_count;
      it->second = t;
    }
  }
  if (run_count == 0) return 0.0;
  return static_cast<double>(total_frames) / (static_cast<double>(run_count) * f0);
}

// --- HOTA family ------------------------------------------------------------

std::int64_t AssociationLedger::tpa(PairKey c) const {
  const auto it = pair_matches.find(c);
  return it == pair_matches.end() ? 0 : it->second;
}

std::int64_t AssociationLedger::fna(PairKey c) const {
  const auto it = gt_presence.find(c.gt);
  return (it == gt_presence.end() ? 0 : it->second) - tpa(c);
}

std::int64_t AssociationLedger::fpa(PairKey c) const {
  const auto it = pred_presence.find(c.pred);
  return (it == pred_presence.end() ? 0 : it->second) - tpa(c);
}

double AssociationLedger::association(PairKey c) const {
  const std::int64_t hits = tpa(c);
  const std::int64_t denom = hits + fna(c) + fpa(c);
  return denom == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(denom);
}

AssociationLedger association_ledger(std::span<const FrameMatchSet> matches) {
  AssociationLedger ledger;
  for (const auto& frame : matches) {
    ledger.tp += static_cast<std::int64_t>(frame.pairs.size());
    ledger.fn += static_cast<std::int64_t>(frame.unmatched_gt.size());
    ledger.fp += static_cast<std::int64_t>(frame.unmatched_pred.size());
    for (const auto& pair : frame.pairs) {
      ++ledger.pair_matches[{pair.gt_id, pair.pred_id}];
      ++ledger.gt_presence[pair.gt_id];
      ++ledger.pred_presence[pair.pred_id];
    }
    for (TrackId g : frame.unmatched_gt) ++ledger.gt_presence[g];
    for (TrackId p : frame.unmatched_pred) ++ledger.pred_presence[p];
  }
  return ledger;
}

HotaComponents hota_at_alpha(const AssociationLedger& ledger, std::span<const FrameMatchSet> matches) {
  const std::int64_t total = ledger.tp + ledger.fn + ledger.fp;
  if (total == 0) return {1.0, 1.0, 1.0, 1.0};
  if (ledger.tp == 0) return {};

  HotaComponents out;
  const auto tp = static_cast<double>(ledger.tp);
  out.deta = tp / static_cast<double>(total);

  // Fixed summation order keeps the result independent of hash-map layout.
  std::vector<std::pair<PairKey, std::int64_t>> pairs(ledger.pair_matches.begin(), ledger.pair_matches.end());
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double assoc_sum = 0.0;
  for (const auto& [key, hits] : pairs) assoc_sum += static_cast<double>(hits) * ledger.association(key);
  out.assa = assoc_sum / tp;

  double loc_sum = 0.0;
  for (const auto& frame : matches) {
    for (const auto& pair : frame.pairs) loc_sum += pair.similarity;
  }
  out.loca = loc_sum / tp;
  out.hota = std::sqrt(out.deta * out.assa);
  return out;
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 19; ++k) grid.push_back(k / 20.0);
  return grid;
}

namespace {

const std::vector<Detection>& detections_at(const Sequence& seq, FrameIndex index) {
  static const std::vector<Detection> kEmpty;
  const Frame* frame = seq.find_frame(index);
  return frame ? frame->detections : kEmpty;
}

void require_single_class(const Sequence& gt, const Sequence& pred, const EvalWindow& window, const char* what) {
  std::optional<ClassId> seen;
  auto check = [&](const Sequence& seq) {
    for (FrameIndex f : window.frame_indices) {
      for (const auto& d : detections_at(seq, f)) {
        if (seen && *seen != d.class_id) {
          throw InputError(std::string(what) + ": input mixes classes " + std::to_string(*seen) + " and " +
                           std::to_string(d.class_id) + "; partition by class first");
        }
        seen = d.class_id;
      }
    }
  };
  check(gt);
  check(pred);
}

HotaComponents mean_of(std::span<const HotaComponents> values) {
  HotaComponents sum;
  for (const auto& v : values) {
    sum.hota += v.hota;
    sum.deta += v.deta;
    sum.assa += v.assa;
    sum.loca += v.loca;
  }
  const auto n = static_cast<double>(values.size());
  return {sum.hota / n, sum.deta / n, sum.assa / n, sum.loca / n};
}

void validate_alpha(double alpha, const char* what) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InputError(std::string(what) + " must lie in (0, 1]");
}

}  // namespace

std::vector<FrameSimilarity> window_similarities(const Sequence& gt, const Sequence& pred,
                                                 const EvalWindow& window, const SimilaritySpec& spec) {
  std::vector<FrameSimilarity> out;
  out.reserve(window.frame_indices.size());
  for (FrameIndex f : window.frame_indices) {
    out.push_back(frame_similarity(detections_at(gt, f), detections_at(pred, f), spec));
  }
  return out;
}

std::vector<FrameMatchSet> match_window(std::span<const FrameSimilarity> similarities, double alpha) {
  std::vector<FrameMatchSet> out;
  out.reserve(similarities.size());
  for (const auto& s : similarities) out.push_back(match_gated(s, alpha));
  return out;
}

std::vector<FrameMatchSet> match_window(const Sequence& gt, const Sequence& pred, const EvalWindow& window,
                                        const SimilaritySpec& spec, double alpha) {
  const auto sims = window_similarities(gt, pred, window, spec);
  return match_window(sims, alpha);
}

HotaResult hota(const Sequence& gt, const Sequence& pred, const EvalWindow& window, const SimilaritySpec& spec,
                std::span<const double> alpha_grid, int threads) {
  if (alpha_grid.empty()) throw InputError("alpha grid is empty");
  for (double a : alpha_grid) validate_alpha(a, "alpha grid value");
  require_single_class(gt, pred, window, "hota");

  const auto sims = window_similarities(gt, pred, window, spec);
  HotaResult result;
  result.per_alpha.resize(alpha_grid.size());
  parallel_for(alpha_grid.size(), threads, [&](std::size_t i) {
    const auto matches = match_window(sims, alpha_grid[i]);
    result.per_alpha[i] = hota_at_alpha(association_ledger(matches), matches);
  });
  result.mean = mean_of(result.per_alpha);
  return result;
}

namespace {

std::vector<const Detection*> canonical_order(std::span<const Detection> dets) {
  std::vector<const Detection*> out;
  for (const auto& d : dets) out.push_back(&d);
  auto key = [](const Detection* d) {
    return std::make_tuple(d->track_id.value_or(-1), d->box.x(), d->box.y(), d->box.length(), d->box.width());
  };
  std::stable_sort(out.begin(), out.end(), [&](const Detection* a, const Detection* b) { return key(a) < key(b); });
  return out;
}

}  // namespace

double detection_ap(const Sequence& gt, const Sequence& pred, const EvalWindow& window, const SimilaritySpec& spec,
                    double alpha) {
  validate_alpha(alpha, "AP alpha");
  require_single_class(gt, pred, window, "detection_ap");

  struct Ranked {
    double confidence;
    std::size_t position;
    std::size_t index;
  };
  // Per-frame canonical order, so ties never depend on file order.
  std::vector<std::vector<const Detection*>> gt_order(window.frame_indices.size());
  std::vector<std::vector<const Detection*>> pred_order(window.frame_indices.size());
  std::vector<Ranked> ranked;
  std::size_t gt_total = 0;
  for (std::size_t t = 0; t < window.frame_indices.size(); ++t) {
    gt_order[t] = canonical_order(detections_at(gt, window.frame_indices[t]));
    pred_order[t] = canonical_order(detections_at(pred, window.frame_indices[t]));
    gt_total += gt_order[t].size();
    for (std::size_t i = 0; i < pred_order[t].size(); ++i) ranked.push_back({pred_order[t][i]->confidence, t, i});
  }
  if (gt_total == 0) return ranked.empty() ? 1.0 : 0.0;
  if (ranked.empty()) return 0.0;
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.position != b.position) return a.position < b.position;
    return a.index < b.index;
  });

  std::vector<std::vector<char>> consumed(window.frame_indices.size());
  for (std::size_t t = 0; t < window.frame_indices.size(); ++t) consumed[t].assign(gt_order[t].size(), 0);

  std::vector<std::size_t> cumulative_tp(ranked.size());
  std::size_t tp = 0;
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    const auto& cand = ranked[r];
    const auto& gts = gt_order[cand.position];
    const Detection& det = *pred_order[cand.position][cand.index];
    std::optional<std::size_t> best;
    double best_sim = -1.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (consumed[cand.position][g]) continue;
      const double s = similarity(gts[g]->box, det.box, spec);
      if (s >= alpha && s > best_sim) {
        best_sim = s;
        best = g;
      }
    }
    if (best) {
      consumed[cand.position][*best] = 1;
      ++tp;
    }
    cumulative_tp[r] = tp;
  }

  // Interpolated precision: best precision at this rank or any later one.
  std::vector<double> precision(ranked.size());
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    precision[r] = static_cast<double>(cumulative_tp[r]) / static_cast<double>(r + 1);
  }
  for (std::size_t r = ranked.size() - 1; r > 0; --r) precision[r - 1] = std::max(precision[r - 1], precision[r]);

  double sum = 0.0;
  std::size_t r = 0;
  for (std::size_t k = 0; k <= 100; ++k) {
    // recall >= k / 100, compared in integers.
    while (r < ranked.size() && cumulative_tp[r] * 100 < k * gt_total) ++r;
    if (r == ranked.size()) break;
    sum += precision[r];
  }
  return sum / 101.0;
}

// --- post-processing --------------------------------------------------------

namespace {

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

double signed_area(const std::vector<Eigen::Vector2d>& v) {
  double twice = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) twice += cross(v[i], v[(i + 1) % v.size()]);
  return twice / 2.0;
}

}  // namespace

Roi Roi::rectangle(double x_min, double y_min, double x_max, double y_max) {
  if (!(x_max > x_min) || !(y_max > y_min)) throw InputError("roi: rectangle has zero area");
  return Roi({{x_min, y_min}, {x_max, y_min}, {x_max, y_max}, {x_min, y_max}});
}

Roi Roi::polygon(std::vector<Eigen::Vector2d> vertices) {
  if (vertices.size() < 3) throw InputError("roi: polygon needs at least 3 vertices");
  for (const auto& v : vertices) {
    if (!v.allFinite()) throw InputError("roi: non-finite vertex");
  }
  const double area = signed_area(vertices);
  if (!(std::abs(area) > 0.0)) throw InputError("roi: polygon has zero area");
  if (area < 0) std::reverse(vertices.begin(), vertices.end());
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d e0 = vertices[(i + 1) % n] - vertices[i];
    const Eigen::Vector2d e1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
    if (cross(e0, e1) < 0) throw InputError("roi: polygon is not convex");
  }
  return Roi(std::move(vertices));
}

bool Roi::contains(const Eigen::Vector2d& point) const {
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d edge = vertices_[(i + 1) % n] - vertices_[i];
    if (cross(edge, point - vertices_[i]) < 0) return false;
  }
  return true;
}

double Roi::area() const { return signed_area(vertices_); }

Sequence postprocess_filter(const Sequence& seq, const std::optional<Roi>& roi, double conf_threshold) {
  Sequence out = seq;
  for (auto& frame : out.frames) {
    std::erase_if(frame.detections, [&](const Detection& d) {
      if (d.confidence < conf_threshold) return true;
      return roi && !roi->contains(d.box.center.head<2>());
    });
  }
  return out;
}

Sequence filter_class(const Sequence& seq, ClassId class_id) {
  Sequence out = seq;
  for (auto& frame : out.frames) {
    std::erase_if(frame.detections, [&](const Detection& d) { return d.class_id != class_id; });
  }
  return out;
}

// --- reports ---------------------------------------------------------------

void EvalOptions::validate() const {
  similarity.validate();
  if (alpha_grid.empty()) throw InputError("alpha_grid must not be empty");
  for (double a : alpha_grid) {
    if (!(a > 0.0 && a < 1.0)) throw InputError("alpha_grid values must lie in (0, 1)");
  }
  validate_alpha(dur_alpha, "dur_alpha");
  validate_alpha(ap_alpha, "ap_alpha");
}

EvalWindow full_window(const Sequence& gt) {
  EvalWindow window;
  window.f0 = gt.effective_fps();
  for (const auto& f : gt.frames) window.frame_indices.push_back(f.index);
  return window;
}

MetricsReport class_report(const Sequence& gt, const Sequence& pred, const EvalWindow& window,
                           const EvalOptions& options) {
  options.validate();
  validate_window(window, gt);

  MetricsReport report;
  report.alpha_grid = options.alpha_grid;
  report.dur_alpha = options.dur_alpha;
  report.ap_alpha = options.ap_alpha;
  report.similarity = options.similarity;
  report.primary_class = options.primary_class;
  report.window.evaluated_frames = window.frame_indices.size();
  report.window.gt_frames = gt.frames.size();
  report.window.first_frame = window.frame_indices.front();
  report.window.last_frame = window.frame_indices.back();
  report.window.f0 = window.f0;
  report.window.seconds = window.seconds();

  std::set<ClassId> gt_classes, pred_classes;
  for (FrameIndex f : window.frame_indices) {
    for (const auto& d : detections_at(gt, f)) gt_classes.insert(d.class_id);
    for (const auto& d : detections_at(pred, f)) pred_classes.insert(d.class_id);
  }
  for (ClassId c : pred_classes) {
    if (!gt_classes.contains(c)) {
      report.dropped_classes.push_back(c);
      report.warnings.push_back("predictions of class " + std::to_string(c) +
                                " have no ground truth in the window and were ignored");
    }
  }

  for (ClassId c : gt_classes) {
    const Sequence gt_c = filter_class(gt, c);
    const Sequence pred_c = filter_class(pred, c);
    const auto sims = window_similarities(gt_c, pred_c, window, options.similarity);

    std::vector<HotaComponents> per_alpha(options.alpha_grid.size());
    parallel_for(per_alpha.size(), options.threads, [&](std::size_t i) {
      const auto matches = match_window(sims, options.alpha_grid[i]);
      per_alpha[i] = hota_at_alpha(association_ledger(matches), matches);
    });
    const HotaComponents mean = mean_of(per_alpha);

    ClassMetrics m;
    m.hota = mean.hota;
    m.deta = mean.deta;
    m.assa = mean.assa;
    m.loca = mean.loca;
    m.avg_track_dur_seconds = avg_track_dur(match_window(sims, options.dur_alpha), window.f0);
    m.ap = detection_ap(gt_c, pred_c, window, options.similarity, options.ap_alpha);
    report.per_class.emplace(c, m);
  }

  if (report.per_class.empty()) {
    // Nothing to score; mirror the empty-scene convention of the rate metrics.
    const bool empty = pred_classes.empty();
    const double rate = empty ? 1.0 : 0.0;
    report.class_average = {rate, rate, rate, rate, 0.0, rate};
    report.warnings.push_back("ground truth has no detections in the evaluation window");
  } else {
    ClassMetrics sum;
    for (const auto& [c, m] : report.per_class) {
      sum.hota += m.hota;
      sum.deta += m.deta;
      sum.assa += m.assa;
      sum.loca += m.loca;
      sum.avg_track_dur_seconds += m.avg_track_dur_seconds;
      sum.ap += m.ap;
    }
    const auto n = static_cast<double>(report.per_class.size());
    report.class_average = {sum.hota / n, sum.deta / n, sum.assa / n, sum.loca / n,
                            sum.avg_track_dur_seconds / n, sum.ap / n};
  }

  if (const auto it = report.per_class.find(options.primary_class); it != report.per_class.end()) {
    report.primary_avg_track_dur_seconds = it->second.avg_track_dur_seconds;
  }
  return report;
}

}  // namespace mtmc
