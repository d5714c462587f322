// Brute-force reference evaluator. Deliberately written against the metric
// definitions directly, without calling into matching/metrics.

#include "mtmc/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace mtmc {

namespace {

struct Obs {
  TrackId id;
  double x, y, len, wid;
  double confidence;
};

double oracle_similarity(const Obs& a, const Obs& b, const SimilaritySpec& spec) {
  if (spec.mode == SimilarityMode::center_distance) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double s = 1.0 - std::sqrt(dx * dx + dy * dy) / spec.d_max;
    return s > 0.0 ? s : 0.0;
  }
  if (a.x == b.x && a.y == b.y && a.len == b.len && a.wid == b.wid) return 1.0;
  const double ix = std::min(a.x + a.len / 2, b.x + b.len / 2) - std::max(a.x - a.len / 2, b.x - b.len / 2);
  const double iy = std::min(a.y + a.wid / 2, b.y + b.wid / 2) - std::max(a.y - a.wid / 2, b.y - b.wid / 2);
  if (ix <= 0 || iy <= 0) return 0.0;
  const double inter = ix * iy;
  const double iou = inter / (a.len * a.wid + b.len * b.wid - inter);
  return std::min(1.0, std::max(0.0, iou));
}

// Detections of one class at one frame, sorted by track id (for matching)
// and by (id, x, y, length, width) (for AP).
struct ClassFrame {
  std::vector<Obs> gt_sorted, pred_sorted;
  std::vector<Obs> gt_ranked, pred_ranked;
};

std::vector<Obs> gather(const Sequence& seq, FrameIndex index, ClassId c) {
  std::vector<Obs> out;
  for (const auto& frame : seq.frames) {
    if (frame.index != index) continue;
    for (const auto& d : frame.detections) {
      if (d.class_id != c) continue;
      out.push_back({d.track_id.value_or(-1), d.box.center.x(), d.box.center.y(), d.box.extent.y(), d.box.extent.x(),
                     d.confidence});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Obs& a, const Obs& b) {
    if (a.id != b.id) return a.id < b.id;
    if (a.x != b.x) return a.x < b.x;
    if (a.y != b.y) return a.y < b.y;
    if (a.len != b.len) return a.len < b.len;
    return a.wid < b.wid;
  });
  return out;
}

struct OracleMatch {
  std::vector<std::pair<int, int>> pairs;  // (gt position, pred position) in sorted order
  double score = -1.0;
};

// Depth-first over gt rows; each row tries preds ascending, then "unmatched".
// The first matching reaching the best score is lexicographically smallest.
void enumerate(const std::vector<std::vector<double>>& sim, double alpha, std::size_t row, std::vector<char>& used,
               std::vector<std::pair<int, int>>& current, double score, OracleMatch& best) {
  if (row == sim.size()) {
    if (score > best.score + 1e-9) {
      best.score = score;
      best.pairs = current;
    }
    return;
  }
  for (std::size_t j = 0; j < used.size(); ++j) {
    if (used[j] || sim[row][j] < alpha) continue;
    used[j] = 1;
    current.emplace_back(static_cast<int>(row), static_cast<int>(j));
    enumerate(sim, alpha, row + 1, used, current, score + sim[row][j], best);
    current.pop_back();
    used[j] = 0;
  }
  enumerate(sim, alpha, row + 1, used, current, score, best);
}

struct OracleFrameResult {
  std::vector<std::pair<TrackId, TrackId>> pairs;
  std::vector<double> sims;
  std::vector<TrackId> gt_ids, pred_ids;
};

OracleFrameResult oracle_match(const ClassFrame& f, double alpha, const SimilaritySpec& spec) {
  std::vector<std::vector<double>> sim(f.gt_sorted.size(), std::vector<double>(f.pred_sorted.size()));
  for (std::size_t i = 0; i < f.gt_sorted.size(); ++i) {
    for (std::size_t j = 0; j < f.pred_sorted.size(); ++j) sim[i][j] = oracle_similarity(f.gt_sorted[i], f.pred_sorted[j], spec);
  }
  OracleMatch best;
  std::vector<char> used(f.pred_sorted.size(), 0);
  std::vector<std::pair<int, int>> current;
  enumerate(sim, alpha, 0, used, current, 0.0, best);

  OracleFrameResult out;
  for (const auto& o : f.gt_sorted) out.gt_ids.push_back(o.id);
  for (const auto& o : f.pred_sorted) out.pred_ids.push_back(o.id);
  for (const auto& [i, j] : best.pairs) {
    out.pairs.emplace_back(f.gt_sorted[i].id, f.pred_sorted[j].id);
    out.sims.push_back(sim[i][j]);
  }
  return out;
}

struct OracleHota {
  double hota, deta, assa, loca;
};

OracleHota oracle_hota_alpha(const std::vector<OracleFrameResult>& frames) {
  long long tp = 0, fn = 0, fp = 0;
  for (const auto& f : frames) {
    tp += static_cast<long long>(f.pairs.size());
    fn += static_cast<long long>(f.gt_ids.size() - f.pairs.size());
    fp += static_cast<long long>(f.pred_ids.size() - f.pairs.size());
  }
  if (tp + fn + fp == 0) return {1.0, 1.0, 1.0, 1.0};
  if (tp == 0) return {0.0, 0.0, 0.0, 0.0};

  double assoc_total = 0.0;
  double sim_total = 0.0;
  for (const auto& f : frames) {
    for (std::size_t k = 0; k < f.pairs.size(); ++k) {
      const auto [g, p] = f.pairs[k];
      long long tpa = 0, fna = 0, fpa = 0;
      for (const auto& other : frames) {
        const bool g_present = std::find(other.gt_ids.begin(), other.gt_ids.end(), g) != other.gt_ids.end();
        const bool p_present = std::find(other.pred_ids.begin(), other.pred_ids.end(), p) != other.pred_ids.end();
        const bool together = std::find(other.pairs.begin(), other.pairs.end(), std::make_pair(g, p)) != other.pairs.end();
        if (together) ++tpa;
        if (g_present && !together) ++fna;
        if (p_present && !together) ++fpa;
      }
      assoc_total += static_cast<double>(tpa) / static_cast<double>(tpa + fna + fpa);
      sim_total += f.sims[k];
    }
  }
  const double deta = static_cast<double>(tp) / static_cast<double>(tp + fn + fp);
  const double assa = assoc_total / static_cast<double>(tp);
  return {std::sqrt(deta * assa), deta, assa, sim_total / static_cast<double>(tp)};
}

double oracle_duration(const std::vector<OracleFrameResult>& frames, double f0) {
  std::set<TrackId> ids;
  for (const auto& f : frames) {
    for (const auto& pr : f.pairs) ids.insert(pr.second);
  }
  long long total = 0, runs = 0;
  for (TrackId k : ids) {
    std::vector<int> m;
    for (const auto& f : frames) {
      bool hit = false;
      for (const auto& pr : f.pairs) hit = hit || pr.second == k;
      m.push_back(hit ? 1 : 0);
    }
    for (std::size_t t = 0; t < m.size(); ++t) {
      if (m[t] == 1 && (t == 0 || m[t - 1] == 0)) {
        std::size_t e = t;
        while (e + 1 < m.size() && m[e + 1] == 1) ++e;
        total += static_cast<long long>(e - t + 1);
        ++runs;
      }
    }
  }
  return runs == 0 ? 0.0 : static_cast<double>(total) / (static_cast<double>(runs) * f0);
}

double oracle_ap(const std::vector<ClassFrame>& frames, const SimilaritySpec& spec, double alpha) {
  struct Cand {
    double conf;
    std::size_t t, i;
  };
  std::vector<Cand> cands;
  std::size_t n_gt = 0;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    n_gt += frames[t].gt_ranked.size();
    for (std::size_t i = 0; i < frames[t].pred_ranked.size(); ++i) {
      cands.push_back({frames[t].pred_ranked[i].confidence, t, i});
    }
  }
  if (n_gt == 0) return cands.empty() ? 1.0 : 0.0;
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.conf != b.conf) return a.conf > b.conf;
    if (a.t != b.t) return a.t < b.t;
    return a.i < b.i;
  });
  std::vector<std::vector<bool>> taken(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) taken[t].assign(frames[t].gt_ranked.size(), false);

  std::vector<double> precision, recall_num;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < cands.size(); ++r) {
    const auto& c = cands[r];
    const Obs& det = frames[c.t].pred_ranked[c.i];
    int pick = -1;
    double pick_sim = 0.0;
    for (std::size_t g = 0; g < frames[c.t].gt_ranked.size(); ++g) {
      if (taken[c.t][g]) continue;
      const double s = oracle_similarity(frames[c.t].gt_ranked[g], det, spec);
      if (s >= alpha && (pick < 0 || s > pick_sim)) {
        pick = static_cast<int>(g);
        pick_sim = s;
      }
    }
    if (pick >= 0) {
      taken[c.t][static_cast<std::size_t>(pick)] = true;
      ++hits;
    }
    precision.push_back(static_cast<double>(hits) / static_cast<double>(r + 1));
    recall_num.push_back(static_cast<double>(hits));
  }
  double total = 0.0;
  for (int k = 0; k <= 100; ++k) {
    double best = 0.0;
    for (std::size_t r = 0; r < precision.size(); ++r) {
      if (recall_num[r] * 100.0 >= static_cast<double>(k) * static_cast<double>(n_gt)) best = std::max(best, precision[r]);
    }
    total += best;
  }
  return total / 101.0;
}

}  // namespace

MetricsReport oracle_metrics(const Sequence& gt, const Sequence& pred, const EvalWindow& window,
                             const EvalOptions& options) {
  validate_window(window, gt);
  options.validate();

  auto count_at = [](const Sequence& seq, FrameIndex index) {
    for (const auto& frame : seq.frames) {
      if (frame.index == index) return frame.detections.size();
    }
    return std::size_t{0};
  };
  std::set<ClassId> gt_classes, pred_classes;
  for (FrameIndex f : window.frame_indices) {
    if (count_at(gt, f) > kOracleMaxPerFrame || count_at(pred, f) > kOracleMaxPerFrame) {
      throw InputError("oracle_metrics: frame " + std::to_string(f) + " exceeds the enumeration bound of " +
                       std::to_string(kOracleMaxPerFrame) + " detections");
    }
    for (const auto& frame : gt.frames) {
      if (frame.index == f) {
        for (const auto& d : frame.detections) gt_classes.insert(d.class_id);
      }
    }
    for (const auto& frame : pred.frames) {
      if (frame.index == f) {
        for (const auto& d : frame.detections) pred_classes.insert(d.class_id);
      }
    }
  }

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
  report.window.seconds = static_cast<double>(window.frame_indices.size()) / window.f0;
  for (ClassId c : pred_classes) {
    if (!gt_classes.count(c)) report.dropped_classes.push_back(c);
  }

  for (ClassId c : gt_classes) {
    std::vector<ClassFrame> frames;
    for (FrameIndex f : window.frame_indices) {
      ClassFrame cf;
      cf.gt_ranked = gather(gt, f, c);
      cf.pred_ranked = gather(pred, f, c);
      cf.gt_sorted = cf.gt_ranked;
      cf.pred_sorted = cf.pred_ranked;
      auto by_id = [](const Obs& a, const Obs& b) { return a.id < b.id; };
      std::stable_sort(cf.gt_sorted.begin(), cf.gt_sorted.end(), by_id);
      std::stable_sort(cf.pred_sorted.begin(), cf.pred_sorted.end(), by_id);
      frames.push_back(std::move(cf));
    }

    double h = 0, d = 0, a = 0, l = 0;
    for (double alpha : options.alpha_grid) {
      std::vector<OracleFrameResult> matched;
      for (const auto& cf : frames) matched.push_back(oracle_match(cf, alpha, options.similarity));
      const OracleHota r = oracle_hota_alpha(matched);
      h += r.hota;
      d += r.deta;
      a += r.assa;
      l += r.loca;
    }
    const auto n = static_cast<double>(options.alpha_grid.size());

    std::vector<OracleFrameResult> at_dur;
    for (const auto& cf : frames) at_dur.push_back(oracle_match(cf, options.dur_alpha, options.similarity));

    ClassMetrics m;
    m.hota = h / n;
    m.deta = d / n;
    m.assa = a / n;
    m.loca = l / n;
    m.avg_track_dur_seconds = oracle_duration(at_dur, window.f0);
    m.ap = oracle_ap(frames, options.similarity, options.ap_alpha);
    report.per_class[c] = m;
  }

  if (report.per_class.empty()) {
    const double rate = pred_classes.empty() ? 1.0 : 0.0;
    report.class_average = {rate, rate, rate, rate, 0.0, rate};
  } else {
    ClassMetrics avg;
    for (const auto& [c, m] : report.per_class) {
      avg.hota += m.hota / static_cast<double>(report.per_class.size());
      avg.deta += m.deta / static_cast<double>(report.per_class.size());
      avg.assa += m.assa / static_cast<double>(report.per_class.size());
      avg.loca += m.loca / static_cast<double>(report.per_class.size());
      avg.avg_track_dur_seconds += m.avg_track_dur_seconds / static_cast<double>(report.per_class.size());
      avg.ap += m.ap / static_cast<double>(report.per_class.size());
    }
    report.class_average = avg;
  }
  if (report.per_class.count(options.primary_class)) {
    report.primary_avg_track_dur_seconds = report.per_class[options.primary_class].avg_track_dur_seconds;
  }
  return report;
}

}  // namespace mtmc
