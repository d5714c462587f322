#include "mtmc/matching.hpp"

#include <numeric>
#include <stdexcept>

namespace mtmc {

void SimilaritySpec::validate() const {
  if (mode == SimilarityMode::center_distance && !(d_max > 0)) {
    throw InputError("similarity: d_max must be > 0 for center_distance");
  }
}

std::string to_string(SimilarityMode mode) {
  return mode == SimilarityMode::bev_iou ? "bev_iou" : "center_distance";
}

SimilarityMode similarity_mode_from_string(const std::string& name) {
  if (name == "bev_iou") return SimilarityMode::bev_iou;
  if (name == "center_distance") return SimilarityMode::center_distance;
  throw InputError("unknown similarity mode '" + name + "' (expected bev_iou or center_distance)");
}

namespace {

std::vector<std::size_t> order_by_track_id(std::span<const Detection> dets, const char* side) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (const auto& d : dets) {
    if (!d.track_id) throw InputError(std::string("match_frame: ") + side + " detection missing track_id");
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return *dets[a].track_id < *dets[b].track_id; });
  return order;
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // The smaller root wins so representatives are deterministic.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

FrameSimilarity frame_similarity(std::span<const Detection> gt, std::span<const Detection> pred,
                                 const SimilaritySpec& spec) {
  const auto gt_order = order_by_track_id(gt, "ground-truth");
  const auto pred_order = order_by_track_id(pred, "predicted");

  FrameSimilarity out;
  out.gt_ids.reserve(gt.size());
  out.pred_ids.reserve(pred.size());
  for (std::size_t i : gt_order) out.gt_ids.push_back(*gt[i].track_id);
  for (std::size_t j : pred_order) out.pred_ids.push_back(*pred[j].track_id);

  out.values.resize(static_cast<Eigen::Index>(gt.size()), static_cast<Eigen::Index>(pred.size()));
  for (std::size_t i = 0; i < gt_order.size(); ++i) {
    for (std::size_t j = 0; j < pred_order.size(); ++j) {
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          similarity(gt[gt_order[i]].box, pred[pred_order[j]].box, spec);
    }
  }
  return out;
}

FrameMatchSet match_gated(const FrameSimilarity& sim, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("match: alpha must lie in (0, 1]");
  const auto n = static_cast<std::size_t>(sim.values.rows());
  const auto m = static_cast<std::size_t>(sim.values.cols());

  // Gated pairs split the frame into independent components; an optimal
  // matching of the frame is a union of optimal matchings of its components.
  DisjointSets sets(n + m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (sim.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) >= alpha) sets.unite(i, n + j);
    }
  }
  std::vector<std::vector<std::size_t>> comp_gt(n + m), comp_pred(n + m);
  for (std::size_t i = 0; i < n; ++i) comp_gt[sets.find(i)].push_back(i);
  for (std::size_t j = 0; j < m; ++j) comp_pred[sets.find(n + j)].push_back(j);

  std::vector<char> gt_matched(n, 0), pred_matched(m, 0);
  std::vector<std::pair<std::size_t, std::size_t>> matched;

  for (std::size_t root = 0; root < n + m; ++root) {
    const auto& rows = comp_gt[root];
    const auto& cols = comp_pred[root];
    if (rows.empty() || cols.empty()) continue;
    if (rows.size() == 1 && cols.size() == 1) {
      matched.emplace_back(rows[0], cols[0]);
      continue;
    }
    // Square problem over gt + pred "leave unmatched" slots:
    //   rows: gt..., pred-dummy...   cols: pred..., gt-dummy...
    // Leaving one side unmatched costs 0.5, so a pair (cost 1 - s) beats
    // leaving both sides open exactly when s > 0; total cost is
    // (g + p) / 2 - sum(s), minimized by maximizing total similarity.
    const auto g = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(cols.size());
    const double forbidden = 2.0 * static_cast<double>(std::max(g, p)) + 1.0;
    Eigen::MatrixXd cost = Eigen::MatrixXd::Constant(g + p, g + p, forbidden);
    for (Eigen::Index r = 0; r < g; ++r) {
      for (Eigen::Index c = 0; c < p; ++c) {
        const double s = sim.values(static_cast<Eigen::Index>(rows[r]), static_cast<Eigen::Index>(cols[c]));
        if (s >= alpha) cost(r, c) = 1.0 - s;
      }
      cost(r, p + r) = 0.5;
    }
    for (Eigen::Index c = 0; c < p; ++c) cost(g + c, c) = 0.5;
    cost.bottomRightCorner(p, g).setZero();

    for (const auto& [r, c] : hungarian(cost)) {
      if (r >= g || c >= p) continue;
      const std::size_t i = rows[r];
      const std::size_t j = cols[c];
      if (sim.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) >= alpha) matched.emplace_back(i, j);
    }
  }

  std::sort(matched.begin(), matched.end());
  FrameMatchSet out;
  out.pairs.reserve(matched.size());
  for (const auto& [i, j] : matched) {
    gt_matched[i] = 1;
    pred_matched[j] = 1;
    out.pairs.push_back({sim.gt_ids[i], sim.pred_ids[j],
                         sim.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!gt_matched[i]) out.unmatched_gt.push_back(sim.gt_ids[i]);
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (!pred_matched[j]) out.unmatched_pred.push_back(sim.pred_ids[j]);
  }
  return out;
}

FrameMatchSet match_frame(std::span<const Detection> gt, std::span<const Detection> pred,
                          double alpha, const SimilaritySpec& spec) {
  return match_gated(frame_similarity(gt, pred, spec), alpha);
}

}  // namespace mtmc
