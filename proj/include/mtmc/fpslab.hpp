#pragma once

#include "mtmc/datamodel.hpp"
#include "mtmc/metrics.hpp"

#include <map>
#include <string>
#include <vector>

namespace mtmc {

/// Keeps frame positions 0, n, 2n, ... of the ordered frame list. The returned
/// sequence's stride is multiplied by n, so effective_fps() drops by n.
Sequence stride_subsample(const Sequence& seq, int keep_one_of);

/// Keep-one-of-n factor that turns `native_fps` into `target_fps`.
/// Throws InputError unless n = round(native / target) divides native_fps.
int stride_for_rate(double native_fps, double target_fps);

/// Frame positions 0, s, 2s, ... of the ground truth with s = native / eval,
/// and f0 = eval_fps. Throws InputError when the rates do not divide.
EvalWindow controlled_window(const Sequence& gt, double native_fps, double eval_fps);

/// First `max_frames` frames of a sequence (0 keeps everything).
Sequence truncate_frames(const Sequence& seq, std::size_t max_frames);

struct SweepSpec {
  double native_fps = 30.0;
  std::vector<double> inference_rates;
  double eval_fps = 1.0;
  EvalOptions eval;

  void validate() const;
};

struct SweepRow {
  double rate = 0.0;
  int stride = 1;
  MetricsReport report;
};

struct SweepTable {
  EvalWindow window;
  /// Descending by rate.
  std::vector<SweepRow> rows;
};

/// Scores every rate's tracker output on the same controlled window.
SweepTable fps_sweep(const Sequence& gt, const std::map<double, Sequence>& tracker_outputs, const SweepSpec& spec);

}  // namespace mtmc
