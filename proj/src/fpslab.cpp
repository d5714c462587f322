#include "mtmc/fpslab.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mtmc {

namespace {

std::string rate_label(double rate) {
  std::ostringstream os;
  os << rate;
  return os.str();
}

// Integer n with n * divisor == value (to 1e-9 relative), or 0.
long long exact_ratio(double value, double divisor) {
  const double ratio = value / divisor;
  const double rounded = std::round(ratio);
  if (rounded < 1 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) return 0;
  return static_cast<long long>(rounded);
}

}  // namespace

Sequence stride_subsample(const Sequence& seq, int keep_one_of) {
  if (keep_one_of < 1) throw InputError("stride must be >= 1");
  Sequence out;
  out.native_fps = seq.native_fps;
  out.scene_name = seq.scene_name;
  out.stride = seq.stride * keep_one_of;
  for (std::size_t pos = 0; pos < seq.frames.size(); pos += static_cast<std::size_t>(keep_one_of)) {
    out.frames.push_back(seq.frames[pos]);
  }
  return out;
}

int stride_for_rate(double native_fps, double target_fps) {
  if (!(native_fps > 0) || !(target_fps > 0)) throw InputError("frame rates must be > 0");
  const double n = std::round(native_fps / target_fps);
  if (n < 1 || exact_ratio(native_fps, n) == 0) {
    throw InputError("rate " + rate_label(target_fps) + " fps is not a keep-one-of-n stride of " +
                     rate_label(native_fps) + " fps");
  }
  return static_cast<int>(n);
}

EvalWindow controlled_window(const Sequence& gt, double native_fps, double eval_fps) {
  if (!(native_fps > 0) || !(eval_fps > 0)) throw InputError("frame rates must be > 0");
  const long long step = exact_ratio(native_fps, eval_fps);
  if (step == 0) {
    throw InputError("native rate " + rate_label(native_fps) + " fps is not divisible by evaluation rate " +
                     rate_label(eval_fps) + " fps");
  }
  EvalWindow window;
  window.f0 = eval_fps;
  for (std::size_t pos = 0; pos < gt.frames.size(); pos += static_cast<std::size_t>(step)) {
    window.frame_indices.push_back(gt.frames[pos].index);
  }
  return window;
}

Sequence truncate_frames(const Sequence& seq, std::size_t max_frames) {
  Sequence out = seq;
  if (max_frames > 0 && out.frames.size() > max_frames) out.frames.resize(max_frames);
  return out;
}

void SweepSpec::validate() const {
  if (inference_rates.empty()) throw InputError("sweep: no inference rates given");
  for (double r : inference_rates) stride_for_rate(native_fps, r);
  const double slowest = *std::min_element(inference_rates.begin(), inference_rates.end());
  if (eval_fps > slowest) {
    throw InputError("sweep: evaluation rate " + rate_label(eval_fps) + " fps exceeds the slowest inference rate " +
                     rate_label(slowest) + " fps");
  }
  eval.validate();
}

SweepTable fps_sweep(const Sequence& gt, const std::map<double, Sequence>& tracker_outputs, const SweepSpec& spec) {
  spec.validate();
  SweepTable table;
  table.window = controlled_window(gt, spec.native_fps, spec.eval_fps);

  std::vector<double> rates = spec.inference_rates;
  std::sort(rates.begin(), rates.end(), std::greater<>());
  rates.erase(std::unique(rates.begin(), rates.end()), rates.end());

  for (double rate : rates) {
    const auto it = tracker_outputs.find(rate);
    if (it == tracker_outputs.end()) throw InputError("sweep: no tracker output for " + rate_label(rate) + " fps");
    const Sequence& pred = it->second;

    std::vector<FrameIndex> missing;
    for (FrameIndex f : table.window.frame_indices) {
      if (pred.find_frame(f) == nullptr) missing.push_back(f);
    }
    if (!missing.empty()) {
      std::ostringstream os;
      os << "sweep: tracker output for " << rate_label(rate) << " fps is missing " << missing.size()
         << " window frame(s):";
      for (std::size_t i = 0; i < std::min<std::size_t>(missing.size(), 10); ++i) os << ' ' << missing[i];
      if (missing.size() > 10) os << " ...";
      throw InputError(os.str());
    }

    table.rows.push_back({rate, stride_for_rate(spec.native_fps, rate), class_report(gt, pred, table.window, spec.eval)});
  }
  return table;
}

}  // namespace mtmc
