#include "mtmc/datamodel.hpp"

#include <algorithm>
#include <numbers>
#include <set>
#include <sstream>
#include <utility>

namespace mtmc {

const Frame* Sequence::find_frame(FrameIndex index) const {
  auto it = std::lower_bound(frames.begin(), frames.end(), index,
                             [](const Frame& f, FrameIndex i) { return f.index < i; });
  if (it == frames.end() || it->index != index) return nullptr;
  return &*it;
}

std::size_t Sequence::detection_count() const {
  std::size_t n = 0;
  for (const auto& f : frames) n += f.detections.size();
  return n;
}

namespace {

void check_detection(const Detection& det, FrameIndex frame, SequenceRole role,
                     std::vector<Violation>& out) {
  auto report = [&](std::string field, std::string message) {
    out.push_back({frame, std::move(field), std::move(message)});
  };
  const Box3D& b = det.box;
  if (!b.center.allFinite()) report("center", "non-finite box center");
  if (!b.extent.allFinite()) report("extent", "non-finite box extent");
  if (!std::isfinite(b.yaw)) {
    report("yaw", "non-finite yaw");
  } else if (b.yaw < -std::numbers::pi || b.yaw >= std::numbers::pi) {
    report("yaw", "yaw outside [-pi, pi)");
  }
  if (b.width() <= 0) report("width", "width must be > 0");
  if (b.length() <= 0) report("length", "length must be > 0");
  if (b.height() <= 0) report("height", "height must be > 0");
  if (det.class_id < 0) report("class_id", "class_id must be non-negative");
  if (!(det.confidence >= 0.0 && det.confidence <= 1.0)) {
    report("confidence", "confidence outside [0, 1]");
  }
  if (det.track_id && *det.track_id < 0) report("track_id", "track_id must be non-negative");
  if (!det.track_id && (role == SequenceRole::ground_truth || role == SequenceRole::tracker_output)) {
    report("track_id", "missing track_id");
  }
  if (det.velocity && !det.velocity->allFinite()) report("velocity", "non-finite velocity");
}

}  // namespace

std::vector<Violation> validate_sequence(const Sequence& seq, SequenceRole role) {
  std::vector<Violation> out;
  if (!(seq.native_fps > 0) || !std::isfinite(seq.native_fps)) {
    out.push_back({-1, "native_fps", "native_fps must be a positive finite number"});
  }
  if (seq.stride < 1) out.push_back({-1, "stride", "stride must be >= 1"});

  std::optional<FrameIndex> previous;
  for (const auto& frame : seq.frames) {
    if (frame.index < 0) out.push_back({frame.index, "frame_index", "negative frame index"});
    if (previous && frame.index <= *previous) {
      out.push_back({frame.index, "frame_index", "frame indices must be strictly increasing"});
    }
    previous = frame.index;

    std::set<std::pair<TrackId, ClassId>> seen;
    for (const auto& det : frame.detections) {
      check_detection(det, frame.index, role, out);
      if (det.track_id && !seen.emplace(*det.track_id, det.class_id).second) {
        out.push_back({frame.index, "track_id",
                       "duplicate (track_id, class_id) = (" + std::to_string(*det.track_id) + ", " +
                           std::to_string(det.class_id) + ")"});
      }
    }
  }
  return out;
}

void validate_window(const EvalWindow& window, const Sequence& gt) {
  if (!(window.f0 > 0) || !std::isfinite(window.f0)) {
    throw InputError("evaluation window: f0 must be a positive finite number");
  }
  if (window.frame_indices.empty()) throw InputError("evaluation window is empty");
  for (std::size_t i = 0; i < window.frame_indices.size(); ++i) {
    const FrameIndex f = window.frame_indices[i];
    if (i > 0 && f <= window.frame_indices[i - 1]) {
      throw InputError("evaluation window frames must be strictly increasing");
    }
    if (gt.find_frame(f) == nullptr) {
      throw InputError("evaluation window frame " + std::to_string(f) +
                       " is not a ground-truth frame");
    }
  }
}

std::string to_string(const Violation& v) {
  std::ostringstream os;
  if (v.frame_index >= 0) {
    os << "frame " << v.frame_index << ": ";
  }
  os << v.field << ": " << v.message;
  return os.str();
}

}  // namespace mtmc
