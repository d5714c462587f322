#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mtmc {

using TrackId = std::int64_t;
using FrameIndex = std::int64_t;
using ClassId = int;

/// Raised for anything traceable to user-supplied data (files, configs, flags).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Wraps an angle into [-pi, pi).
template <typename Scalar>
Scalar normalize_yaw(Scalar yaw) {
  constexpr Scalar kPi = std::numbers::pi_v<Scalar>;
  constexpr Scalar kTwoPi = 2 * kPi;
  if (yaw >= -kPi && yaw < kPi) return yaw;
  Scalar wrapped = std::fmod(yaw + kPi, kTwoPi);
  if (wrapped < 0) wrapped += kTwoPi;
  wrapped -= kPi;
  // fmod can land exactly on +pi after the shift for inputs just below -pi.
  if (wrapped >= kPi) wrapped -= kTwoPi;
  return wrapped;
}

/// Oriented 3D box in world coordinates. `extent` is (width, length, height);
/// at yaw 0 the length runs along x and the width along y.
template <typename Scalar>
struct Box3 {
  using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

  Vec3 center = Vec3::Zero();
  Vec3 extent = Vec3::Ones();
  Scalar yaw = 0;

  Scalar x() const { return center.x(); }
  Scalar y() const { return center.y(); }
  Scalar z() const { return center.z(); }
  Scalar width() const { return extent.x(); }
  Scalar length() const { return extent.y(); }
  Scalar height() const { return extent.z(); }

  friend bool operator==(const Box3& a, const Box3& b) {
    return a.center == b.center && a.extent == b.extent && a.yaw == b.yaw;
  }
};

using Box3D = Box3<double>;

inline Box3D make_box(double x, double y, double z, double width, double length, double height,
                      double yaw = 0.0) {
  Box3D box;
  box.center << x, y, z;
  box.extent << width, length, height;
  box.yaw = normalize_yaw(yaw);
  return box;
}

struct Detection {
  Box3D box;
  ClassId class_id = 0;
  double confidence = 1.0;
  std::optional<TrackId> track_id;
  std::optional<Eigen::Vector2d> velocity;

  friend bool operator==(const Detection& a, const Detection& b) {
    return a.box == b.box && a.class_id == b.class_id && a.confidence == b.confidence &&
           a.track_id == b.track_id && a.velocity == b.velocity;
  }
};

struct Frame {
  FrameIndex index = 0;
  std::vector<Detection> detections;

  friend bool operator==(const Frame&, const Frame&) = default;
};

/// Ordered frames of world-frame detections. A frame index missing from
/// `frames` means "no detections at that timestep".
struct Sequence {
  std::vector<Frame> frames;
  double native_fps = 30.0;
  /// Keep-one-of-n factor applied since capture; 1 for native-rate data.
  int stride = 1;
  std::string scene_name;

  double effective_fps() const { return native_fps / stride; }
  double time_seconds(FrameIndex index) const { return static_cast<double>(index) / native_fps; }

  /// Binary search; nullptr when the index is absent.
  const Frame* find_frame(FrameIndex index) const;
  std::size_t detection_count() const;

  friend bool operator==(const Sequence&, const Sequence&) = default;
};

/// Frames to score and the rate used to convert frame counts into seconds.
struct EvalWindow {
  std::vector<FrameIndex> frame_indices;
  double f0 = 1.0;

  double seconds() const { return static_cast<double>(frame_indices.size()) / f0; }
};

struct Violation {
  FrameIndex frame_index = -1;  // -1 for sequence-level fields
  std::string field;
  std::string message;
};

/// What a sequence is expected to hold; only affects the track_id requirement.
enum class SequenceRole { any, ground_truth, tracker_output, detections };

std::vector<Violation> validate_sequence(const Sequence& seq, SequenceRole role = SequenceRole::any);

/// Throws InputError listing every violation; no-op on a valid window.
void validate_window(const EvalWindow& window, const Sequence& gt);

std::string to_string(const Violation& v);

}  // namespace mtmc
