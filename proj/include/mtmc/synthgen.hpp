#pragma once

#include "mtmc/datamodel.hpp"
#include "mtmc/metrics.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mtmc {

enum class MotionModel { static_position, constant_velocity, waypoint };

std::string to_string(MotionModel model);
MotionModel motion_model_from_string(const std::string& name);

/// Axis-aligned ground-plane rectangle (meters).
struct Arena {
  double x_min = -10.0;
  double x_max = 10.0;
  double y_min = -10.0;
  double y_max = 10.0;

  void validate() const;
};

struct SceneSpec {
  int n_objects = 10;
  double duration_s = 10.0;
  double fps = 30.0;
  Arena arena;
  MotionModel motion = MotionModel::constant_velocity;
  /// Walking speed (m/s) for the moving models.
  double speed = 1.0;
  /// Object i gets classes[i % classes.size()].
  std::vector<ClassId> classes = {0};
  /// (width, length, height) of every box.
  Eigen::Vector3d extent = Eigen::Vector3d(0.6, 0.6, 1.8);
  std::uint64_t seed = 0;
  std::string scene_name = "synthetic";

  void validate() const;
};

/// Ground truth for `n_objects` objects over duration_s * fps frames (indices
/// 0..N-1). Object i draws from random stream i + 1 of `seed`; walls reflect.
Sequence gen_scene(const SceneSpec& spec);

struct DegradeSpec {
  double drop_prob = 0.0;
  double loc_noise_sigma = 0.0;
  /// Per object per frame, after its first appearance.
  double id_switch_prob = 0.0;
  /// Expected false positives per frame.
  double fp_rate = 0.0;
  std::uint64_t seed = 0;
  /// Where false positives land; defaults to the bounding box of the GT centers.
  std::optional<Arena> fp_arena;

  void validate() const;
};

/// Tracker-like output derived from ground truth. Random streams: object
/// (class c, track t) uses stream 1 + (c << 40) + t and draws, per frame it
/// exists, u_drop, u_switch, then two normals; false positives use stream 0 and
/// draw, per frame, a Poisson count and then x, y, class index and confidence
/// for each one. Emitted ids are minted from 1 upwards and never reused.
Sequence degrade(const Sequence& gt, const DegradeSpec& spec);

/// Brute-force evaluator with the same contract as class_report: exhaustive
/// enumeration of gated matchings and direct per-definition counting. Shares no
/// code with the metrics path. Throws InputError if any frame has more than 6
/// ground-truth or predicted detections.
MetricsReport oracle_metrics(const Sequence& gt, const Sequence& pred, const EvalWindow& window,
                             const EvalOptions& options);

inline constexpr std::size_t kOracleMaxPerFrame = 6;

}  // namespace mtmc
