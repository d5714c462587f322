#include "mtmc/synthgen.hpp"

#include "mtmc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

namespace mtmc {

std::string to_string(MotionModel model) {
  switch (model) {
    case MotionModel::static_position:
      return "static";
    case MotionModel::constant_velocity:
      return "constant_velocity";
    case MotionModel::waypoint:
      return "waypoint";
  }
  return "static";
}

MotionModel motion_model_from_string(const std::string& name) {
  if (name == "static") return MotionModel::static_position;
  if (name == "constant_velocity") return MotionModel::constant_velocity;
  if (name == "waypoint") return MotionModel::waypoint;
  throw InputError("unknown motion model '" + name + "' (expected static, constant_velocity or waypoint)");
}

void Arena::validate() const {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !std::isfinite(y_min) || !std::isfinite(y_max) ||
      !(x_max > x_min) || !(y_max > y_min)) {
    throw InputError("arena bounds must be finite with x_max > x_min and y_max > y_min");
  }
}

void SceneSpec::validate() const {
  arena.validate();
  if (n_objects < 0) throw InputError("scene: n_objects must be >= 0");
  if (!(fps > 0)) throw InputError("scene: fps must be > 0");
  if (!(duration_s >= 0)) throw InputError("scene: duration_s must be >= 0");
  const double frames = duration_s * fps;
  if (std::abs(frames - std::round(frames)) > 1e-9 * std::max(1.0, frames)) {
    throw InputError("scene: duration_s * fps must be a whole number of frames");
  }
  if (!(speed >= 0)) throw InputError("scene: speed must be >= 0");
  if (classes.empty()) throw InputError("scene: classes must not be empty");
  for (ClassId c : classes) {
    if (c < 0) throw InputError("scene: class ids must be non-negative");
  }
  if (!(extent.array() > 0).all()) throw InputError("scene: box extent must be > 0");
}

namespace {

void reflect(double& p, double& v, double lo, double hi) {
  while (p < lo || p > hi) {
    if (p > hi) {
      p = 2 * hi - p;
    } else {
      p = 2 * lo - p;
    }
    v = -v;
  }
}

double heading_of(const Eigen::Vector2d& v) { return v.isZero() ? 0.0 : std::atan2(v.y(), v.x()); }

}  // namespace

Sequence gen_scene(const SceneSpec& spec) {
  spec.validate();
  const auto frame_count = static_cast<FrameIndex>(std::llround(spec.duration_s * spec.fps));
  const double dt = 1.0 / spec.fps;
  const Arena& a = spec.arena;

  Sequence seq;
  seq.native_fps = spec.fps;
  seq.scene_name = spec.scene_name;
  seq.frames.resize(static_cast<std::size_t>(frame_count));
  for (FrameIndex f = 0; f < frame_count; ++f) seq.frames[static_cast<std::size_t>(f)].index = f;

  for (int i = 0; i < spec.n_objects; ++i) {
    SplitMix64 rng = SplitMix64::stream(spec.seed, static_cast<std::uint64_t>(i) + 1);
    Eigen::Vector2d p(rng.uniform(a.x_min, a.x_max), rng.uniform(a.y_min, a.y_max));
    const double heading = rng.uniform(-std::numbers::pi, std::numbers::pi);
    Eigen::Vector2d v = spec.speed * Eigen::Vector2d(std::cos(heading), std::sin(heading));
    Eigen::Vector2d waypoint(rng.uniform(a.x_min, a.x_max), rng.uniform(a.y_min, a.y_max));
    const ClassId class_id = spec.classes[static_cast<std::size_t>(i) % spec.classes.size()];

    for (FrameIndex f = 0; f < frame_count; ++f) {
      if (f > 0) {
        switch (spec.motion) {
          case MotionModel::static_position:
            break;
          case MotionModel::constant_velocity:
            p += v * dt;
            reflect(p.x(), v.x(), a.x_min, a.x_max);
            reflect(p.y(), v.y(), a.y_min, a.y_max);
            break;
          case MotionModel::waypoint: {
            const double step = spec.speed * dt;
            const Eigen::Vector2d to_go = waypoint - p;
            const double dist = to_go.norm();
            if (dist <= step) {
              // Arrive and pick the next waypoint.
              p = waypoint;
              waypoint = Eigen::Vector2d(rng.uniform(a.x_min, a.x_max), rng.uniform(a.y_min, a.y_max));
            } else {
              v = to_go / dist * spec.speed;
              p += to_go / dist * step;
            }
            break;
          }
        }
      }
      const double yaw = spec.motion == MotionModel::static_position ? 0.0 : heading_of(v);
      Detection det;
      det.box = make_box(p.x(), p.y(), spec.extent.z() / 2.0, spec.extent.x(), spec.extent.y(), spec.extent.z(), yaw);
      det.class_id = class_id;
      det.confidence = 1.0;
      det.track_id = i;
      seq.frames[static_cast<std::size_t>(f)].detections.push_back(std::move(det));
    }
  }

  for (auto& frame : seq.frames) {
    std::stable_sort(frame.detections.begin(), frame.detections.end(), [](const Detection& x, const Detection& y) {
      return x.class_id != y.class_id ? x.class_id < y.class_id : x.track_id < y.track_id;
    });
  }
  return seq;
}

void DegradeSpec::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw InputError(std::string("degrade: ") + name + " must lie in [0, 1]");
  };
  prob(drop_prob, "drop_prob");
  prob(id_switch_prob, "id_switch_prob");
  if (!(loc_noise_sigma >= 0.0)) throw InputError("degrade: loc_noise_sigma must be >= 0");
  if (!(fp_rate >= 0.0) || !std::isfinite(fp_rate)) throw InputError("degrade: fp_rate must be >= 0");
  if (fp_arena) fp_arena->validate();
}

namespace {

Arena centers_bounding_box(const Sequence& gt) {
  bool any = false;
  Arena box{0.0, 0.0, 0.0, 0.0};
  for (const auto& frame : gt.frames) {
    for (const auto& d : frame.detections) {
      if (!any) {
        box = {d.box.x(), d.box.x(), d.box.y(), d.box.y()};
        any = true;
      }
      box.x_min = std::min(box.x_min, d.box.x());
      box.x_max = std::max(box.x_max, d.box.x());
      box.y_min = std::min(box.y_min, d.box.y());
      box.y_max = std::max(box.y_max, d.box.y());
    }
  }
  if (!any) return {0.0, 1.0, 0.0, 1.0};
  if (box.x_max - box.x_min < 1.0) {
    box.x_min -= 0.5;
    box.x_max += 0.5;
  }
  if (box.y_max - box.y_min < 1.0) {
    box.y_min -= 0.5;
    box.y_max += 0.5;
  }
  return box;
}

}  // namespace

Sequence degrade(const Sequence& gt, const DegradeSpec& spec) {
  spec.validate();

  struct ObjectState {
    SplitMix64 rng;
    TrackId emitted_id;
  };
  std::map<std::pair<ClassId, TrackId>, ObjectState> objects;
  TrackId next_id = 1;

  std::set<ClassId> class_set;
  for (const auto& frame : gt.frames) {
    for (const auto& d : frame.detections) class_set.insert(d.class_id);
  }
  const std::vector<ClassId> classes = class_set.empty() ? std::vector<ClassId>{0}
                                                         : std::vector<ClassId>(class_set.begin(), class_set.end());
  const Arena fp_arena = spec.fp_arena ? *spec.fp_arena : centers_bounding_box(gt);
  SplitMix64 fp_rng = SplitMix64::stream(spec.seed, 0);

  Sequence out;
  out.native_fps = gt.native_fps;
  out.stride = gt.stride;
  out.scene_name = gt.scene_name;
  out.frames.reserve(gt.frames.size());

  for (const auto& frame : gt.frames) {
    Frame emitted{frame.index, {}};

    std::vector<const Detection*> ordered;
    for (const auto& d : frame.detections) ordered.push_back(&d);
    std::stable_sort(ordered.begin(), ordered.end(), [](const Detection* x, const Detection* y) {
      return x->class_id != y->class_id ? x->class_id < y->class_id : x->track_id < y->track_id;
    });

    for (const Detection* d : ordered) {
      if (!d->track_id) throw InputError("degrade: ground-truth detection without track_id");
      const std::pair<ClassId, TrackId> key{d->class_id, *d->track_id};
      auto it = objects.find(key);
      const bool first = it == objects.end();
      if (first) {
        const std::uint64_t stream =
            1 + (static_cast<std::uint64_t>(d->class_id) << 40) + static_cast<std::uint64_t>(*d->track_id);
        it = objects.emplace(key, ObjectState{SplitMix64::stream(spec.seed, stream), next_id++}).first;
      }
      ObjectState& state = it->second;
      const double u_drop = state.rng.uniform();
      const double u_switch = state.rng.uniform();
      const double nx = state.rng.normal();
      const double ny = state.rng.normal();
      if (!first && u_switch < spec.id_switch_prob) state.emitted_id = next_id++;
      if (u_drop < spec.drop_prob) continue;

      Detection det = *d;
      det.track_id = state.emitted_id;
      det.velocity.reset();
      det.box.center.x() += spec.loc_noise_sigma * nx;
      det.box.center.y() += spec.loc_noise_sigma * ny;
      emitted.detections.push_back(std::move(det));
    }

    const int fp_count = fp_rng.poisson(spec.fp_rate);
    for (int i = 0; i < fp_count; ++i) {
      const double x = fp_rng.uniform(fp_arena.x_min, fp_arena.x_max);
      const double y = fp_rng.uniform(fp_arena.y_min, fp_arena.y_max);
      const ClassId class_id = classes[fp_rng.index(classes.size())];
      const double confidence = fp_rng.uniform();
      Detection det;
      det.box = make_box(x, y, 0.9, 0.6, 0.6, 1.8, 0.0);
      det.class_id = class_id;
      det.confidence = confidence;
      det.track_id = next_id++;
      emitted.detections.push_back(std::move(det));
    }

    std::stable_sort(emitted.detections.begin(), emitted.detections.end(), [](const Detection& x, const Detection& y) {
      return x.class_id != y.class_id ? x.class_id < y.class_id : x.track_id < y.track_id;
    });
    out.frames.push_back(std::move(emitted));
  }
  return out;
}

}  // namespace mtmc
