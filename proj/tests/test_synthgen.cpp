#include "mtmc/metrics.hpp"
#include "mtmc/rng.hpp"
#include "mtmc/synthgen.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace mtmc;

namespace {

SceneSpec small_scene(MotionModel motion, std::uint64_t seed = 1) {
  SceneSpec s;
  s.n_objects = 4;
  s.duration_s = 5;
  s.fps = 10;
  s.motion = motion;
  s.seed = seed;
  return s;
}

}  // namespace

TEST(Rng, SplitMixReferenceValues) {
  SplitMix64 rng(0);
  EXPECT_EQ(rng.next(), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(rng.next(), 0x6E789E6AA1B965F4ULL);
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  SplitMix64 a = SplitMix64::stream(42, 3), b = SplitMix64::stream(42, 3), c = SplitMix64::stream(42, 4);
  const auto x = a.next();
  EXPECT_EQ(x, b.next());
  EXPECT_NE(x, c.next());
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(a.index(7), 7u);
  }
}

TEST(Scene, NoObjectsGivesEmptyFrames) {
  SceneSpec s = small_scene(MotionModel::constant_velocity);
  s.n_objects = 0;
  const Sequence gt = gen_scene(s);
  EXPECT_EQ(gt.frames.size(), 50u);
  EXPECT_EQ(gt.detection_count(), 0u);
}

TEST(Scene, StaticBoxesNeverMove) {
  const Sequence gt = gen_scene(small_scene(MotionModel::static_position));
  for (const auto& f : gt.frames) EXPECT_EQ(f.detections, gt.frames[0].detections);
}

TEST(Scene, ConstantVelocityStepLength) {
  SceneSpec s = small_scene(MotionModel::constant_velocity);
  s.fps = 2;
  s.speed = 1.0;
  s.arena = {-1000, 1000, -1000, 1000};
  const Sequence gt = gen_scene(s);
  for (std::size_t f = 1; f < gt.frames.size(); ++f) {
    for (std::size_t i = 0; i < gt.frames[f].detections.size(); ++i) {
      const Eigen::Vector3d step = gt.frames[f].detections[i].box.center - gt.frames[f - 1].detections[i].box.center;
      EXPECT_NEAR(step.norm(), 0.5, 1e-12);
    }
  }
}

TEST(Scene, ObjectsStayInArenaWithStableIds) {
  for (auto motion : {MotionModel::constant_velocity, MotionModel::waypoint}) {
    SceneSpec s = small_scene(motion, 7);
    s.arena = {-2, 2, -1, 1};
    s.speed = 3;
    s.duration_s = 20;
    const Sequence gt = gen_scene(s);
    for (const auto& f : gt.frames) {
      ASSERT_EQ(f.detections.size(), 4u);
      for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(f.detections[i].track_id, static_cast<TrackId>(i));
        EXPECT_GE(f.detections[i].box.x(), -2.0);
        EXPECT_LE(f.detections[i].box.x(), 2.0);
        EXPECT_GE(f.detections[i].box.y(), -1.0);
        EXPECT_LE(f.detections[i].box.y(), 1.0);
      }
    }
    EXPECT_TRUE(validate_sequence(gt, SequenceRole::ground_truth).empty());
  }
}

TEST(Scene, SeedDeterminismAndValidation) {
  const SceneSpec s = small_scene(MotionModel::waypoint, 99);
  EXPECT_EQ(gen_scene(s), gen_scene(s));
  SceneSpec other = s;
  other.seed = 100;
  EXPECT_NE(gen_scene(other), gen_scene(s));
  SceneSpec bad = s;
  bad.arena = {1, 0, 0, 1};
  EXPECT_THROW(gen_scene(bad), InputError);
  bad = s;
  bad.duration_s = 0.35;  // 3.5 frames
  EXPECT_THROW(gen_scene(bad), InputError);
}

TEST(Degrade, ZeroSpecRelabelsOnly) {
  const Sequence gt = gen_scene(small_scene(MotionModel::constant_velocity));
  const Sequence out = degrade(gt, DegradeSpec{});
  ASSERT_EQ(out.frames.size(), gt.frames.size());
  std::map<TrackId, TrackId> mapping;
  for (std::size_t f = 0; f < gt.frames.size(); ++f) {
    ASSERT_EQ(out.frames[f].detections.size(), gt.frames[f].detections.size());
    for (std::size_t i = 0; i < gt.frames[f].detections.size(); ++i) {
      Detection a = out.frames[f].detections[i];
      const Detection& b = gt.frames[f].detections[i];
      const auto [it, inserted] = mapping.emplace(*b.track_id, *a.track_id);
      EXPECT_EQ(it->second, *a.track_id);
      a.track_id = b.track_id;
      EXPECT_EQ(a, b);
    }
  }
}

TEST(Degrade, DropEverything) {
  const Sequence gt = gen_scene(small_scene(MotionModel::constant_velocity));
  DegradeSpec spec;
  spec.drop_prob = 1.0;
  const Sequence out = degrade(gt, spec);
  EXPECT_EQ(out.frames.size(), gt.frames.size());
  EXPECT_EQ(out.detection_count(), 0u);
}

TEST(Degrade, SwitchEveryFrameGivesOneSecondRuns) {
  SceneSpec s = small_scene(MotionModel::constant_velocity);
  s.n_objects = 1;
  s.fps = 1;
  s.duration_s = 10;
  const Sequence gt = gen_scene(s);
  DegradeSpec spec;
  spec.id_switch_prob = 1.0;
  const Sequence out = degrade(gt, spec);
  const auto window = mtmc::testing::window_of(gt, 1.0);
  const auto matches = match_window(gt, out, window, {SimilarityMode::bev_iou, 1.0}, 0.5);
  EXPECT_EQ(collect_runs(matches).size(), 10u);
  EXPECT_EQ(avg_track_dur(matches, 1.0), 1.0);
}

TEST(Degrade, FreshIdsNeverReused) {
  const Sequence gt = gen_scene(small_scene(MotionModel::waypoint, 3));
  DegradeSpec spec;
  spec.id_switch_prob = 0.2;
  spec.fp_rate = 2.0;
  spec.drop_prob = 0.1;
  spec.seed = 5;
  spec.fp_arena = Arena{100, 110, 100, 110};
  const Sequence out = degrade(gt, spec);

  // Noise-free copies share the ground-truth position, so owners are recoverable.
  std::map<TrackId, TrackId> owner;  // emitted id -> gt track id, or -1 for a false positive
  std::map<TrackId, int> fp_uses;
  std::map<TrackId, std::vector<TrackId>> ids_per_object;
  for (std::size_t f = 0; f < out.frames.size(); ++f) {
    for (const auto& d : out.frames[f].detections) {
      ASSERT_GE(*d.track_id, 1);
      TrackId who = -1;
      for (const auto& g : gt.frames[f].detections) {
        if (g.box.center == d.box.center) who = *g.track_id;
      }
      const auto [it, inserted] = owner.emplace(*d.track_id, who);
      EXPECT_EQ(it->second, who) << "id " << *d.track_id << " changed owner";
      if (who < 0) {
        EXPECT_EQ(++fp_uses[*d.track_id], 1);
      } else {
        auto& ids = ids_per_object[who];
        if (ids.empty() || ids.back() != *d.track_id) ids.push_back(*d.track_id);
      }
    }
  }
  for (const auto& [object, ids] : ids_per_object) {
    const std::set<TrackId> distinct(ids.begin(), ids.end());
    EXPECT_EQ(distinct.size(), ids.size()) << "object " << object << " got a retired id back";
    EXPECT_TRUE(std::is_sorted(ids.begin(), ids.end()));
  }
  EXPECT_FALSE(fp_uses.empty());
  EXPECT_TRUE(validate_sequence(out, SequenceRole::tracker_output).empty());
}

TEST(Degrade, PreservesFramesRateAndIsDeterministic) {
  Sequence gt = gen_scene(small_scene(MotionModel::constant_velocity));
  gt.native_fps = 10;
  DegradeSpec spec;
  spec.loc_noise_sigma = 0.3;
  spec.fp_rate = 1.5;
  spec.id_switch_prob = 0.1;
  spec.seed = 77;
  const Sequence a = degrade(gt, spec);
  EXPECT_EQ(a, degrade(gt, spec));
  EXPECT_EQ(a.native_fps, gt.native_fps);
  ASSERT_EQ(a.frames.size(), gt.frames.size());
  for (std::size_t f = 0; f < gt.frames.size(); ++f) EXPECT_EQ(a.frames[f].index, gt.frames[f].index);
  spec.seed = 78;
  EXPECT_NE(a, degrade(gt, spec));
}

TEST(Degrade, InvalidSpecRejected) {
  const Sequence gt = gen_scene(small_scene(MotionModel::static_position));
  DegradeSpec spec;
  spec.drop_prob = 1.5;
  EXPECT_THROW(degrade(gt, spec), InputError);
  spec = {};
  spec.loc_noise_sigma = -1;
  EXPECT_THROW(degrade(gt, spec), InputError);
}

TEST(Oracle, PerfectTrackerScoresOne) {
  const Sequence gt = gen_scene(small_scene(MotionModel::waypoint, 4));
  const MetricsReport r = oracle_metrics(gt, gt, full_window(gt), EvalOptions{});
  EXPECT_EQ(r.class_average.hota, 1.0);
  EXPECT_EQ(r.class_average.ap, 1.0);
  EXPECT_EQ(r.class_average.avg_track_dur_seconds, 5.0);
}
