#include "mtmc/datamodel.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace mtmc;
using mtmc::testing::det;

namespace {

Sequence two_frames() {
  Sequence s;
  s.frames.push_back({0, {det(1, 0.0, 0.0), det(2, 1.0, 1.0)}});
  s.frames.push_back({1, {det(1, 0.1, 0.0), det(2, 1.1, 1.0)}});
  return s;
}

}  // namespace

TEST(Validate, WellFormedSequenceHasNoViolations) {
  EXPECT_TRUE(validate_sequence(two_frames()).empty());
  EXPECT_TRUE(validate_sequence(two_frames(), SequenceRole::ground_truth).empty());
}

TEST(Validate, ConfidenceOutOfRangeNamesFrameAndField) {
  Sequence s = two_frames();
  s.frames[1].detections[0].confidence = 1.5;
  const auto v = validate_sequence(s);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].frame_index, 1);
  EXPECT_EQ(v[0].field, "confidence");
}

TEST(Validate, DuplicateTrackAndClassInFrameFour) {
  Sequence s;
  for (FrameIndex f = 0; f < 6; ++f) s.frames.push_back({f, {det(1, 0, 0), det(2, 3, 3)}});
  s.frames[4].detections[1].track_id = 1;
  const auto v = validate_sequence(s);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].frame_index, 4);
  EXPECT_EQ(v[0].field, "track_id");
}

TEST(Validate, SameTrackIdInDifferentClassesIsAllowed) {
  Sequence s;
  s.frames.push_back({0, {det(1, 0, 0, 0), det(1, 3, 3, 1)}});
  EXPECT_TRUE(validate_sequence(s).empty());
}

TEST(Validate, FrameIndicesMustIncrease) {
  Sequence s = two_frames();
  s.frames[1].index = 0;
  const auto v = validate_sequence(s);
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v[0].field, "frame_index");
}

TEST(Validate, MissingTrackIdDependsOnRole) {
  Sequence s = two_frames();
  s.frames[0].detections[0].track_id.reset();
  EXPECT_TRUE(validate_sequence(s, SequenceRole::detections).empty());
  EXPECT_EQ(validate_sequence(s, SequenceRole::ground_truth).size(), 1u);
  EXPECT_EQ(validate_sequence(s, SequenceRole::tracker_output).size(), 1u);
}

TEST(Validate, NonPositiveExtentAndNonFiniteCenter) {
  Sequence s = two_frames();
  s.frames[0].detections[0].box.extent.x() = 0.0;
  s.frames[1].detections[1].box.center.y() = std::numeric_limits<double>::quiet_NaN();
  const auto v = validate_sequence(s);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].field, "width");
  EXPECT_EQ(v[1].field, "center");
}

TEST(Validate, IsIdempotentAndLeavesInputUntouched) {
  Sequence s = two_frames();
  s.frames[0].detections[1].confidence = -0.1;
  const Sequence before = s;
  const auto a = validate_sequence(s);
  const auto b = validate_sequence(s);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].frame_index, b[i].frame_index);
    EXPECT_EQ(a[i].field, b[i].field);
  }
  EXPECT_EQ(s, before);
}

TEST(Yaw, NormalizationIsIdempotentOnRandomValues) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> dist(-10 * std::numbers::pi, 10 * std::numbers::pi);
  for (int i = 0; i < 1000; ++i) {
    const double once = normalize_yaw(dist(gen));
    EXPECT_GE(once, -std::numbers::pi);
    EXPECT_LT(once, std::numbers::pi);
    EXPECT_EQ(normalize_yaw(once), once);
  }
}

TEST(Yaw, PiMapsToMinusPi) {
  EXPECT_EQ(normalize_yaw(std::numbers::pi), -std::numbers::pi);
  EXPECT_EQ(normalize_yaw(0.25), 0.25);
}

TEST(Window, MustBeNonEmptySubsetWithPositiveRate) {
  const Sequence s = two_frames();
  EvalWindow w{{0, 1}, 2.0};
  EXPECT_NO_THROW(validate_window(w, s));
  EXPECT_DOUBLE_EQ(w.seconds(), 1.0);
  EXPECT_THROW(validate_window(EvalWindow{{}, 1.0}, s), InputError);
  EXPECT_THROW(validate_window(EvalWindow{{0, 5}, 1.0}, s), InputError);
  EXPECT_THROW(validate_window(EvalWindow{{0}, 0.0}, s), InputError);
}

TEST(Sequence, TimeIsDerivedFromIndexAndRate) {
  Sequence s = two_frames();
  s.native_fps = 2.0;
  EXPECT_DOUBLE_EQ(s.time_seconds(3), 1.5);
  ASSERT_NE(s.find_frame(1), nullptr);
  EXPECT_EQ(s.find_frame(7), nullptr);
  EXPECT_EQ(s.detection_count(), 4u);
}
