#pragma once

#include "mtmc/datamodel.hpp"

#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

namespace mtmc::testing {

inline Detection det(TrackId id, double x, double y, ClassId cls = 0, double conf = 1.0) {
  Detection d;
  d.box = make_box(x, y, 0.9, 0.6, 0.6, 1.8);
  d.class_id = cls;
  d.confidence = conf;
  d.track_id = id;
  return d;
}

inline Detection box_det(TrackId id, double x, double y, double w, double l, ClassId cls = 0) {
  Detection d;
  d.box = make_box(x, y, 0.5, w, l, 1.0);
  d.class_id = cls;
  d.track_id = id;
  return d;
}

/// Sequence with frames 0..n-1, all empty.
inline Sequence empty_frames(std::size_t n, double fps = 30.0) {
  Sequence s;
  s.native_fps = fps;
  for (std::size_t i = 0; i < n; ++i) s.frames.push_back({static_cast<FrameIndex>(i), {}});
  return s;
}

inline EvalWindow window_of(const Sequence& seq, double f0) {
  EvalWindow w;
  w.f0 = f0;
  for (const auto& f : seq.frames) w.frame_indices.push_back(f.index);
  return w;
}

/// Unique scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("mtmc_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace mtmc::testing
