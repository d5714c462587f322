#pragma once

#include "mtmc/ingest.hpp"
#include "mtmc/metrics.hpp"
#include "mtmc/report.hpp"
#include "mtmc/synthgen.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>

namespace mtmc {

struct AnchorSettings {
  Eigen::Index k = 900;
  std::uint64_t seed = 0;
  int max_iter = 300;
  double tol = 1e-6;
};

/// Everything a command can be configured with. JSON keys match the field
/// names; nested objects are `similarity`, `roi`, `grid` and `anchors`.
struct ToolConfig {
  /// threads = 0 uses every hardware thread.
  EvalOptions eval = [] {
    EvalOptions e;
    e.threads = 0;
    return e;
  }();
  ClassLabels class_labels;
  std::optional<Roi> roi;
  double conf_threshold = 0.0;
  double native_fps = 30.0;
  /// Unset scores every frame at the native rate.
  std::optional<double> eval_fps;
  std::size_t max_frames = 0;
  GridConfig grid;
  AnchorSettings anchors;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Starts from `base` and applies the keys present in `json`. Unknown keys
/// are rejected.
ToolConfig apply_config_json(ToolConfig base, const Json& json, const std::string& source = "config");
ToolConfig load_config(const std::filesystem::path& path, ToolConfig base = {});
Json config_json(const ToolConfig& config);

GridConfig grid_from_json(GridConfig base, const Json& json, const std::string& source);
GridConfig load_grid_config(const std::filesystem::path& path);

/// `{"scene": {...}, "degrade": {...}}`; both objects are optional.
struct SynthSpec {
  SceneSpec scene;
  DegradeSpec degrade;
};

SynthSpec synth_spec_from_json(const Json& json, const std::string& source = "spec");
SynthSpec load_synth_spec(const std::filesystem::path& path);
Json synth_spec_json(const SynthSpec& spec);

Json read_json_file(const std::filesystem::path& path);

}  // namespace mtmc
