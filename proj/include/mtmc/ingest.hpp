#pragma once

#include "mtmc/datamodel.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mtmc {

// Track CSV layout, one detection per row:
//
//   frame,track_id,class_id,x,y,z,width,length,height,yaw,confidence[,vx,vy]
//
// track_id may be empty (detector-only files). Lines starting with '#' are
// comments; a few of them carry sequence metadata:
//
//   # scene: <name>
//   # native_fps: <rate>
//   # stride: <n>
//   # empty: <frame>        (a frame present in the sequence with no rows)
//
// Floats are written with at most 6 fractional digits.

enum class TrackFormat { csv };

struct ParseOptions {
  /// Used when the file does not declare `native_fps`.
  double native_fps = 30.0;
  std::string scene_name;
  /// Prefixed to error messages, usually the file path.
  std::string source;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& source, std::size_t line, std::size_t column,
             const std::string& message);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

Sequence parse_tracks(std::istream& in, TrackFormat format = TrackFormat::csv,
                      const ParseOptions& options = {});

/// Returns the number of detection rows written.
std::size_t emit_tracks(const Sequence& seq, std::ostream& out);

Sequence read_tracks_file(const std::filesystem::path& path, ParseOptions options = {});
std::size_t write_tracks_file(const Sequence& seq, const std::filesystem::path& path);

/// Fixed-point rendering with trailing zeros trimmed ("1.0", "0.98", "-2.975").
std::string format_decimal6(double value);

// --- grid-annotation conversion -------------------------------------------

struct PositionRecord {
  FrameIndex frame = 0;
  TrackId person_id = 0;
  std::int64_t position_id = 0;
};

/// Ground-plane grid: positionID = row * grid_width + col.
struct GridConfig {
  double origin_x = -3.0;
  double origin_y = -9.0;
  double step = 0.025;
  std::int64_t grid_width = 480;
  /// Number of rows; 0 leaves the grid unbounded in y.
  std::int64_t grid_height = 0;
  double person_height = 1.8;
  double person_width = 0.6;
  double person_length = 0.6;
  /// Translation applied after the grid mapping.
  double recenter_dx = 0.0;
  double recenter_dy = 0.0;
  ClassId class_id = 0;

  void validate() const;
};

/// CSV rows `frame,person_id,position_id`, optional '#' header.
std::vector<PositionRecord> parse_positions(std::istream& in, const std::string& source = {});

Sequence convert_positions(std::span<const PositionRecord> records, const GridConfig& grid,
                           double native_fps);

/// Fills every detection's velocity by differencing against the nearest earlier
/// and later frames holding the same (class_id, track_id).
Sequence estimate_velocities(Sequence seq);

/// First `head_frames` frames (by position) and the remainder.
std::pair<Sequence, Sequence> split_frames(const Sequence& seq, std::size_t head_frames);

}  // namespace mtmc
