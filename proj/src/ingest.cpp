#include "mtmc/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <string_view>
#include <system_error>

namespace mtmc {

ParseError::ParseError(const std::string& source, std::size_t line, std::size_t column,
                       const std::string& message)
    : InputError((source.empty() ? std::string("<stream>") : source) + ":" +
                 std::to_string(line) + (column > 0 ? ":" + std::to_string(column) : "") + ": " +
                 message),
      line_(line),
      column_(column) {}

namespace {

constexpr std::string_view kColumns =
    "frame,track_id,class_id,x,y,z,width,length,height,yaw,confidence";
constexpr std::array<std::string_view, 13> kColumnNames = {
    "frame", "track_id", "class_id", "x",          "y",  "z", "width",
    "length", "height",  "yaw",      "confidence", "vx", "vy"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

// Parses one CSV field, reporting failures against its 1-based column.
class FieldReader {
 public:
  FieldReader(const std::string& source, std::size_t line) : source_(source), line_(line) {}

  std::int64_t integer(std::string_view text, std::size_t column, std::int64_t min_value) const {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
      fail(column, "expected an integer, got '" + std::string(text) + "'");
    }
    if (value < min_value) {
      fail(column, "value " + std::to_string(value) + " below minimum " + std::to_string(min_value));
    }
    return value;
  }

  double real(std::string_view text, std::size_t column) const {
    double value = 0;
    std::string_view digits = text;
    if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size()) {
      fail(column, "expected a number, got '" + std::string(text) + "'");
    }
    if (!std::isfinite(value)) fail(column, "non-finite number '" + std::string(text) + "'");
    return value;
  }

  [[noreturn]] void fail(std::size_t column, const std::string& message) const {
    std::string what = message;
    if (column > 0 && column <= kColumnNames.size()) {
      what = std::string(kColumnNames[column - 1]) + ": " + message;
    }
    throw ParseError(source_, line_, column, what);
  }

 private:
  const std::string& source_;
  std::size_t line_;
};

// "# key: value" -> (key, value); empty key when the comment is not metadata.
std::pair<std::string_view, std::string_view> meta_entry(std::string_view comment) {
  comment.remove_prefix(1);
  comment = trim(comment);
  const std::size_t colon = comment.find(':');
  if (colon == std::string_view::npos) return {};
  const std::string_view key = trim(comment.substr(0, colon));
  if (key != "scene" && key != "native_fps" && key != "stride" && key != "empty") return {};
  return {key, trim(comment.substr(colon + 1))};
}

class SequenceBuilder {
 public:
  SequenceBuilder(Sequence& seq, const std::string& source) : seq_(seq), source_(source) {}

  Frame& frame_for(FrameIndex index, std::size_t line) {
    if (!seq_.frames.empty()) {
      Frame& last = seq_.frames.back();
      if (index == last.index) return last;
      if (index < last.index) {
        throw ParseError(source_, line, 1,
                         "frame: index " + std::to_string(index) + " after frame " +
                             std::to_string(last.index) + " (frames must be ascending)");
      }
    }
    seq_.frames.push_back(Frame{index, {}});
    seen_.clear();
    return seq_.frames.back();
  }

  void add(FrameIndex index, Detection det, std::size_t line) {
    Frame& frame = frame_for(index, line);
    if (det.track_id && !seen_.emplace(*det.track_id, det.class_id).second) {
      throw ParseError(source_, line, 2,
                       "track_id: duplicate (track_id, class_id) = (" +
                           std::to_string(*det.track_id) + ", " + std::to_string(det.class_id) +
                           ") in frame " + std::to_string(index));
    }
    frame.detections.push_back(std::move(det));
  }

 private:
  Sequence& seq_;
  const std::string& source_;
  std::set<std::pair<TrackId, ClassId>> seen_;
};

Detection parse_detection_row(const std::vector<std::string_view>& fields, const FieldReader& read,
                              FrameIndex& frame_out) {
  frame_out = read.integer(fields[0], 1, 0);
  Detection det;
  if (!fields[1].empty()) det.track_id = read.integer(fields[1], 2, 0);
  det.class_id = static_cast<ClassId>(read.integer(fields[2], 3, 0));

  std::array<double, 8> v{};
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = read.real(fields[3 + i], 4 + i);
  for (std::size_t c = 6; c <= 8; ++c) {
    if (v[c - 3] <= 0) read.fail(c + 1, "box extent must be > 0");
  }
  det.box = make_box(v[0], v[1], v[2], v[3], v[4], v[5], v[6]);

  det.confidence = read.real(fields[10], 11);
  if (det.confidence < 0.0 || det.confidence > 1.0) read.fail(11, "confidence outside [0, 1]");

  if (fields.size() == 13) {
    const bool has_vx = !fields[11].empty();
    const bool has_vy = !fields[12].empty();
    if (has_vx != has_vy) read.fail(has_vx ? 13 : 12, "vx and vy must both be set or both empty");
    if (has_vx) det.velocity = Eigen::Vector2d(read.real(fields[11], 12), read.real(fields[12], 13));
  }
  return det;
}

void append_decimal(std::string& out, double value) { out += format_decimal6(value); }

std::string format_shortest(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

bool detection_less(const Detection& a, const Detection& b) {
  if (a.class_id != b.class_id) return a.class_id < b.class_id;
  return a.track_id < b.track_id;  // nullopt sorts first
}

}  // namespace

std::string format_decimal6(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] =
      std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::fixed, 6);
  std::string text(buf.data(), ptr);
  const std::size_t dot = text.find('.');
  if (dot != std::string::npos) {
    std::size_t end = text.size();
    while (end > dot + 2 && text[end - 1] == '0') --end;
    text.resize(end);
  }
  if (text == "-0.0") text = "0.0";
  return text;
}

Sequence parse_tracks(std::istream& in, TrackFormat format, const ParseOptions& options) {
  if (format != TrackFormat::csv) throw InputError("unsupported track format");

  Sequence seq;
  seq.native_fps = options.native_fps;
  seq.scene_name = options.scene_name;
  SequenceBuilder builder(seq, options.source);

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    const FieldReader read(options.source, line_no);

    if (text.front() == '#') {
      const auto [key, value] = meta_entry(text);
      if (key == "scene") {
        seq.scene_name = std::string(value);
      } else if (key == "native_fps") {
        seq.native_fps = read.real(value, 0);
        if (seq.native_fps <= 0) read.fail(0, "native_fps must be > 0");
      } else if (key == "stride") {
        seq.stride = static_cast<int>(read.integer(value, 0, 1));
      } else if (key == "empty") {
        const FrameIndex index = read.integer(value, 0, 0);
        Frame& frame = builder.frame_for(index, line_no);
        if (!frame.detections.empty()) read.fail(0, "frame marked empty already has detections");
      }
      continue;
    }

    const auto fields = split_commas(text);
    if (fields.size() != 11 && fields.size() != 13) {
      read.fail(std::min(fields.size(), std::size_t{11}) + 1,
                "expected 11 or 13 columns, got " + std::to_string(fields.size()));
    }
    FrameIndex frame = 0;
    Detection det = parse_detection_row(fields, read, frame);
    builder.add(frame, std::move(det), line_no);
  }
  if (in.bad()) throw InputError(options.source + ": read failure");
  return seq;
}

std::size_t emit_tracks(const Sequence& seq, std::ostream& out) {
  const bool with_velocity = std::any_of(seq.frames.begin(), seq.frames.end(), [](const Frame& f) {
    return std::any_of(f.detections.begin(), f.detections.end(),
                       [](const Detection& d) { return d.velocity.has_value(); });
  });

  std::string buffer;
  if (!seq.scene_name.empty()) buffer += "# scene: " + seq.scene_name + "\n";
  buffer += "# native_fps: " + format_shortest(seq.native_fps) + "\n";
  if (seq.stride != 1) buffer += "# stride: " + std::to_string(seq.stride) + "\n";
  buffer += "# ";
  buffer += kColumns;
  buffer += with_velocity ? ",vx,vy\n" : "\n";

  std::size_t rows = 0;
  std::vector<const Detection*> order;
  for (const auto& frame : seq.frames) {
    if (frame.detections.empty()) {
      buffer += "# empty: " + std::to_string(frame.index) + "\n";
      continue;
    }
    order.clear();
    for (const auto& d : frame.detections) order.push_back(&d);
    std::stable_sort(order.begin(), order.end(),
                     [](const Detection* a, const Detection* b) { return detection_less(*a, *b); });
    for (const Detection* d : order) {
      buffer += std::to_string(frame.index);
      buffer += ',';
      if (d->track_id) buffer += std::to_string(*d->track_id);
      buffer += ',';
      buffer += std::to_string(d->class_id);
      for (double v : {d->box.x(), d->box.y(), d->box.z(), d->box.width(), d->box.length(),
                       d->box.height(), d->box.yaw, d->confidence}) {
        buffer += ',';
        append_decimal(buffer, v);
      }
      if (with_velocity) {
        buffer += ',';
        if (d->velocity) append_decimal(buffer, d->velocity->x());
        buffer += ',';
        if (d->velocity) append_decimal(buffer, d->velocity->y());
      }
      buffer += '\n';
      ++rows;
    }
  }
  out << buffer;
  if (!out) throw std::runtime_error("track sink write failure");
  return rows;
}

Sequence read_tracks_file(const std::filesystem::path& path, ParseOptions options) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  if (options.source.empty()) options.source = path.string();
  return parse_tracks(in, TrackFormat::csv, options);
}

std::size_t write_tracks_file(const Sequence& seq, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  return emit_tracks(seq, out);
}

void GridConfig::validate() const {
  if (!(step > 0)) throw InputError("grid: step must be > 0");
  if (grid_width < 1) throw InputError("grid: grid_width must be >= 1");
  if (grid_height < 0) throw InputError("grid: grid_height must be >= 0");
  if (!(person_height > 0)) throw InputError("grid: person_height must be > 0");
  if (!(person_width > 0) || !(person_length > 0)) {
    throw InputError("grid: person footprint must be > 0");
  }
  if (class_id < 0) throw InputError("grid: class_id must be non-negative");
}

std::vector<PositionRecord> parse_positions(std::istream& in, const std::string& source) {
  std::vector<PositionRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto fields = split_commas(text);
    if (fields.size() != 3) {
      throw ParseError(source, line_no, 0,
                       "expected 3 columns (frame,person_id,position_id), got " +
                           std::to_string(fields.size()));
    }
    auto integer = [&](std::size_t col) {
      std::int64_t value = 0;
      const auto f = fields[col];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
      if (f.empty() || ec != std::errc() || ptr != f.data() + f.size() || value < 0) {
        throw ParseError(source, line_no, col + 1,
                         "expected a non-negative integer, got '" + std::string(f) + "'");
      }
      return value;
    };
    records.push_back({integer(0), integer(1), integer(2)});
  }
  return records;
}

Sequence convert_positions(std::span<const PositionRecord> records, const GridConfig& grid,
                           double native_fps) {
  grid.validate();
  if (!(native_fps > 0)) throw InputError("native_fps must be > 0");

  std::vector<PositionRecord> sorted(records.begin(), records.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.frame != b.frame ? a.frame < b.frame : a.person_id < b.person_id;
  });

  Sequence seq;
  seq.native_fps = native_fps;
  for (const auto& rec : sorted) {
    if (rec.position_id < 0) {
      throw InputError("position_id " + std::to_string(rec.position_id) + " is negative");
    }
    const std::int64_t col = rec.position_id % grid.grid_width;
    const std::int64_t row = rec.position_id / grid.grid_width;
    if (grid.grid_height > 0 && row >= grid.grid_height) {
      throw InputError("position_id " + std::to_string(rec.position_id) + " in frame " +
                       std::to_string(rec.frame) + " lies outside the " +
                       std::to_string(grid.grid_width) + "x" + std::to_string(grid.grid_height) +
                       " grid");
    }
    if (seq.frames.empty() || seq.frames.back().index != rec.frame) {
      seq.frames.push_back(Frame{rec.frame, {}});
    }
    Frame& frame = seq.frames.back();
    if (!frame.detections.empty() && frame.detections.back().track_id == rec.person_id) {
      throw InputError("person_id " + std::to_string(rec.person_id) + " appears twice in frame " +
                       std::to_string(rec.frame));
    }
    Detection det;
    det.box = make_box(grid.origin_x + grid.step * static_cast<double>(col) + grid.recenter_dx,
                       grid.origin_y + grid.step * static_cast<double>(row) + grid.recenter_dy,
                       grid.person_height / 2.0, grid.person_width, grid.person_length,
                       grid.person_height, 0.0);
    det.class_id = grid.class_id;
    det.confidence = 1.0;
    det.track_id = rec.person_id;
    frame.detections.push_back(std::move(det));
  }
  return seq;
}

Sequence estimate_velocities(Sequence seq) {
  struct Visit {
    std::size_t frame_pos;
    std::size_t det_pos;
  };
  std::map<std::pair<ClassId, TrackId>, std::vector<Visit>> identities;
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    const auto& dets = seq.frames[f].detections;
    for (std::size_t d = 0; d < dets.size(); ++d) {
      if (dets[d].track_id) identities[{dets[d].class_id, *dets[d].track_id}].push_back({f, d});
    }
  }

  auto detection = [&](const Visit& v) -> Detection& {
    return seq.frames[v.frame_pos].detections[v.det_pos];
  };
  auto position = [&](const Visit& v) -> Eigen::Vector2d {
    return detection(v).box.center.head<2>();
  };
  auto time = [&](const Visit& v) { return seq.time_seconds(seq.frames[v.frame_pos].index); };
  auto slope = [&](const Visit& a, const Visit& b) -> Eigen::Vector2d {
    return (position(b) - position(a)) / (time(b) - time(a));
  };

  for (auto& [key, visits] : identities) {
    for (std::size_t i = 0; i < visits.size(); ++i) {
      Eigen::Vector2d v = Eigen::Vector2d::Zero();
      const bool has_prev = i > 0;
      const bool has_next = i + 1 < visits.size();
      if (has_prev && has_next) {
        v = slope(visits[i - 1], visits[i + 1]);
      } else if (has_next) {
        v = slope(visits[i], visits[i + 1]);
      } else if (has_prev) {
        v = slope(visits[i - 1], visits[i]);
      }
      detection(visits[i]).velocity = v;
    }
  }
  return seq;
}

std::pair<Sequence, Sequence> split_frames(const Sequence& seq, std::size_t head_frames) {
  Sequence head = seq;
  Sequence tail = seq;
  const std::size_t cut = std::min(head_frames, seq.frames.size());
  head.frames.assign(seq.frames.begin(), seq.frames.begin() + static_cast<std::ptrdiff_t>(cut));
  tail.frames.assign(seq.frames.begin() + static_cast<std::ptrdiff_t>(cut), seq.frames.end());
  return {std::move(head), std::move(tail)};
}

}  // namespace mtmc
