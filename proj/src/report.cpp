#include "mtmc/report.hpp"

#include <cstdio>

namespace mtmc {

namespace {

Json metrics_json(const ClassMetrics& m) {
  Json j;
  j["hota"] = m.hota;
  j["deta"] = m.deta;
  j["assa"] = m.assa;
  j["loca"] = m.loca;
  j["ap"] = m.ap;
  j["avg_track_dur_s"] = m.avg_track_dur_seconds;
  return j;
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v * 100.0);
  return buf;
}

std::string seconds(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string metrics_row(const std::string& label, const ClassMetrics& m, std::size_t label_width) {
  return pad_right(label, label_width) + pad_left(percent(m.hota), 7) + pad_left(percent(m.deta), 7) +
         pad_left(percent(m.assa), 7) + pad_left(percent(m.loca), 7) + pad_left(percent(m.ap), 7) +
         pad_left(seconds(m.avg_track_dur_seconds), 17) + "\n";
}

std::string rate_label(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", rate);
  return buf;
}

}  // namespace

std::string class_label(ClassId c, const ClassLabels& labels) {
  const auto it = labels.find(c);
  return it == labels.end() ? "class " + std::to_string(c) : it->second;
}

Json report_json(const MetricsReport& report, const ClassLabels& labels) {
  Json j;
  j["metrics"] = metrics_json(report.class_average);
  if (report.primary_avg_track_dur_seconds) {
    j["primary_avg_track_dur_s"] = *report.primary_avg_track_dur_seconds;
  } else {
    j["primary_avg_track_dur_s"] = nullptr;
  }

  Json classes = Json::array();
  for (const auto& [c, m] : report.per_class) {
    Json row;
    row["class_id"] = c;
    row["label"] = class_label(c, labels);
    row["metrics"] = metrics_json(m);
    classes.push_back(std::move(row));
  }
  j["per_class"] = std::move(classes);

  Json window;
  window["evaluated_frames"] = report.window.evaluated_frames;
  window["total_frames"] = report.window.gt_frames;
  window["first_frame"] = report.window.first_frame;
  window["last_frame"] = report.window.last_frame;
  window["f0"] = report.window.f0;
  window["seconds"] = report.window.seconds;
  j["window"] = std::move(window);

  Json settings;
  settings["similarity"] = {{"mode", to_string(report.similarity.mode)}, {"d_max", report.similarity.d_max}};
  settings["alpha_grid"] = report.alpha_grid;
  settings["dur_alpha"] = report.dur_alpha;
  settings["ap_alpha"] = report.ap_alpha;
  settings["primary_class"] = report.primary_class;
  j["settings"] = std::move(settings);

  Json conventions;
  conventions["ap"] = "101-point interpolated, greedy confidence-ordered matching";
  conventions["empty_scene"] = "TP+FN+FP = 0 scores 1 on HOTA, DetA, AssA and LocA";
  conventions["no_true_positives"] = "TP = 0 with detections present scores 0";
  conventions["avg_track_dur"] = "0 s when no identity is ever matched";
  conventions["class_average"] = "unweighted mean over ground-truth classes in the window";
  j["conventions"] = std::move(conventions);

  j["dropped_classes"] = report.dropped_classes;
  j["warnings"] = report.warnings;
  return j;
}

Json sweep_json(const SweepTable& table, const ClassLabels& labels) {
  Json j;
  j["window"] = {{"evaluated_frames", table.window.frame_indices.size()},
                 {"f0", table.window.f0},
                 {"seconds", table.window.seconds()}};
  Json rows = Json::array();
  for (const auto& row : table.rows) {
    Json r;
    r["inference_fps"] = row.rate;
    r["stride"] = row.stride;
    r["report"] = report_json(row.report, labels);
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j;
}

std::string report_text(const MetricsReport& report, const ClassLabels& labels, bool per_class) {
  std::string out = "Window: " + std::to_string(report.window.evaluated_frames) + " of " +
                    std::to_string(report.window.gt_frames) + " frames at " + rate_label(report.window.f0) +
                    " fps (" + seconds(report.window.seconds) + " s)\n";
  std::size_t width = 9;
  if (per_class) {
    for (const auto& [c, m] : report.per_class) width = std::max(width, class_label(c, labels).size() + 2);
  }
  out += pad_right("Class", width) + "   HOTA   DetA   AssA   LocA     AP  AvgTrackDur (s)\n";
  out += metrics_row("average", report.class_average, width);
  if (per_class) {
    for (const auto& [c, m] : report.per_class) out += metrics_row(class_label(c, labels), m, width);
  }
  for (const auto& w : report.warnings) out += "warning: " + w + "\n";
  return out;
}

std::string sweep_text(const SweepTable& table) {
  std::string out = "Controlled window: " + std::to_string(table.window.frame_indices.size()) + " frames at " +
                    rate_label(table.window.f0) + " fps\n";
  out += "Inference FPS   HOTA   DetA   AssA   LocA  AvgTrackDur (s)\n";
  for (const auto& row : table.rows) {
    const ClassMetrics& m = row.report.class_average;
    out += pad_left(rate_label(row.rate), 13) + pad_left(percent(m.hota), 7) + pad_left(percent(m.deta), 7) +
           pad_left(percent(m.assa), 7) + pad_left(percent(m.loca), 7) +
           pad_left(seconds(row.report.primary_avg_track_dur_seconds.value_or(m.avg_track_dur_seconds)), 17) + "\n";
  }
  return out;
}

std::string dump_json(const Json& value) { return value.dump(2) + "\n"; }

}  // namespace mtmc
