// mtmceval: command-line front end for the evaluation toolkit.

#include "mtmc/anchors.hpp"
#include "mtmc/config.hpp"
#include "mtmc/fpslab.hpp"
#include "mtmc/ingest.hpp"
#include "mtmc/metrics.hpp"
#include "mtmc/parallel.hpp"
#include "mtmc/report.hpp"
#include "mtmc/synthgen.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace mtmc;

constexpr int kExitInput = 2;
constexpr int kExitInternal = 1;

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw InputError("write failed for '" + path.string() + "'");
}

std::string rate_name(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", rate);
  return buf;
}

/// Flags shared by the scoring commands. Unset flags leave the config value.
struct EvalFlags {
  std::string config_path;
  std::optional<double> native_fps;
  std::optional<double> eval_fps;
  std::optional<std::size_t> max_frames;
  std::optional<std::string> similarity;
  std::optional<double> d_max;
  std::optional<double> dur_alpha;
  std::optional<double> ap_alpha;
  std::optional<double> conf_threshold;
  std::optional<int> primary_class;
  std::optional<int> threads;

  void add(CLI::App& cmd) {
    cmd.add_option("--config", config_path, "JSON config file; flags override its keys (default: none)");
    cmd.add_option("--native-fps", native_fps,
                   "Native frame rate of the ground truth when the file does not declare one "
                   "(default: 30; config: native_fps)");
    cmd.add_option("--max-frames", max_frames,
                   "Evaluate only the first N ground-truth frames, 0 for all (default: 0; config: max_frames)");
    cmd.add_option("--similarity", similarity,
                   "Similarity: bev_iou or center_distance (default: bev_iou; config: similarity.mode)");
    cmd.add_option("--d-max", d_max,
                   "Distance in meters where center_distance similarity reaches 0 (default: 1; config: similarity.d_max)");
    cmd.add_option("--dur-alpha", dur_alpha, "Gate for AvgTrackDur matching (default: 0.5; config: dur_alpha)");
    cmd.add_option("--ap-alpha", ap_alpha, "Gate for detection AP (default: 0.5; config: ap_alpha)");
    cmd.add_option("--conf-threshold", conf_threshold,
                   "Drop predictions below this confidence (default: 0; config: conf_threshold)");
    cmd.add_option("--primary-class", primary_class,
                   "Class whose AvgTrackDur is reported on its own (default: 0; config: primary_class)");
    cmd.add_option("--threads", threads,
                   "Worker threads, 0 for all cores; MTMC_THREADS caps it (default: 0; config: threads)");
  }

  ToolConfig resolve() const {
    ToolConfig c = config_path.empty() ? ToolConfig{} : load_config(config_path);
    if (native_fps) c.native_fps = *native_fps;
    if (eval_fps) c.eval_fps = *eval_fps;
    if (max_frames) c.max_frames = *max_frames;
    if (similarity) c.eval.similarity.mode = similarity_mode_from_string(*similarity);
    if (d_max) c.eval.similarity.d_max = *d_max;
    if (dur_alpha) c.eval.dur_alpha = *dur_alpha;
    if (ap_alpha) c.eval.ap_alpha = *ap_alpha;
    if (conf_threshold) c.conf_threshold = *conf_threshold;
    if (primary_class) c.eval.primary_class = *primary_class;
    if (threads) c.eval.threads = *threads;
    c.validate();
    return c;
  }

  /// The declared native rate wins over the file header only when set explicitly.
  bool native_fps_explicit(const Json& config_keys) const {
    return native_fps.has_value() || config_keys.contains("native_fps");
  }
};

Json config_keys(const std::string& path) { return path.empty() ? Json::object() : read_json_file(path); }

Sequence load_ground_truth(const std::string& path, const ToolConfig& c, bool force_native_fps) {
  ParseOptions options;
  options.native_fps = c.native_fps;
  options.source = path;
  Sequence gt = read_tracks_file(path, options);
  if (force_native_fps) gt.native_fps = c.native_fps;
  validate_sequence(gt, SequenceRole::ground_truth);
  return truncate_frames(gt, c.max_frames);
}

Sequence load_predictions(const std::string& path, const ToolConfig& c) {
  ParseOptions options;
  options.native_fps = c.native_fps;
  options.source = path;
  Sequence pred = read_tracks_file(path, options);
  validate_sequence(pred, SequenceRole::tracker_output);
  if (c.roi || c.conf_threshold > 0.0) pred = postprocess_filter(pred, c.roi, c.conf_threshold);
  return pred;
}

int run_evaluate(const std::string& gt_path, const std::string& pred_path, const EvalFlags& flags, bool per_class,
                 const std::string& out_path, const std::string& table_path) {
  ToolConfig c = flags.resolve();
  c.eval.threads = resolve_threads(c.eval.threads);
  const Sequence gt = load_ground_truth(gt_path, c, flags.native_fps_explicit(config_keys(flags.config_path)));
  const Sequence pred = load_predictions(pred_path, c);

  const EvalWindow window = c.eval_fps ? controlled_window(gt, gt.native_fps, *c.eval_fps) : full_window(gt);
  const MetricsReport report = class_report(gt, pred, window, c.eval);

  const std::string table = report_text(report, c.class_labels, per_class);
  std::cout << table;
  if (!out_path.empty()) write_text_file(out_path, dump_json(report_json(report, c.class_labels)));
  if (!table_path.empty()) write_text_file(table_path, table);
  return 0;
}

int run_sweep(const std::string& gt_path, const std::string& pred_dir, const std::vector<double>& rates,
              const EvalFlags& flags, const std::string& out_path, const std::string& table_path) {
  ToolConfig c = flags.resolve();
  c.eval.threads = resolve_threads(c.eval.threads);
  const Sequence gt = load_ground_truth(gt_path, c, flags.native_fps_explicit(config_keys(flags.config_path)));

  std::map<double, Sequence> outputs;
  for (double rate : rates) {
    const std::filesystem::path file = std::filesystem::path(pred_dir) / (rate_name(rate) + "fps.csv");
    if (!std::filesystem::exists(file)) {
      throw InputError("missing tracker output for " + rate_name(rate) + " fps: '" + file.string() + "'");
    }
    outputs.emplace(rate, load_predictions(file.string(), c));
  }

  SweepSpec spec;
  spec.native_fps = gt.native_fps;
  spec.inference_rates = rates;
  spec.eval_fps = c.eval_fps.value_or(1.0);
  spec.eval = c.eval;
  const SweepTable table = fps_sweep(gt, outputs, spec);

  const std::string text = sweep_text(table);
  std::cout << text;
  if (!out_path.empty()) write_text_file(out_path, dump_json(sweep_json(table, c.class_labels)));
  if (!table_path.empty()) write_text_file(table_path, text);
  return 0;
}

int run_convert(const std::string& positions_path, const std::string& grid_path, const std::string& config_path,
                std::optional<double> fps, const std::string& out_path, std::optional<std::size_t> split) {
  const ToolConfig c = config_path.empty() ? ToolConfig{} : load_config(config_path);
  const GridConfig grid = grid_path.empty() ? c.grid : load_grid_config(grid_path);
  const double rate = fps.value_or(c.native_fps);

  std::ifstream in(positions_path);
  if (!in) throw InputError("cannot open '" + positions_path + "'");
  const auto records = parse_positions(in, positions_path);
  const Sequence converted = convert_positions(records, grid, rate);

  if (!split) {
    const std::size_t rows = write_tracks_file(estimate_velocities(converted), out_path);
    std::cout << "wrote " << rows << " rows over " << converted.frames.size() << " frames to " << out_path << "\n";
    return 0;
  }
  if (*split > converted.frames.size()) {
    throw InputError("--split " + std::to_string(*split) + " exceeds the " + std::to_string(converted.frames.size()) +
                     " converted frames");
  }
  const auto [head, tail] = split_frames(converted, *split);
  const std::filesystem::path out(out_path);
  const std::filesystem::path ext = out.has_extension() ? out.extension() : std::filesystem::path(".csv");
  const std::filesystem::path stem = out.parent_path() / out.stem();
  const std::filesystem::path train = stem.string() + "_train" + ext.string();
  const std::filesystem::path test = stem.string() + "_test" + ext.string();
  write_tracks_file(estimate_velocities(head), train);
  write_tracks_file(estimate_velocities(tail), test);
  std::cout << "wrote " << head.frames.size() << " frames to " << train.string() << " and " << tail.frames.size()
            << " frames to " << test.string() << "\n";
  return 0;
}

int run_gen_anchors(const std::string& gt_path, const std::string& config_path, std::optional<long long> k,
                    std::optional<std::uint64_t> seed, std::optional<int> max_iter, std::optional<double> tol,
                    std::optional<int> threads, const std::string& out_path) {
  ToolConfig c = config_path.empty() ? ToolConfig{} : load_config(config_path);
  if (k) c.anchors.k = *k;
  if (seed) c.anchors.seed = *seed;
  if (max_iter) c.anchors.max_iter = *max_iter;
  if (tol) c.anchors.tol = *tol;
  if (threads) c.eval.threads = *threads;
  c.validate();

  ParseOptions options;
  options.native_fps = c.native_fps;
  options.source = gt_path;
  const Sequence gt = read_tracks_file(gt_path, options);
  const Eigen::Matrix3Xd points = collect_centers(gt);
  const AnchorBank bank = generate_anchor_bank(points, c.anchors.k, c.anchors.seed, c.anchors.max_iter, c.anchors.tol,
                                               resolve_threads(c.eval.threads));
  write_anchor_file(bank, out_path);
  std::cout << "wrote " << bank.k() << " anchors from " << points.cols() << " centers to " << out_path << "\n";
  return 0;
}

int run_synth(const std::string& spec_path, const std::string& gt_path, const std::string& pred_path,
              std::string spec_out) {
  const SynthSpec spec = load_synth_spec(spec_path);
  const Sequence gt = gen_scene(spec.scene);
  const Sequence pred = degrade(gt, spec.degrade);
  write_tracks_file(gt, gt_path);
  write_tracks_file(pred, pred_path);
  if (spec_out.empty()) spec_out = pred_path + ".spec.json";
  write_text_file(spec_out, dump_json(synth_spec_json(spec)));
  std::cout << "wrote " << gt.frames.size() << " frames to " << gt_path << " and " << pred_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-target tracking evaluation: HOTA family, AvgTrackDur, AP and frame-rate sweeps"};
  app.require_subcommand(1);

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a tracker output against ground truth");
  std::string gt_path, pred_path, out_path, table_path;
  bool per_class = false;
  EvalFlags eval_flags;
  eval_cmd->add_option("--gt", gt_path, "Ground-truth track CSV")->required();
  eval_cmd->add_option("--pred", pred_path, "Tracker output track CSV")->required();
  eval_cmd->add_option("--eval-fps", eval_flags.eval_fps,
                       "Score a controlled subset at this rate (default: every frame at the native rate; "
                       "config: eval_fps)");
  eval_flags.add(*eval_cmd);
  eval_cmd->add_flag("--per-class", per_class, "Add one table row per class (default: off; config: none)");
  eval_cmd->add_option("--out", out_path, "Write the JSON report here (default: none; config: none)");
  eval_cmd->add_option("--table-out", table_path, "Write the text table here (default: none; config: none)");

  // sweep-fps
  auto* sweep_cmd = app.add_subcommand("sweep-fps", "Score one tracker output per inference rate on a shared window");
  std::string sweep_gt, pred_dir, sweep_out, sweep_table;
  std::vector<double> rates;
  EvalFlags sweep_flags;
  sweep_cmd->add_option("--gt", sweep_gt, "Ground-truth track CSV at the native rate")->required();
  sweep_cmd->add_option("--pred-dir", pred_dir, "Directory holding <rate>fps.csv tracker outputs")->required();
  sweep_cmd->add_option("--rates", rates, "Comma-separated inference rates, e.g. 30,15,10")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--eval-fps", sweep_flags.eval_fps,
                        "Controlled evaluation rate (default: 1; config: eval_fps)");
  sweep_flags.add(*sweep_cmd);
  sweep_cmd->add_option("--out", sweep_out, "Write the JSON sweep table here (default: none; config: none)");
  sweep_cmd->add_option("--table-out", sweep_table, "Write the text table here (default: none; config: none)");

  // convert
  auto* convert_cmd = app.add_subcommand("convert", "Convert grid position annotations to a ground-truth track CSV");
  std::string positions_path, grid_path, convert_config, convert_out;
  std::optional<double> convert_fps;
  std::optional<std::size_t> split;
  convert_cmd->add_option("--positions", positions_path, "CSV of frame,person_id,position_id")->required();
  convert_cmd->add_option("--grid-config", grid_path,
                          "JSON grid definition (default: built-in grid; config: grid)");
  convert_cmd->add_option("--config", convert_config, "JSON config file (default: none)");
  convert_cmd->add_option("--fps", convert_fps, "Annotation frame rate (default: 30; config: native_fps)");
  convert_cmd->add_option("--out", convert_out, "Output track CSV")->required();
  convert_cmd->add_option("--split", split,
                          "Write the first N frames to <out>_train and the rest to <out>_test "
                          "(default: no split; config: none)");

  // gen-anchors
  auto* anchors_cmd = app.add_subcommand("gen-anchors", "Cluster ground-truth centers into an anchor bank");
  std::string anchors_gt, anchors_config, anchors_out;
  std::optional<long long> k;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_iter, anchor_threads;
  std::optional<double> tol;
  anchors_cmd->add_option("--gt", anchors_gt, "Ground-truth track CSV")->required();
  anchors_cmd->add_option("--config", anchors_config, "JSON config file (default: none)");
  anchors_cmd->add_option("--k", k, "Number of anchors (default: 900; config: anchors.k)");
  anchors_cmd->add_option("--seed", seed, "Seed for k-means++ initialization (default: 0; config: anchors.seed)");
  anchors_cmd->add_option("--max-iter", max_iter, "Lloyd iteration cap (default: 300; config: anchors.max_iter)");
  anchors_cmd->add_option("--tol", tol,
                          "Stop when no center moves more than this (default: 1e-6; config: anchors.tol)");
  anchors_cmd->add_option("--threads", anchor_threads, "Worker threads, 0 for all cores (default: 0; config: threads)");
  anchors_cmd->add_option("--out", anchors_out, "Output anchor CSV")->required();

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scene and a degraded tracker output");
  std::string spec_path, synth_gt, synth_pred, synth_spec_out;
  synth_cmd->add_option("--spec", spec_path, "JSON with optional \"scene\" and \"degrade\" objects")->required();
  synth_cmd->add_option("--out-gt", synth_gt, "Ground-truth track CSV to write")->required();
  synth_cmd->add_option("--out-pred", synth_pred, "Tracker-output track CSV to write")->required();
  synth_cmd->add_option("--out-spec", synth_spec_out,
                        "Resolved spec with every default filled in (default: <out-pred>.spec.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (eval_cmd->parsed()) return run_evaluate(gt_path, pred_path, eval_flags, per_class, out_path, table_path);
    if (sweep_cmd->parsed()) return run_sweep(sweep_gt, pred_dir, rates, sweep_flags, sweep_out, sweep_table);
    if (convert_cmd->parsed()) {
      return run_convert(positions_path, grid_path, convert_config, convert_fps, convert_out, split);
    }
    if (anchors_cmd->parsed()) {
      return run_gen_anchors(anchors_gt, anchors_config, k, seed, max_iter, tol, anchor_threads, anchors_out);
    }
    if (synth_cmd->parsed()) return run_synth(spec_path, synth_gt, synth_pred, synth_spec_out);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
