// Acceptance checks. Prints one PASS/FAIL line per criterion; exit status is
// the number of failures (capped at 1).

#include "mtmc/anchors.hpp"
#include "mtmc/fpslab.hpp"
#include "mtmc/hungarian.hpp"
#include "mtmc/ingest.hpp"
#include "mtmc/metrics.hpp"
#include "mtmc/report.hpp"
#include "mtmc/synthgen.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace mtmc;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
  void require(bool ok, const std::string& why) {
    if (!ok) fail(why);
  }
};

std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

Detection person(TrackId id, double x, double y, ClassId cls = 0) {
  Detection d;
  d.box = make_box(x, y, 0.9, 0.6, 0.6, 1.8);
  d.class_id = cls;
  d.track_id = id;
  return d;
}

EvalWindow window_of(const Sequence& seq, double f0) {
  EvalWindow w;
  w.f0 = f0;
  for (const auto& f : seq.frames) w.frame_indices.push_back(f.index);
  return w;
}

double max_metric_gap(const ClassMetrics& a, const ClassMetrics& b) {
  return std::max({std::abs(a.hota - b.hota), std::abs(a.deta - b.deta), std::abs(a.assa - b.assa),
                   std::abs(a.loca - b.loca), std::abs(a.ap - b.ap),
                   std::abs(a.avg_track_dur_seconds - b.avg_track_dur_seconds)});
}

// ---------------------------------------------------------------------------

Outcome assignment_optimality() {
  Outcome out;
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> size(1, 6);
  std::uniform_real_distribution<double> value(0.0, 10.0);
  const auto t0 = Clock::now();
  for (int trial = 0; trial < 200; ++trial) {
    const int n = size(gen), m = size(gen);
    Eigen::MatrixXd cost(n, m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) cost(i, j) = trial % 2 ? std::floor(value(gen)) : value(gen);
    }
    // Exhaustive minimum over injections of the smaller side into the larger.
    const bool wide = n <= m;
    const int small = wide ? n : m, large = wide ? m : n;
    std::vector<int> perm(static_cast<std::size_t>(large));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double total = 0;
      for (int i = 0; i < small; ++i) total += wide ? cost(i, perm[i]) : cost(perm[i], i);
      best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));

    const Assignment a = hungarian(cost);
    if (static_cast<int>(a.size()) != small) {
      out.fail(fmt("trial %d: %zu pairs", trial, a.size()));
      continue;
    }
    // Sum along the smaller side, in the same order as the exhaustive scan.
    std::vector<double> along(static_cast<std::size_t>(small));
    for (const auto& [r, c] : a) along[static_cast<std::size_t>(wide ? r : c)] = cost(r, c);
    double total = 0;
    for (double v : along) total += v;
    if (total != best) out.fail(fmt("trial %d: cost %.17g vs minimum %.17g", trial, total, best));
  }
  const double elapsed = seconds_since(t0);
  out.require(elapsed < 1.0, fmt("%.3f s", elapsed));
  if (out.pass) out.detail = fmt("200 matrices, %.3f s", elapsed);
  return out;
}

Outcome oracle_equivalence() {
  Outcome out;
  const auto t0 = Clock::now();
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SplitMix64 rng = SplitMix64::stream(seed, 99);
    SceneSpec scene;
    scene.n_objects = 1 + static_cast<int>(rng.index(4));
    scene.fps = 1 + static_cast<double>(rng.index(3));
    scene.duration_s = static_cast<double>(2 + rng.index(9)) / scene.fps;
    scene.arena = {-1.5, 1.5, -1.5, 1.5};
    scene.motion = seed % 3 == 0 ? MotionModel::waypoint : MotionModel::constant_velocity;
    scene.classes = seed % 4 == 0 ? std::vector<ClassId>{0, 1} : std::vector<ClassId>{0};
    scene.seed = seed;
    const Sequence gt = gen_scene(scene);

    DegradeSpec spec;
    spec.drop_prob = 0.15;
    spec.loc_noise_sigma = 0.05 + 0.1 * rng.uniform();
    spec.id_switch_prob = 0.25 * rng.uniform();
    spec.fp_rate = 0.8;
    spec.seed = seed + 1000;
    spec.fp_arena = scene.arena;
    Sequence pred = degrade(gt, spec);
    for (auto& f : pred.frames) {
      if (f.detections.size() > kOracleMaxPerFrame) f.detections.resize(kOracleMaxPerFrame);
      for (std::size_t i = 0; i < f.detections.size(); ++i) {
        f.detections[i].confidence = 0.05 + 0.9 * rng.uniform();
      }
    }

    EvalOptions options;
    if (seed % 5 == 1) options.similarity = {SimilarityMode::center_distance, 0.8};
    const EvalWindow window = window_of(gt, scene.fps);
    const MetricsReport fast = class_report(gt, pred, window, options);
    const MetricsReport slow = oracle_metrics(gt, pred, window, options);
    double gap = max_metric_gap(fast.class_average, slow.class_average);
    if (fast.per_class.size() != slow.per_class.size()) out.fail(fmt("seed %llu: class sets differ", (unsigned long long)seed));
    for (const auto& [cls, m] : fast.per_class) {
      const auto it = slow.per_class.find(cls);
      if (it != slow.per_class.end()) gap = std::max(gap, max_metric_gap(m, it->second));
    }
    worst = std::max(worst, gap);
    if (gap > 1e-12) out.fail(fmt("seed %llu: gap %.3g", (unsigned long long)seed, gap));
  }
  const double elapsed = seconds_since(t0);
  out.require(elapsed < 10.0, fmt("%.2f s", elapsed));
  if (out.pass) out.detail = fmt("100 scenes, max gap %.3g, %.2f s", worst, elapsed);
  return out;
}

Outcome duration_exactness() {
  Outcome out;
  auto matched = [](TrackId id) {
    FrameMatchSet m;
    m.pairs.push_back({1, id, 1.0});
    return m;
  };
  std::vector<FrameMatchSet> ten(10, matched(7));
  std::vector<FrameMatchSet> split(7, matched(3));
  split[4] = FrameMatchSet{{}, {1}, {3}};
  std::vector<FrameMatchSet> none(5, FrameMatchSet{{}, {1}, {2}});
  const double a = avg_track_dur(ten, 2.0), b = avg_track_dur(split, 1.0), c = avg_track_dur(none, 1.0);
  out.require(a == 5.0, fmt("10 frames at f0=2: %.17g", a));
  out.require(b == 3.0, fmt("4+2 frames at f0=1: %.17g", b));
  out.require(c == 0.0, fmt("no runs: %.17g", c));
  if (out.pass) out.detail = "5.0 s, 3.0 s, 0 s";
  return out;
}

Outcome perfect_tracker() {
  Outcome out;
  SceneSpec scene;
  scene.n_objects = 8;
  scene.duration_s = 20;
  scene.fps = 10;
  scene.classes = {0, 2};
  scene.seed = 12;
  const Sequence gt = gen_scene(scene);
  for (const EvalWindow& window : {full_window(gt), controlled_window(gt, 10, 2)}) {
    const MetricsReport r = class_report(gt, gt, window, EvalOptions{});
    const double expected_dur = static_cast<double>(window.frame_indices.size()) / window.f0;
    std::vector<ClassMetrics> all = {r.class_average};
    for (const auto& [cls, m] : r.per_class) all.push_back(m);
    for (const auto& m : all) {
      out.require(m.hota == 1.0 && m.deta == 1.0 && m.assa == 1.0 && m.loca == 1.0 && m.ap == 1.0,
                  fmt("HOTA %.17g DetA %.17g AssA %.17g LocA %.17g AP %.17g", m.hota, m.deta, m.assa, m.loca, m.ap));
      out.require(m.avg_track_dur_seconds == expected_dur,
                  fmt("AvgTrackDur %.17g vs %.17g", m.avg_track_dur_seconds, expected_dur));
    }
  }
  if (out.pass) out.detail = "all components 1, AvgTrackDur 20 s at 10 and 2 fps";
  return out;
}

Outcome controlled_window_protocol() {
  Outcome out;
  Sequence gt;
  gt.native_fps = 30;
  for (FrameIndex f = 0; f < 9000; ++f) gt.frames.push_back({f, {person(1, 0.001 * static_cast<double>(f % 100), 0)}});
  const EvalWindow w = controlled_window(gt, 30, 1);
  out.require(w.frame_indices.size() == 300, fmt("%zu window frames", w.frame_indices.size()));
  const MetricsReport r = class_report(gt, gt, w, EvalOptions{});
  out.require(r.window.evaluated_frames == 300 && r.window.gt_frames == 9000,
              fmt("report window %zu of %zu", r.window.evaluated_frames, r.window.gt_frames));
  const Sequence sub = stride_subsample(gt, 5);
  out.require(sub.frames.size() == 1800, fmt("stride 5 kept %zu", sub.frames.size()));
  for (std::size_t i = 0; i < sub.frames.size(); ++i) {
    if (sub.frames[i].index != static_cast<FrameIndex>(5 * i)) {
      out.fail(fmt("stride 5 frame %zu has index %lld", i, (long long)sub.frames[i].index));
      break;
    }
  }
  if (out.pass) out.detail = "300 of 9000 frames; stride 5 keeps 1800";
  return out;
}

Outcome association_collapse() {
  Outcome out;
  SceneSpec scene;
  scene.n_objects = 12;
  scene.duration_s = 120;
  scene.fps = 30;
  scene.seed = 31;
  const Sequence gt = gen_scene(scene);

  // Switches begin below 10 fps; per-second switch pressure rises as the rate drops.
  const std::vector<std::pair<double, double>> profile = {{30, 0.0}, {15, 0.0}, {10, 0.0}, {6, 0.02},
                                                          {5, 0.05}, {3, 0.15}, {2, 0.35}, {1, 0.9}};
  const double onset = 10;
  SweepSpec sweep;
  sweep.native_fps = 30;
  sweep.eval_fps = 1;
  std::map<double, Sequence> outputs;
  for (const auto& [rate, p] : profile) {
    sweep.inference_rates.push_back(rate);
    DegradeSpec spec;
    spec.loc_noise_sigma = 0.02;
    spec.id_switch_prob = p;
    spec.seed = 5;
    outputs[rate] = degrade(stride_subsample(gt, stride_for_rate(30, rate)), spec);
  }
  const SweepTable table = fps_sweep(gt, outputs, sweep);
  double deta_lo = 1, deta_hi = 0;
  for (const auto& row : table.rows) {
    deta_lo = std::min(deta_lo, row.report.class_average.deta);
    deta_hi = std::max(deta_hi, row.report.class_average.deta);
  }
  out.require(deta_hi - deta_lo < 0.01, fmt("DetA spread %.2f pp", 100 * (deta_hi - deta_lo)));
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    if (table.rows[i - 1].rate > onset) continue;
    const ClassMetrics& prev = table.rows[i - 1].report.class_average;
    const ClassMetrics& cur = table.rows[i].report.class_average;
    out.require(cur.assa < prev.assa,
                fmt("AssA %.4f at %g fps vs %.4f at %g fps", cur.assa, table.rows[i].rate, prev.assa, table.rows[i - 1].rate));
    out.require(cur.avg_track_dur_seconds < prev.avg_track_dur_seconds,
                fmt("AvgTrackDur %.3f at %g fps vs %.3f at %g fps", cur.avg_track_dur_seconds, table.rows[i].rate,
                    prev.avg_track_dur_seconds, table.rows[i - 1].rate));
  }

  SceneSpec tiny;
  tiny.n_objects = 1;
  tiny.duration_s = 10;
  tiny.fps = 1;
  tiny.seed = 2;
  const Sequence tiny_gt = gen_scene(tiny);
  DegradeSpec always;
  always.id_switch_prob = 1.0;
  const Sequence switched = degrade(tiny_gt, always);
  const auto matches = match_window(tiny_gt, switched, window_of(tiny_gt, 1.0), SimilaritySpec{}, 0.5);
  const double dur = avg_track_dur(matches, 1.0);
  out.require(dur == 1.0, fmt("id_switch_prob = 1 gives %.17g s", dur));
  if (out.pass) {
    out.detail = fmt("DetA spread %.2f pp; AssA %.3f -> %.3f; AvgTrackDur %.1f s -> %.1f s", 100 * (deta_hi - deta_lo),
                     table.rows.front().report.class_average.assa, table.rows.back().report.class_average.assa,
                     table.rows.front().report.class_average.avg_track_dur_seconds,
                     table.rows.back().report.class_average.avg_track_dur_seconds);
  }
  return out;
}

Outcome false_positive_indifference() {
  Outcome out;
  SceneSpec scene;
  scene.n_objects = 6;
  scene.duration_s = 30;
  scene.fps = 5;
  scene.arena = {-4, 4, -4, 4};
  scene.seed = 8;
  const Sequence gt = gen_scene(scene);
  DegradeSpec spec;
  spec.drop_prob = 0.1;
  spec.loc_noise_sigma = 0.08;
  spec.id_switch_prob = 0.05;
  spec.seed = 3;
  const Sequence pred = degrade(gt, spec);

  // Far-away boxes and near misses below the duration gate.
  Sequence noisy = pred;
  TrackId next = 100000;
  for (std::size_t f = 0; f < noisy.frames.size(); ++f) {
    auto& dets = noisy.frames[f].detections;
    dets.push_back(person(next++, 50.0 + static_cast<double>(f % 7), -40.0));
    for (const auto& g : gt.frames[f].detections) {
      if (f % 3 == 0) dets.push_back(person(next++, g.box.x() + 0.45, g.box.y()));
    }
  }
  const EvalWindow window = window_of(gt, 5.0);
  const double before = avg_track_dur(match_window(gt, pred, window, SimilaritySpec{}, 0.5), 5.0);
  const double after = avg_track_dur(match_window(gt, noisy, window, SimilaritySpec{}, 0.5), 5.0);
  out.require(before == after, fmt("%.17g vs %.17g", before, after));
  EvalOptions options;
  const double report_before = class_report(gt, pred, window, options).class_average.avg_track_dur_seconds;
  const double report_after = class_report(gt, noisy, window, options).class_average.avg_track_dur_seconds;
  out.require(report_before == report_after, fmt("report %.17g vs %.17g", report_before, report_after));
  if (out.pass) out.detail = fmt("AvgTrackDur %.17g s with and without false positives", before);
  return out;
}

Outcome kmeans_checks() {
  Outcome out;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> n(0.0, 3.0);
    Eigen::Matrix3Xd p(3, 600);
    for (Eigen::Index i = 0; i < p.cols(); ++i) p.col(i) << n(gen), n(gen), 0.3 * n(gen);
    const AnchorBank bank = generate_anchor_bank(p, 2 + static_cast<Eigen::Index>(seed * 3), seed);
    for (std::size_t i = 1; i < bank.inertia_history.size(); ++i) {
      if (bank.inertia_history[i] > bank.inertia_history[i - 1] * (1 + 1e-12)) {
        out.fail(fmt("seed %llu step %zu: %.17g > %.17g", (unsigned long long)seed, i, bank.inertia_history[i],
                     bank.inertia_history[i - 1]));
      }
    }
  }

  {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::Matrix3Xd p(3, 400);
    Eigen::Vector3d mean_a = Eigen::Vector3d::Zero(), mean_b = Eigen::Vector3d::Zero();
    for (Eigen::Index i = 0; i < 400; ++i) {
      const Eigen::Vector3d base = i % 2 ? Eigen::Vector3d(30, -4, 0.9) : Eigen::Vector3d(-6, 12, 0.9);
      p.col(i) = base + Eigen::Vector3d(u(gen), u(gen), 0.1 * u(gen));
      (i % 2 ? mean_b : mean_a) += p.col(i) / 200.0;
    }
    const AnchorBank bank = generate_anchor_bank(p, 2, 4);
    const Eigen::Index ia = bank.centers(0, 0) < 0 ? 0 : 1;
    const double err = std::max((bank.centers.col(ia) - mean_a).norm(), (bank.centers.col(1 - ia) - mean_b).norm());
    out.require(err < 1e-9, fmt("two-blob error %.3g", err));
  }

  std::vector<PositionRecord> records;
  SplitMix64 rng(77);
  for (FrameIndex f = 0; f < 400; ++f) {
    for (TrackId person_id = 0; person_id < 25; ++person_id) {
      records.push_back({f, person_id, static_cast<std::int64_t>(rng.index(480 * 1440))});
    }
  }
  const Eigen::Matrix3Xd centers = collect_centers(convert_positions(records, GridConfig{}, 2.0));
  out.require(centers.cols() == 10000, fmt("%lld centers", (long long)centers.cols()));
  const auto t0 = Clock::now();
  const AnchorBank bank = generate_anchor_bank(centers, 900, 0);
  const double elapsed = seconds_since(t0);
  out.require(bank.k() == 900, fmt("k = %lld", (long long)bank.k()));
  out.require(elapsed < 5.0, fmt("K=900 took %.2f s", elapsed));
  if (out.pass) out.detail = fmt("monotone over 20 runs; K=900 from 10000 points in %.2f s", elapsed);
  return out;
}

Outcome conversion_geometry() {
  Outcome out;
  GridConfig grid;
  std::vector<PositionRecord> records;
  for (FrameIndex f = 0; f < 400; ++f) {
    records.push_back({f, 1, 0});
    records.push_back({f, 2, 480 * 17 + 5 + f});
  }
  const Sequence seq = convert_positions(records, grid, 2.0);
  bool origin_ok = true, z_ok = true;
  for (const auto& f : seq.frames) {
    for (const auto& d : f.detections) {
      z_ok = z_ok && d.box.z() == grid.person_height / 2;
      if (*d.track_id == 1) origin_ok = origin_ok && d.box.x() == grid.origin_x && d.box.y() == grid.origin_y;
    }
  }
  out.require(origin_ok, "position 0 is not at the origin");
  out.require(z_ok, "z differs from half the person height");
  const auto [train, test] = split_frames(seq, 360);
  out.require(train.frames.size() == 360 && test.frames.size() == 40,
              fmt("split %zu/%zu", train.frames.size(), test.frames.size()));
  out.require(!test.frames.empty() && test.frames.front().index == 360, "test half does not start at frame 360");
  if (out.pass) out.detail = "origin, z = 0.9 m, 360/40 split";
  return out;
}

Outcome throughput() {
  Outcome out;
  SceneSpec scene;
  scene.n_objects = 20;
  scene.duration_s = 300;
  scene.fps = 30;
  scene.arena = {-15, 15, -15, 15};
  scene.seed = 9;
  const Sequence gt = gen_scene(scene);
  DegradeSpec spec;
  spec.drop_prob = 0.05;
  spec.loc_noise_sigma = 0.1;
  spec.id_switch_prob = 0.002;
  spec.fp_rate = 1.0;
  spec.seed = 4;
  const Sequence pred = degrade(gt, spec);
  out.require(gt.frames.size() == 9000, fmt("%zu frames", gt.frames.size()));

  const int threads = std::max(4u, std::thread::hardware_concurrency());
  EvalOptions options;
  options.threads = threads;
  auto t0 = Clock::now();
  const std::string parallel = dump_json(report_json(class_report(gt, pred, full_window(gt), options)));
  const double elapsed = seconds_since(t0);
  options.threads = 1;
  t0 = Clock::now();
  const std::string serial = dump_json(report_json(class_report(gt, pred, full_window(gt), options)));
  const double elapsed_serial = seconds_since(t0);
  out.require(parallel == serial, "reports differ between thread counts");
  out.require(elapsed < 10.0, fmt("%.2f s with %d threads", elapsed, threads));
  if (out.pass) {
    out.detail = fmt("9000 frames x 20 objects: %.2f s (%d threads), %.2f s (1 thread), identical output", elapsed,
                     threads, elapsed_serial);
  }
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"assignment optimality", assignment_optimality},
      {"metric oracle equivalence", oracle_equivalence},
      {"track duration exactness", duration_exactness},
      {"perfect-tracker fixed point", perfect_tracker},
      {"controlled-window protocol", controlled_window_protocol},
      {"association-collapse shape", association_collapse},
      {"false-positive indifference", false_positive_indifference},
      {"k-means", kmeans_checks},
      {"conversion geometry", conversion_geometry},
      {"throughput", throughput},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
