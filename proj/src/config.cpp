#include "mtmc/config.hpp"

#include <fstream>
#include <set>

namespace mtmc {

namespace {

void reject_unknown(const Json& obj, const std::set<std::string>& known, const std::string& where) {
  if (!obj.is_object()) throw InputError(where + ": expected a JSON object");
  for (const auto& item : obj.items()) {
    if (!known.count(item.key())) throw InputError(where + ": unknown key '" + item.key() + "'");
  }
}

template <typename T>
void read(const Json& obj, const char* key, T& out, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(where + "." + key + ": wrong type (" + it->dump() + ")");
  }
}

Roi roi_from_json(const Json& j, const std::string& where) {
  reject_unknown(j, {"rect", "polygon"}, where);
  if (j.contains("rect") == j.contains("polygon")) throw InputError(where + ": give exactly one of rect or polygon");
  try {
    if (j.contains("rect")) {
      const auto r = j["rect"].get<std::vector<double>>();
      if (r.size() != 4) throw InputError(where + ".rect: expected [x_min, y_min, x_max, y_max]");
      return Roi::rectangle(r[0], r[1], r[2], r[3]);
    }
    std::vector<Eigen::Vector2d> vertices;
    for (const auto& p : j["polygon"]) {
      const auto xy = p.get<std::vector<double>>();
      if (xy.size() != 2) throw InputError(where + ".polygon: vertices must be [x, y]");
      vertices.emplace_back(xy[0], xy[1]);
    }
    return Roi::polygon(std::move(vertices));
  } catch (const nlohmann::json::exception&) {
    throw InputError(where + ": malformed ROI");
  }
}

Arena arena_from_json(Arena a, const Json& j, const std::string& where) {
  reject_unknown(j, {"x_min", "x_max", "y_min", "y_max"}, where);
  read(j, "x_min", a.x_min, where);
  read(j, "x_max", a.x_max, where);
  read(j, "y_min", a.y_min, where);
  read(j, "y_max", a.y_max, where);
  return a;
}

Json arena_json(const Arena& a) {
  return {{"x_min", a.x_min}, {"x_max", a.x_max}, {"y_min", a.y_min}, {"y_max", a.y_max}};
}

}  // namespace

void ToolConfig::validate() const {
  eval.validate();
  if (!(conf_threshold >= 0.0 && conf_threshold <= 1.0)) throw InputError("conf_threshold must lie in [0, 1]");
  if (eval.threads < 0) throw InputError("threads must be >= 0");
  if (!(native_fps > 0.0)) throw InputError("native_fps must be > 0");
  if (eval_fps && !(*eval_fps > 0.0)) throw InputError("eval_fps must be > 0");
  grid.validate();
  if (anchors.k < 1) throw InputError("anchors.k must be >= 1");
  if (anchors.max_iter < 1) throw InputError("anchors.max_iter must be >= 1");
  if (!(anchors.tol >= 0.0)) throw InputError("anchors.tol must be >= 0");
}

GridConfig grid_from_json(GridConfig g, const Json& j, const std::string& where) {
  reject_unknown(j,
                 {"origin_x", "origin_y", "step", "grid_width", "grid_height", "person_height", "person_width",
                  "person_length", "recenter_dx", "recenter_dy", "class_id"},
                 where);
  read(j, "origin_x", g.origin_x, where);
  read(j, "origin_y", g.origin_y, where);
  read(j, "step", g.step, where);
  read(j, "grid_width", g.grid_width, where);
  read(j, "grid_height", g.grid_height, where);
  read(j, "person_height", g.person_height, where);
  read(j, "person_width", g.person_width, where);
  read(j, "person_length", g.person_length, where);
  read(j, "recenter_dx", g.recenter_dx, where);
  read(j, "recenter_dy", g.recenter_dy, where);
  read(j, "class_id", g.class_id, where);
  return g;
}

ToolConfig apply_config_json(ToolConfig c, const Json& j, const std::string& source) {
  reject_unknown(j,
                 {"similarity", "alpha_grid", "dur_alpha", "ap_alpha", "primary_class", "class_labels", "roi",
                  "conf_threshold", "native_fps", "eval_fps", "max_frames", "grid", "anchors", "seed", "threads"},
                 source);
  if (j.contains("similarity")) {
    const Json& s = j["similarity"];
    const std::string where = source + ".similarity";
    reject_unknown(s, {"mode", "d_max"}, where);
    if (s.contains("mode")) {
      std::string mode;
      read(s, "mode", mode, where);
      c.eval.similarity.mode = similarity_mode_from_string(mode);
    }
    read(s, "d_max", c.eval.similarity.d_max, where);
  }
  read(j, "alpha_grid", c.eval.alpha_grid, source);
  read(j, "dur_alpha", c.eval.dur_alpha, source);
  read(j, "ap_alpha", c.eval.ap_alpha, source);
  read(j, "primary_class", c.eval.primary_class, source);
  read(j, "threads", c.eval.threads, source);
  if (j.contains("class_labels")) {
    const Json& labels = j["class_labels"];
    if (!labels.is_object()) throw InputError(source + ".class_labels: expected an object of id -> name");
    for (const auto& item : labels.items()) {
      ClassId id = 0;
      try {
        std::size_t used = 0;
        id = std::stoi(item.key(), &used);
        if (used != item.key().size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw InputError(source + ".class_labels: key '" + item.key() + "' is not a class id");
      }
      if (!item.value().is_string()) throw InputError(source + ".class_labels: names must be strings");
      c.class_labels[id] = item.value().get<std::string>();
    }
  }
  if (j.contains("roi")) {
    if (j["roi"].is_null()) {
      c.roi.reset();
    } else {
      c.roi = roi_from_json(j["roi"], source + ".roi");
    }
  }
  read(j, "conf_threshold", c.conf_threshold, source);
  read(j, "native_fps", c.native_fps, source);
  if (j.contains("eval_fps")) {
    if (j["eval_fps"].is_null()) {
      c.eval_fps.reset();
    } else {
      double v = 0;
      read(j, "eval_fps", v, source);
      c.eval_fps = v;
    }
  }
  read(j, "max_frames", c.max_frames, source);
  if (j.contains("grid")) c.grid = grid_from_json(c.grid, j["grid"], source + ".grid");
  if (j.contains("anchors")) {
    const Json& a = j["anchors"];
    const std::string where = source + ".anchors";
    reject_unknown(a, {"k", "seed", "max_iter", "tol"}, where);
    read(a, "k", c.anchors.k, where);
    read(a, "seed", c.anchors.seed, where);
    read(a, "max_iter", c.anchors.max_iter, where);
    read(a, "tol", c.anchors.tol, where);
  }
  read(j, "seed", c.seed, source);
  c.validate();
  return c;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
}

ToolConfig load_config(const std::filesystem::path& path, ToolConfig base) {
  return apply_config_json(std::move(base), read_json_file(path), path.string());
}

GridConfig load_grid_config(const std::filesystem::path& path) {
  GridConfig g = grid_from_json({}, read_json_file(path), path.string());
  g.validate();
  return g;
}

Json config_json(const ToolConfig& c) {
  Json j;
  j["similarity"] = {{"mode", to_string(c.eval.similarity.mode)}, {"d_max", c.eval.similarity.d_max}};
  j["alpha_grid"] = c.eval.alpha_grid;
  j["dur_alpha"] = c.eval.dur_alpha;
  j["ap_alpha"] = c.eval.ap_alpha;
  j["primary_class"] = c.eval.primary_class;
  Json labels = Json::object();
  for (const auto& [id, name] : c.class_labels) labels[std::to_string(id)] = name;
  j["class_labels"] = std::move(labels);
  if (c.roi) {
    Json poly = Json::array();
    for (const auto& v : c.roi->vertices()) poly.push_back({v.x(), v.y()});
    j["roi"] = {{"polygon", std::move(poly)}};
  } else {
    j["roi"] = nullptr;
  }
  j["conf_threshold"] = c.conf_threshold;
  j["native_fps"] = c.native_fps;
  j["eval_fps"] = c.eval_fps ? Json(*c.eval_fps) : Json(nullptr);
  j["max_frames"] = c.max_frames;
  const GridConfig& g = c.grid;
  j["grid"] = {{"origin_x", g.origin_x},           {"origin_y", g.origin_y},
               {"step", g.step},                   {"grid_width", g.grid_width},
               {"grid_height", g.grid_height},     {"person_height", g.person_height},
               {"person_width", g.person_width},   {"person_length", g.person_length},
               {"recenter_dx", g.recenter_dx},     {"recenter_dy", g.recenter_dy},
               {"class_id", g.class_id}};
  j["anchors"] = {{"k", c.anchors.k}, {"seed", c.anchors.seed}, {"max_iter", c.anchors.max_iter},
                  {"tol", c.anchors.tol}};
  j["seed"] = c.seed;
  j["threads"] = c.eval.threads;
  return j;
}

SynthSpec synth_spec_from_json(const Json& j, const std::string& source) {
  reject_unknown(j, {"scene", "degrade"}, source);
  SynthSpec spec;
  if (j.contains("scene")) {
    const Json& s = j["scene"];
    const std::string where = source + ".scene";
    reject_unknown(s,
                   {"n_objects", "duration_s", "fps", "arena", "motion", "speed", "classes", "extent", "seed",
                    "scene_name"},
                   where);
    SceneSpec& sc = spec.scene;
    read(s, "n_objects", sc.n_objects, where);
    read(s, "duration_s", sc.duration_s, where);
    read(s, "fps", sc.fps, where);
    if (s.contains("arena")) sc.arena = arena_from_json(sc.arena, s["arena"], where + ".arena");
    if (s.contains("motion")) {
      std::string motion;
      read(s, "motion", motion, where);
      sc.motion = motion_model_from_string(motion);
    }
    read(s, "speed", sc.speed, where);
    read(s, "classes", sc.classes, where);
    if (s.contains("extent")) {
      std::vector<double> e;
      read(s, "extent", e, where);
      if (e.size() != 3) throw InputError(where + ".extent: expected [width, length, height]");
      sc.extent = Eigen::Vector3d(e[0], e[1], e[2]);
    }
    read(s, "seed", sc.seed, where);
    read(s, "scene_name", sc.scene_name, where);
    sc.validate();
  }
  if (j.contains("degrade")) {
    const Json& d = j["degrade"];
    const std::string where = source + ".degrade";
    reject_unknown(d, {"drop_prob", "loc_noise_sigma", "id_switch_prob", "fp_rate", "seed", "fp_arena"}, where);
    DegradeSpec& dg = spec.degrade;
    read(d, "drop_prob", dg.drop_prob, where);
    read(d, "loc_noise_sigma", dg.loc_noise_sigma, where);
    read(d, "id_switch_prob", dg.id_switch_prob, where);
    read(d, "fp_rate", dg.fp_rate, where);
    read(d, "seed", dg.seed, where);
    if (d.contains("fp_arena") && !d["fp_arena"].is_null()) dg.fp_arena = arena_from_json({}, d["fp_arena"], where + ".fp_arena");
    dg.validate();
  }
  return spec;
}

SynthSpec load_synth_spec(const std::filesystem::path& path) {
  return synth_spec_from_json(read_json_file(path), path.string());
}

Json synth_spec_json(const SynthSpec& spec) {
  const SceneSpec& s = spec.scene;
  const DegradeSpec& d = spec.degrade;
  Json j;
  j["scene"] = {{"n_objects", s.n_objects},
                {"duration_s", s.duration_s},
                {"fps", s.fps},
                {"arena", arena_json(s.arena)},
                {"motion", to_string(s.motion)},
                {"speed", s.speed},
                {"classes", s.classes},
                {"extent", {s.extent.x(), s.extent.y(), s.extent.z()}},
                {"seed", s.seed},
                {"scene_name", s.scene_name}};
  j["degrade"] = {{"drop_prob", d.drop_prob},
                  {"loc_noise_sigma", d.loc_noise_sigma},
                  {"id_switch_prob", d.id_switch_prob},
                  {"fp_rate", d.fp_rate},
                  {"seed", d.seed},
                  {"fp_arena", d.fp_arena ? arena_json(*d.fp_arena) : Json(nullptr)}};
  return j;
}

}  // namespace mtmc
