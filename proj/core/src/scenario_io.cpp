#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "bridgesim/error.hpp"
#include "bridgesim/scenario.hpp"

namespace bridgesim {
namespace {

using nlohmann::json;

Vec3 vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ParseError("expected a 3-element array, got " + j.dump());
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

// Accepts 4.2, "4.2", "4.2 m/s" or "10 mph".
double speed_from(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) throw ParseError("speed must be a number or a string with unit, got " + j.dump());
  const std::string s = j.get<std::string>();
  char* end = nullptr;
  const double value = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw ParseError("cannot parse speed '" + s + "'");
  std::string unit(end);
  unit.erase(0, unit.find_first_not_of(' '));
  unit.erase(unit.find_last_not_of(' ') + 1);
  if (unit.empty() || unit == "m/s" || unit == "mps") return value;
  if (unit == "mph") return value * kMetersPerSecondPerMph;
  if (unit == "km/h" || unit == "kph") return value / 3.6;
  throw ParseError("unknown speed unit '" + unit + "'");
}

double speed_or(const json& obj, const char* key, double fallback) {
  return obj.contains(key) ? speed_from(obj.at(key)) : fallback;
}

template <class T>
T value_or(const json& obj, const char* key, T fallback) {
  return obj.contains(key) ? obj.at(key).get<T>() : fallback;
}

Shape shape_from(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "box") return Box{vec3_from(j.at("min")), vec3_from(j.at("max"))};
  if (type == "cylinder") {
    const json& c = j.at("center");
    if (!c.is_array() || c.size() != 2) throw ParseError("cylinder center must be [x, y]");
    return Cylinder{c.at(0).get<double>(), c.at(1).get<double>(), j.at("z_min").get<double>(),
                    j.at("z_max").get<double>(), j.at("radius").get<double>()};
  }
  if (type == "mesh") {
    MeshPatch m;
    m.thickness = j.at("thickness").get<double>();
    for (const auto& t : j.at("triangles")) {
      if (!t.is_array() || t.size() != 3) throw ParseError("mesh triangle needs three vertices");
      m.triangles.push_back({vec3_from(t.at(0)), vec3_from(t.at(1)), vec3_from(t.at(2))});
    }
    if (m.triangles.empty()) throw ParseError("mesh patch needs at least one triangle");
    return m;
  }
  throw ParseError("unknown shape type '" + type + "'");
}

json shape_to_json(const Shape& shape) {
  if (const auto* b = std::get_if<Box>(&shape)) return {{"type", "box"}, {"min", to_json(b->lo)}, {"max", to_json(b->hi)}};
  if (const auto* c = std::get_if<Cylinder>(&shape)) {
    return {{"type", "cylinder"},
            {"center", json::array({c->center_x, c->center_y})},
            {"z_min", c->z_min},
            {"z_max", c->z_max},
            {"radius", c->radius}};
  }
  const auto& m = std::get<MeshPatch>(shape);
  json tris = json::array();
  for (const auto& t : m.triangles) tris.push_back(json::array({to_json(t.a), to_json(t.b), to_json(t.c)}));
  return {{"type", "mesh"}, {"thickness", m.thickness}, {"triangles", tris}};
}

void apply_weight_overrides(ScoringWeights& w, const json& j) {
  const bool slope_given = j.contains("efficiency_slope");
  w.path_gain = value_or(j, "path_gain", w.path_gain);
  w.speeding_loss = value_or(j, "speeding_loss", w.speeding_loss);
  const double base = value_or(j, "efficiency_base", w.efficiency_base);
  if (!slope_given && base != w.efficiency_base) w.efficiency_slope *= base / w.efficiency_base;
  w.efficiency_base = base;
  w.efficiency_slope = value_or(j, "efficiency_slope", w.efficiency_slope);
  w.battery_loss = value_or(j, "battery_loss", w.battery_loss);
  w.human_loss = value_or(j, "human_loss", w.human_loss);
  w.vehicle_loss = value_or(j, "vehicle_loss", w.vehicle_loss);
  w.other_loss = value_or(j, "other_loss", w.other_loss);
  w.accuracy_gain = value_or(j, "accuracy_gain", w.accuracy_gain);
  w.safety_floor = value_or(j, "safety_floor", w.safety_floor);
  w.beta = value_or(j, "beta", w.beta);
}

json weights_to_json(const ScoringWeights& w) {
  return {{"path_gain", w.path_gain},           {"speeding_loss", w.speeding_loss},
          {"efficiency_base", w.efficiency_base}, {"efficiency_slope", w.efficiency_slope},
          {"battery_loss", w.battery_loss},     {"human_loss", w.human_loss},
          {"vehicle_loss", w.vehicle_loss},     {"other_loss", w.other_loss},
          {"accuracy_gain", w.accuracy_gain},   {"safety_floor", w.safety_floor},
          {"beta", w.beta}};
}

ScenarioSpec parse(const json& doc) {
  if (!doc.is_object()) throw ParseError("scenario document must be a JSON object");
  if (!doc.contains("version")) throw ParseError("scenario document lacks a 'version' field");
  const int version = doc.at("version").get<int>();
  if (version != kScenarioFormatVersion) {
    throw ValidationError("version", "unsupported scenario version " + std::to_string(version));
  }

  ScenarioSpec spec;
  spec.name = value_or<std::string>(doc, "name", "");
  spec.seed = value_or<std::uint64_t>(doc, "seed", 0);
  spec.ground_station = vec3_from(doc.at("ground_station"));

  for (const auto& e : doc.at("elements")) {
    BridgeElement el;
    el.id = e.at("id").get<std::string>();
    el.kind = element_kind_from(e.at("kind").get<std::string>());
    el.shape = shape_from(e.at("shape"));
    el.crashable = value_or(e, "crashable", true);
    spec.elements.push_back(std::move(el));
  }

  for (const auto& t : doc.at("tasks")) {
    TaskSpec task;
    task.id = t.at("id").get<int>();
    task.name = value_or<std::string>(t, "name", "");
    for (const auto& p : t.at("reference_points")) task.reference_points.push_back(vec3_from(p));
    task.corridor_threshold_m = value_or(t, "corridor_threshold_m", task.corridor_threshold_m);
    if (t.contains("recommended_distance_m")) {
      const json& r = t.at("recommended_distance_m");
      if (!r.is_array() || r.size() != 2) throw ParseError("recommended_distance_m must be [min, max]");
      task.recommended_distance = {r.at(0).get<double>(), r.at(1).get<double>()};
    }
    task.speed_limit_mps = speed_or(t, "speed_limit", task.speed_limit_mps);
    task.light_required = value_or(t, "light_required", false);
    spec.tasks.push_back(std::move(task));
  }

  if (doc.contains("wind")) {
    const json& w = doc.at("wind");
    spec.wind.level = wind_level_from(w.at("level").get<std::string>());
    if (w.contains("direction")) spec.wind.direction = vec3_from(w.at("direction"));
    spec.wind.force_newtons = value_or(w, "force_newtons", wind_force(spec.wind.level));
  }

  if (doc.contains("traffic")) {
    const json& tr = doc.at("traffic");
    spec.traffic.count = value_or(tr, "count", 0);
    spec.traffic.human_count = value_or(tr, "human_count", 0);
    if (tr.contains("vehicle_half_extents")) spec.traffic.vehicle_half_extents = vec3_from(tr.at("vehicle_half_extents"));
    spec.traffic.human_radius_m = value_or(tr, "human_radius_m", spec.traffic.human_radius_m);
    spec.traffic.human_height_m = value_or(tr, "human_height_m", spec.traffic.human_height_m);
    for (const auto& l : value_or(tr, "lanes", json::array())) {
      Lane lane;
      lane.id = l.at("id").get<std::string>();
      lane.kind = agent_kind_from(value_or<std::string>(l, "kind", "vehicle"));
      for (const auto& p : l.at("points")) lane.points.push_back(vec3_from(p));
      const json& sp = l.at("speed");
      if (sp.is_array()) {
        if (sp.size() != 2) throw ParseError("lane speed must be a value or [min, max]");
        lane.min_speed_mps = speed_from(sp.at(0));
        lane.max_speed_mps = speed_from(sp.at(1));
      } else {
        lane.min_speed_mps = lane.max_speed_mps = speed_from(sp);
      }
      spec.traffic.lanes.push_back(std::move(lane));
    }
  }

  const json job = value_or(doc, "job", json::object());
  spec.job.tau_min_s = value_or(job, "tau_min_s", spec.job.tau_min_s);
  spec.job.tau_max_s = value_or(job, "tau_max_s", spec.job.tau_max_s);
  spec.job.frame_rate_hz = value_or(job, "frame_rate_hz", spec.job.frame_rate_hz);
  spec.job.v_max_mps = speed_or(job, "v_max", spec.job.v_max_mps);
  spec.job.battery_capacity_pct = value_or(job, "battery_capacity_pct", spec.job.battery_capacity_pct);
  spec.job.snapshot_range_m = value_or(job, "snapshot_range_m", spec.job.snapshot_range_m);
  if (job.contains("camera_fov_deg")) {
    const json& fov = job.at("camera_fov_deg");
    if (!fov.is_array() || fov.size() != 2) throw ParseError("camera_fov_deg must be [horizontal, vertical]");
    spec.job.camera_hfov_deg = fov.at(0).get<double>();
    spec.job.camera_vfov_deg = fov.at(1).get<double>();
  }
  spec.job.proximity_warning_m = value_or(job, "proximity_warning_m", spec.job.proximity_warning_m);
  spec.job.distance_reminder_m = value_or(job, "distance_reminder_m", spec.job.distance_reminder_m);

  const json drone = value_or(doc, "drone", json::object());
  spec.drone.mass_kg = value_or(drone, "mass_kg", spec.drone.mass_kg);
  spec.drone.max_forward_speed_mps = speed_or(drone, "max_forward_speed", spec.drone.max_forward_speed_mps);
  spec.drone.max_side_speed_mps = speed_or(drone, "max_side_speed", spec.drone.max_side_speed_mps);
  spec.drone.max_vertical_speed_mps = speed_or(drone, "max_vertical_speed", spec.drone.max_vertical_speed_mps);
  spec.drone.rotation_rate_dps = value_or(drone, "rotation_rate_dps", spec.drone.rotation_rate_dps);
  spec.drone.slow_down_time_s = value_or(drone, "slow_down_time_s", spec.drone.slow_down_time_s);
  spec.drone.radius_m = value_or(drone, "radius_m", spec.drone.radius_m);

  if (!spec.tasks.empty()) {
    spec.job.weights = default_weights(spec.task_count(), spec.job.v_max_mps, spec.min_speed_limit_mps(),
                                       spec.job.tau_min_s, spec.job.tau_max_s);
  }
  if (job.contains("weights")) apply_weight_overrides(spec.job.weights, job.at("weights"));

  if (doc.contains("defect_placement")) {
    const json& dp = doc.at("defect_placement");
    DefectPlacement placement;
    placement.count = dp.at("count").get<int>();
    placement.hosts = value_or(dp, "hosts", std::vector<std::string>{});
    placement.min_area_per_defect_m2 = value_or(dp, "min_area_per_defect_m2", placement.min_area_per_defect_m2);
    spec.defect_placement = std::move(placement);
  }
  if (doc.contains("defects")) {
    for (const auto& d : doc.at("defects")) {
      DefectSpec def;
      def.id = d.at("id").get<std::string>();
      def.position = vec3_from(d.at("position"));
      def.host_element = d.at("host").get<std::string>();
      def.kind = defect_kind_from(value_or<std::string>(d, "kind", "crack"));
      spec.defects.push_back(std::move(def));
    }
  }

  validate(spec);
  if (!doc.contains("defects") && spec.defect_placement) spec.defects = place_defects(spec, spec.seed);
  return spec;
}

}  // namespace

double parse_speed(const nlohmann::json& value) { return speed_from(value); }

ScenarioSpec load_scenario(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed scenario document: ") + e.what());
  }
  try {
    return parse(doc);
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario document: ") + e.what());
  }
}

ScenarioSpec load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open scenario file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_scenario(buf.str());
}

nlohmann::json scenario_to_json(const ScenarioSpec& spec) {
  json doc;
  doc["version"] = kScenarioFormatVersion;
  doc["name"] = spec.name;
  doc["seed"] = spec.seed;
  doc["ground_station"] = to_json(spec.ground_station);

  json elements = json::array();
  for (const auto& e : spec.elements) {
    elements.push_back({{"id", e.id},
                        {"kind", std::string(to_string(e.kind))},
                        {"crashable", e.crashable},
                        {"shape", shape_to_json(e.shape)}});
  }
  doc["elements"] = elements;

  json tasks = json::array();
  for (const auto& t : spec.tasks) {
    json pts = json::array();
    for (const auto& p : t.reference_points) pts.push_back(to_json(p));
    tasks.push_back({{"id", t.id},
                     {"name", t.name},
                     {"reference_points", pts},
                     {"corridor_threshold_m", t.corridor_threshold_m},
                     {"recommended_distance_m", json::array({t.recommended_distance.min_m, t.recommended_distance.max_m})},
                     {"speed_limit", t.speed_limit_mps},
                     {"light_required", t.light_required}});
  }
  doc["tasks"] = tasks;

  json defects = json::array();
  for (const auto& d : spec.defects) {
    defects.push_back({{"id", d.id},
                       {"position", to_json(d.position)},
                       {"host", d.host_element},
                       {"kind", std::string(to_string(d.kind))}});
  }
  doc["defects"] = defects;
  if (spec.defect_placement) {
    doc["defect_placement"] = {{"count", spec.defect_placement->count},
                               {"hosts", spec.defect_placement->hosts},
                               {"min_area_per_defect_m2", spec.defect_placement->min_area_per_defect_m2}};
  }

  doc["wind"] = {{"level", std::string(to_string(spec.wind.level))},
                 {"direction", to_json(spec.wind.direction)},
                 {"force_newtons", spec.wind.force_newtons}};

  json lanes = json::array();
  for (const auto& l : spec.traffic.lanes) {
    json pts = json::array();
    for (const auto& p : l.points) pts.push_back(to_json(p));
    lanes.push_back({{"id", l.id},
                     {"kind", std::string(to_string(l.kind))},
                     {"points", pts},
                     {"speed", json::array({l.min_speed_mps, l.max_speed_mps})}});
  }
  doc["traffic"] = {{"count", spec.traffic.count},
                    {"human_count", spec.traffic.human_count},
                    {"vehicle_half_extents", to_json(spec.traffic.vehicle_half_extents)},
                    {"human_radius_m", spec.traffic.human_radius_m},
                    {"human_height_m", spec.traffic.human_height_m},
                    {"lanes", lanes}};

  const auto& job = spec.job;
  doc["job"] = {{"tau_min_s", job.tau_min_s},
                {"tau_max_s", job.tau_max_s},
                {"frame_rate_hz", job.frame_rate_hz},
                {"v_max", job.v_max_mps},
                {"battery_capacity_pct", job.battery_capacity_pct},
                {"snapshot_range_m", job.snapshot_range_m},
                {"camera_fov_deg", json::array({job.camera_hfov_deg, job.camera_vfov_deg})},
                {"proximity_warning_m", job.proximity_warning_m},
                {"distance_reminder_m", job.distance_reminder_m},
                {"weights", weights_to_json(job.weights)}};

  const auto& d = spec.drone;
  doc["drone"] = {{"mass_kg", d.mass_kg},
                  {"max_forward_speed", d.max_forward_speed_mps},
                  {"max_side_speed", d.max_side_speed_mps},
                  {"max_vertical_speed", d.max_vertical_speed_mps},
                  {"rotation_rate_dps", d.rotation_rate_dps},
                  {"slow_down_time_s", d.slow_down_time_s},
                  {"radius_m", d.radius_m}};
  return doc;
}

}  // namespace bridgesim
