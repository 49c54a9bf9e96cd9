#include "bridgesim/wire.hpp"

#include <array>
#include <cmath>

#include "bridgesim/error.hpp"

namespace bridgesim {
namespace {

using nlohmann::json;

constexpr std::array<std::pair<WireKind, std::string_view>, 9> kKinds{{
    {WireKind::hello, "hello"},
    {WireKind::scenario_summary, "scenario_summary"},
    {WireKind::control, "control"},
    {WireKind::frame, "frame"},
    {WireKind::feedback, "feedback"},
    {WireKind::hud, "hud"},
    {WireKind::session_end, "session_end"},
    {WireKind::report_ready, "report_ready"},
    {WireKind::error, "error"},
}};

json vec(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

double axis(const json& payload, const char* key, int& clamped) {
  if (!payload.contains(key)) return 0.0;
  const json& v = payload.at(key);
  if (!v.is_number()) throw ProtocolError(std::string("control axis '") + key + "' must be a number");
  const double x = v.get<double>();
  if (std::isnan(x)) throw ProtocolError(std::string("control axis '") + key + "' is not a number");
  if (x > 1.0 || x < -1.0) {
    ++clamped;
    return x > 1.0 ? 1.0 : -1.0;
  }
  return x;
}

bool button(const json& payload, const char* key) {
  if (!payload.contains(key)) return false;
  const json& v = payload.at(key);
  if (!v.is_boolean()) throw ProtocolError(std::string("control button '") + key + "' must be a boolean");
  return v.get<bool>();
}

}  // namespace

std::string_view to_string(WireKind k) {
  for (const auto& [kind, name] : kKinds) {
    if (kind == k) return name;
  }
  return "?";
}

WireKind wire_kind_from(std::string_view s) {
  for (const auto& [kind, name] : kKinds) {
    if (name == s) return kind;
  }
  throw ProtocolError("unknown message kind '" + std::string(s) + "'");
}

bool allowed(WireKind kind, Direction dir) {
  const bool from_client = kind == WireKind::hello || kind == WireKind::control;
  return from_client == (dir == Direction::client_to_server);
}

std::string encode(const WireMessage& m) {
  json j = {{"kind", to_string(m.kind)}, {"seq", m.seq}, {"payload", m.payload}};
  return j.dump() + '\n';
}

WireMessage decode(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  json j;
  try {
    j = json::parse(line.begin(), line.end());
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("malformed message: ") + e.what());
  }
  if (!j.is_object()) throw ProtocolError("message must be a JSON object");
  if (!j.contains("kind") || !j.at("kind").is_string()) throw ProtocolError("message needs a string 'kind'");
  if (!j.contains("seq") || !j.at("seq").is_number_unsigned()) {
    throw ProtocolError("message needs a non-negative integer 'seq'");
  }
  WireMessage m;
  m.kind = wire_kind_from(j.at("kind").get<std::string>());
  m.seq = j.at("seq").get<std::uint64_t>();
  if (j.contains("payload")) {
    if (!j.at("payload").is_object()) throw ProtocolError("'payload' must be an object");
    m.payload = j.at("payload");
  }
  return m;
}

void SequenceCheck::accept(std::uint64_t seq) {
  if (last_ && seq <= *last_) {
    throw ProtocolError("sequence number " + std::to_string(seq) + " does not increase (last " +
                        std::to_string(*last_) + ")");
  }
  last_ = seq;
}

ControlMessage parse_control(const json& payload) {
  ControlMessage c;
  c.held.fb = axis(payload, "fb", c.clamped_axes);
  c.held.rl = axis(payload, "rl", c.clamped_axes);
  c.held.ud = axis(payload, "ud", c.clamped_axes);
  c.held.rt = axis(payload, "rt", c.clamped_axes);
  c.held.light = button(payload, "light");
  c.held.snapshot = button(payload, "snapshot");
  if (payload.contains("questionnaire")) c.questionnaire = payload.at("questionnaire");
  return c;
}

json control_payload(const ControlInput& held) {
  return {{"fb", held.fb},       {"rl", held.rl},       {"ud", held.ud},
          {"rt", held.rt},       {"light", held.light}, {"snapshot", held.snapshot}};
}

json hello_payload() { return {{"v", kWireVersion}}; }

json scenario_summary_payload(const ScenarioSpec& sc) {
  json tasks = json::array();
  for (const auto& t : sc.tasks) {
    json points = json::array();
    for (const auto& p : t.reference_points) points.push_back(vec(p));
    tasks.push_back({{"id", t.id},
                     {"name", t.name},
                     {"reference_points", points},
                     {"corridor_threshold_m", t.corridor_threshold_m},
                     {"recommended_distance_m", {t.recommended_distance.min_m, t.recommended_distance.max_m}},
                     {"speed_limit_mps", t.speed_limit_mps},
                     {"light_required", t.light_required}});
  }
  const JobSpec& job = sc.job;
  return {{"v", kWireVersion},
          {"name", sc.name},
          {"tasks", tasks},
          {"ground_station", vec(sc.ground_station)},
          {"defect_count", sc.defects.size()},
          {"wind", {{"level", to_string(sc.wind.level)}, {"direction", vec(sc.wind.direction)}}},
          {"job",
           {{"tau_min_s", job.tau_min_s},
            {"tau_max_s", job.tau_max_s},
            {"frame_rate_hz", job.frame_rate_hz},
            {"v_max_mps", job.v_max_mps},
            {"battery_capacity_pct", job.battery_capacity_pct},
            {"snapshot_range_m", job.snapshot_range_m},
            {"camera_fov_deg", {job.camera_hfov_deg, job.camera_vfov_deg}},
            {"proximity_warning_m", job.proximity_warning_m},
            {"distance_reminder_m", job.distance_reminder_m}}}};
}

json frame_payload(const FrameRecord& f, const DroneState& state, const TrafficState& traffic,
                   const TrafficSpec& spec) {
  json agents = json::array();
  for (const auto& a : traffic.agents) {
    json j = {{"id", a.id}, {"kind", to_string(a.kind)}, {"position", vec(a.position)}};
    if (a.kind == AgentKind::vehicle) j["yaw"] = vehicle_body(a, spec).yaw;
    agents.push_back(std::move(j));
  }
  return {{"i", f.index},
          {"position", vec(state.position)},
          {"velocity", vec(state.velocity)},
          {"yaw", state.yaw},
          {"speed_mps", f.speed_mps},
          {"battery_pct", f.battery_pct},
          {"light", f.light_on},
          {"task", f.task ? json(*f.task) : json(nullptr)},
          {"l_star_m", f.l_star_m ? json(*f.l_star_m) : json(nullptr)},
          {"speeding", f.speeding},
          {"traffic", agents}};
}

json hud_payload(const HudState& hud) {
  return {{"battery_pct", hud.battery_pct},
          {"color", to_string(hud.color)},
          {"flashing", hud.flashing},
          {"speed_mps", hud.speed_mps}};
}

json feedback_payload(const FeedbackMessage& m) {
  return {{"i", m.frame}, {"kind", to_string(m.kind)}, {"text", m.text}};
}

json error_payload(std::string_view code, std::string_view detail) { return {{"code", code}, {"detail", detail}}; }

}  // namespace bridgesim
