#include "bridgesim/pilot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "bridgesim/dynamics.hpp"
#include "bridgesim/error.hpp"

namespace bridgesim {
namespace {

using nlohmann::json;

constexpr std::int64_t kMaxTicks = 10'000'000;
constexpr double kArriveM = 1e-3;
constexpr double kStillMps = 0.05;
constexpr double kYawToleranceRad = 1e-6;

class Compiler {
 public:
  Compiler(const FlightPlan& plan, const ScenarioSpec& sc) : plan_(plan), sc_(sc), dt_(1.0 / sc.job.frame_rate_hz) {
    state_.position = sc.ground_station;
    state_.battery_pct = sc.job.battery_capacity_pct;
  }

  ScriptedPilot run() {
    for (const auto& s : plan_.steps) std::visit([this](const auto& x) { apply(x); }, s);
    return ScriptedPilot(std::move(entries_));
  }

 private:
  void apply(const MoveTo& m) {
    const double cruise = m.speed_mps.value_or(plan_.cruise_mps);
    double ramp = 0.0;
    for (;;) {
      const Vec3 r = m.target - state_.position;
      const double d = norm(r);
      if (d < kArriveM && state_.speed() < kStillMps) return;
      Vec3 desired{};
      if (d >= kArriveM) {
        const Vec3 dir = r / d;
        double s = std::min({cruise, std::sqrt(2.0 * plan_.accel_mps2 * d), d / dt_, ramp + plan_.accel_mps2 * dt_});
        if (std::abs(dir.z) * s > plan_.max_climb_mps) s = plan_.max_climb_mps / std::abs(dir.z);
        ramp = s;
        desired = dir * s;
      }
      emit(command(desired, 0.0));
    }
  }

  void apply(const SnapshotOf& s) {
    const auto it = std::find_if(sc_.defects.begin(), sc_.defects.end(),
                                 [&](const DefectSpec& d) { return d.id == s.defect; });
    if (it == sc_.defects.end()) throw ValidationError("pilot.defect", "unknown defect '" + s.defect + "'");
    const Vec3 to = it->position - state_.position;
    const double target = std::atan2(to.y, to.x);
    const double per_tick = sc_.drone.rotation_rate_dps * std::numbers::pi / 180.0 * dt_;
    for (;;) {
      const double err = std::remainder(target - state_.yaw, 2.0 * std::numbers::pi);
      if (std::abs(err) < kYawToleranceRad && state_.speed() < kStillMps) break;
      const double rt = std::abs(err) < kYawToleranceRad ? 0.0 : std::clamp(-err / per_tick, -1.0, 1.0);
      emit(command({}, rt));
    }
    ControlInput press = command({}, 0.0);
    press.snapshot = true;
    emit(press);
    if (!camera_sees(state_, *it, sc_.job)) {
      throw ValidationError("pilot.snapshot", "defect '" + s.defect + "' is not in view from the planned position");
    }
    emit(command({}, 0.0));
  }

  void apply(const Hold& h) {
    for (int i = 0; i < h.frames; ++i) emit(command({}, 0.0));
  }

  void apply(const ToggleLight&) {
    ControlInput press = command({}, 0.0);
    press.light = true;
    emit(press);
    emit(command({}, 0.0));
  }

  // Body-frame command whose response after one step is the desired velocity.
  ControlInput command(const Vec3& desired, double rt) const {
    const DroneParams& p = sc_.drone;
    const double yaw = std::remainder(state_.yaw - rt * p.rotation_rate_dps * std::numbers::pi / 180.0 * dt_,
                                      2.0 * std::numbers::pi);
    const double alpha = p.slow_down_time_s <= dt_ ? 1.0 : dt_ / p.slow_down_time_s;
    Vec3 wind{};
    if (sc_.wind.force_newtons > 0.0) wind = sc_.wind.direction * (sc_.wind.force_newtons / p.mass_kg * dt_);
    const Vec3 c = state_.velocity + (desired - wind - state_.velocity) / alpha;
    ControlInput in;
    in.fb = std::clamp(dot(c, forward_of(yaw)) / p.max_forward_speed_mps, -1.0, 1.0);
    in.rl = std::clamp(dot(c, right_of(yaw)) / p.max_side_speed_mps, -1.0, 1.0);
    in.ud = std::clamp(c.z / p.max_vertical_speed_mps, -1.0, 1.0);
    in.rt = rt;
    return in;
  }

  void emit(const ControlInput& held) {
    if (tick_ == 0 && held.ud <= 0.0) {
      throw ValidationError("pilot.takeoff", "the first planned command must climb away from the ground station");
    }
    if (tick_ >= kMaxTicks) throw ValidationError("pilot.length", "plan does not converge");
    ControlInput in = held;
    in.light = held.light && !previous_.light;
    in.snapshot = held.snapshot && !previous_.snapshot;
    previous_ = held;
    state_ = step(state_, in, sc_.wind, dt_, sc_.drone);

    if (!entries_.empty() && entries_.back().to == tick_ && entries_.back().held == held) {
      ++entries_.back().to;
    } else {
      entries_.push_back({tick_, tick_ + 1, held});
    }
    ++tick_;
  }

  const FlightPlan& plan_;
  const ScenarioSpec& sc_;
  double dt_;
  DroneState state_;
  ControlInput previous_;
  std::vector<TimelineEntry> entries_;
  std::int64_t tick_ = 0;
};

Vec3 point_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ParseError("expected [x, y, z], got " + j.dump());
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

}  // namespace

FlightPlan flight_plan_from_json(const json& doc) {
  try {
    const json& p = doc.contains("plan") ? doc.at("plan") : doc;
    FlightPlan plan;
    if (p.contains("cruise")) plan.cruise_mps = parse_speed(p.at("cruise"));
    plan.accel_mps2 = p.value("accel_mps2", plan.accel_mps2);
    if (p.contains("max_climb")) plan.max_climb_mps = parse_speed(p.at("max_climb"));
    for (const auto& s : p.at("steps")) {
      if (s.contains("to")) {
        MoveTo m{point_from(s.at("to")), std::nullopt};
        if (s.contains("speed")) m.speed_mps = parse_speed(s.at("speed"));
        plan.steps.emplace_back(m);
      } else if (s.contains("snapshot")) {
        plan.steps.emplace_back(SnapshotOf{s.at("snapshot").get<std::string>()});
      } else if (s.contains("hold")) {
        plan.steps.emplace_back(Hold{s.at("hold").get<int>()});
      } else if (s.contains("light")) {
        plan.steps.emplace_back(ToggleLight{});
      } else {
        throw ParseError("unknown plan step " + s.dump());
      }
    }
    if (plan.cruise_mps <= 0.0 || plan.accel_mps2 <= 0.0 || plan.max_climb_mps <= 0.0) {
      throw ValidationError("pilot.plan", "cruise, acceleration and climb rate must be positive");
    }
    return plan;
  } catch (const json::exception& e) {
    throw ParseError(std::string("flight plan: ") + e.what());
  }
}

ScriptedPilot compile_plan(const FlightPlan& plan, const ScenarioSpec& scenario) {
  return Compiler(plan, scenario).run();
}

ScriptedPilot load_pilot(const json& doc, const ScenarioSpec& scenario) {
  if (doc.contains("plan")) return compile_plan(flight_plan_from_json(doc), scenario);
  if (doc.contains("timeline")) return pilot_from_json(doc);
  throw ParseError("pilot document needs a 'timeline' or a 'plan'");
}

ScriptedPilot load_pilot_file(const std::filesystem::path& path, const ScenarioSpec& scenario) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open pilot file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("malformed pilot file '" + path.string() + "': " + e.what());
  }
  return load_pilot(doc, scenario);
}

}  // namespace bridgesim
