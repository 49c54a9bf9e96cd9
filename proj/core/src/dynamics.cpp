#include "bridgesim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace bridgesim {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double clamp_axis(double v) {
  if (std::isnan(v)) return 0.0;
  return std::clamp(v, -1.0, 1.0);
}

}  // namespace

ControlInput ControlInput::clamped() const {
  return {clamp_axis(fb), clamp_axis(rl), clamp_axis(ud), clamp_axis(rt), light, snapshot};
}

Vec3 forward_of(double yaw) { return {std::cos(yaw), std::sin(yaw), 0.0}; }
Vec3 right_of(double yaw) { return {std::sin(yaw), -std::cos(yaw), 0.0}; }

DroneState step(const DroneState& state, const ControlInput& raw, const WindSpec& wind, double dt,
                const DroneParams& drone) {
  const ControlInput in = raw.clamped();
  DroneState next = state;

  // Right rotation is clockwise seen from above.
  next.yaw = std::remainder(state.yaw - in.rt * drone.rotation_rate_dps * kDegToRad * dt, 2.0 * std::numbers::pi);

  const Vec3 commanded = forward_of(next.yaw) * (in.fb * drone.max_forward_speed_mps) +
                         right_of(next.yaw) * (in.rl * drone.max_side_speed_mps) +
                         Vec3{0.0, 0.0, in.ud * drone.max_vertical_speed_mps};
  const double alpha = drone.slow_down_time_s <= dt ? 1.0 : dt / drone.slow_down_time_s;
  next.velocity = state.velocity + (commanded - state.velocity) * alpha;
  if (wind.force_newtons > 0.0) {
    next.velocity += wind.direction * (wind.force_newtons / drone.mass_kg * dt);
  }
  next.position = state.position + next.velocity * dt;
  if (in.light) next.light_on = !state.light_on;
  return next;
}

DroneState drain_battery(const DroneState& state, double dt, const JobSpec& job) {
  DroneState next = state;
  next.flight_time_s = state.flight_time_s + dt;
  const double linear = job.battery_capacity_pct * (1.0 - next.flight_time_s / job.tau_max_s);
  next.battery_pct = std::max(0.0, std::min(state.battery_pct, linear));
  return next;
}

bool flight_time_exceeded(const DroneState& state, const JobSpec& job) { return state.flight_time_s >= job.tau_max_s; }

CollisionReport detect_collisions(const DroneState& state, const ScenarioSpec& scenario, const TrafficState& traffic) {
  const double r = scenario.drone.radius_m;
  const Vec3& c = state.position;
  CollisionReport report;
  double nearest = std::numeric_limits<double>::infinity();
  double deepest_other = std::numeric_limits<double>::infinity();

  for (const auto& e : scenario.elements) {
    if (!e.crashable) continue;
    const double d = distance_to_solid(e.shape, c);
    nearest = std::min(nearest, d);
    if (d <= r && (d < deepest_other || (d == deepest_other && report.other && e.id < report.other->id))) {
      deepest_other = d;
      report.other = ContactObject{e.id, std::string(to_string(e.kind))};
    }
  }
  for (const auto& a : traffic.agents) {
    const double d = a.kind == AgentKind::vehicle ? distance_to_solid(vehicle_body(a, scenario.traffic), c)
                                                  : distance_to_solid(Shape{human_body(a, scenario.traffic)}, c);
    nearest = std::min(nearest, d);
    if (d <= r) (a.kind == AgentKind::vehicle ? report.vehicle : report.human) = true;
  }
  report.min_clearance_m = std::max(0.0, nearest - r);
  return report;
}

DroneState resolve_contact(const DroneState& previous, const DroneState& proposed, const CollisionReport& report) {
  if (!report.other) return proposed;
  DroneState blocked = proposed;
  blocked.position = previous.position;
  blocked.velocity = {};
  return blocked;
}

bool camera_sees(const DroneState& state, const DefectSpec& defect, const JobSpec& job) {
  const Vec3 d = defect.position - state.position;
  if (norm(d) > job.snapshot_range_m) return false;
  const double depth = dot(d, forward_of(state.yaw));
  if (depth <= 0.0) return false;
  const double lateral = std::abs(dot(d, right_of(state.yaw)));
  const double vertical = std::abs(d.z);
  return lateral <= depth * std::tan(0.5 * job.camera_hfov_deg * kDegToRad) &&
         vertical <= depth * std::tan(0.5 * job.camera_vfov_deg * kDegToRad);
}

}  // namespace bridgesim
