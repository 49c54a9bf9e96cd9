#pragma once

// Fixed-timestep drone kinematics with first-order drag, linear battery drain,
// sphere-vs-primitive contact sensing and the forward camera frustum test.

#include <optional>
#include <string>

#include "bridgesim/geometry.hpp"
#include "bridgesim/scenario.hpp"
#include "bridgesim/traffic.hpp"

namespace bridgesim {

// Axis values are fractions of the per-axis maximum speed. light and snapshot
// are press edges: true only on the frame the key goes down.
struct ControlInput {
  double fb = 0.0;  // forward +, backward -
  double rl = 0.0;  // right +, left -
  double ud = 0.0;  // up +, down -
  double rt = 0.0;  // rotate right +, left -
  bool light = false;
  bool snapshot = false;

  ControlInput clamped() const;
  bool operator==(const ControlInput&) const = default;
};

struct DroneState {
  Vec3 position;
  Vec3 velocity;
  double yaw = 0.0;  // radians, counter-clockwise from +x
  double battery_pct = 100.0;
  bool light_on = false;
  double flight_time_s = 0.0;

  double speed() const { return norm(velocity); }
  bool operator==(const DroneState&) const = default;
};

// Unit forward and right vectors for a yaw angle (z-up, right-handed).
Vec3 forward_of(double yaw);
Vec3 right_of(double yaw);

// One fixed step. Order: clamp input, integrate yaw, relax velocity toward the
// commanded velocity with time constant slow_down_time, add wind
// acceleration, integrate position. Pure and bit-reproducible.
DroneState step(const DroneState& state, const ControlInput& input, const WindSpec& wind, double dt,
                const DroneParams& drone);

// Battery falls linearly so it reaches 0 exactly at tau_max; never below 0.
DroneState drain_battery(const DroneState& state, double dt, const JobSpec& job);
bool flight_time_exceeded(const DroneState& state, const JobSpec& job);

struct ContactObject {
  std::string id;
  std::string kind;  // element kind name
  bool operator==(const ContactObject&) const = default;
};

struct CollisionReport {
  bool human = false;
  bool vehicle = false;
  std::optional<ContactObject> other;
  double min_clearance_m = 0.0;

  bool any_contact() const { return human || vehicle || other.has_value(); }
  bool operator==(const CollisionReport&) const = default;
};

// Drone is a sphere of drone.radius_m. Non-crashable elements are ignored.
CollisionReport detect_collisions(const DroneState& state, const ScenarioSpec& scenario,
                                  const TrafficState& traffic);

// Contact with a static element stops the drone where it was: the proposed
// position is discarded and velocity zeroed. Traffic contact is left alone.
DroneState resolve_contact(const DroneState& previous, const DroneState& proposed, const CollisionReport& report);

// Forward camera aligned with yaw at zero pitch. Inclusive frustum and range.
bool camera_sees(const DroneState& state, const DefectSpec& defect, const JobSpec& job);

}  // namespace bridgesim
