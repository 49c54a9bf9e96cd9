#pragma once

// Waypoint flight plans compiled into open-loop input timelines. The compiler
// flies the plan through the same dynamics the session uses, so replaying the
// timeline reproduces the flight exactly as long as nothing is hit.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "bridgesim/scenario.hpp"
#include "bridgesim/session.hpp"

namespace bridgesim {

struct MoveTo {
  Vec3 target;
  std::optional<double> speed_mps;  // plan cruise speed when empty
};

// Stop, turn toward the defect, take one snapshot.
struct SnapshotOf {
  std::string defect;
};

struct Hold {
  int frames = 0;
};

struct ToggleLight {};

using PlanStep = std::variant<MoveTo, SnapshotOf, Hold, ToggleLight>;

struct FlightPlan {
  double cruise_mps = 0.9 * 10.0 * kMetersPerSecondPerMph;
  double accel_mps2 = 2.0;
  double max_climb_mps = 3.0;
  std::vector<PlanStep> steps;
};

// {"plan": {"cruise": "9 mph", "accel_mps2": 2, "steps": [{"to": [x,y,z]},
// {"snapshot": "D1"}, {"hold": 50}, {"light": true}]}}
FlightPlan flight_plan_from_json(const nlohmann::json& doc);

// Throws ValidationError("pilot.snapshot") when a planned snapshot would not
// see its defect, "pilot.defect" for an unknown defect id.
ScriptedPilot compile_plan(const FlightPlan& plan, const ScenarioSpec& scenario);

// Accepts either an explicit timeline or a plan document.
ScriptedPilot load_pilot(const nlohmann::json& doc, const ScenarioSpec& scenario);
ScriptedPilot load_pilot_file(const std::filesystem::path& path, const ScenarioSpec& scenario);

}  // namespace bridgesim
