#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bridgesim/geometry.hpp"
#include "bridgesim/scenario.hpp"

namespace bridgesim {

struct TrafficAgent {
  std::string id;
  AgentKind kind = AgentKind::vehicle;
  std::size_t lane = 0;
  double arc_m = 0.0;  // arc length along the lane
  double speed_mps = 0.0;
  Vec3 position;  // on the lane polyline (ground contact point)
  Vec3 velocity;
  std::size_t waypoint = 0;  // lane segment index

  bool operator==(const TrafficAgent&) const = default;
};

struct TrafficState {
  std::vector<TrafficAgent> agents;
  bool operator==(const TrafficState&) const = default;
};

// Vehicles then humans, each assigned round-robin to lanes of their kind with a
// seeded start offset and speed.
TrafficState init_traffic(const TrafficSpec& spec, std::uint64_t seed);

// Constant-speed advance along the lane, wrapping from the lane end back to its
// start.
TrafficState step_traffic(const TrafficState& traffic, const TrafficSpec& spec, double dt);

// Solid used for contact tests.
YawedBox vehicle_body(const TrafficAgent& agent, const TrafficSpec& spec);
Cylinder human_body(const TrafficAgent& agent, const TrafficSpec& spec);

}  // namespace bridgesim
