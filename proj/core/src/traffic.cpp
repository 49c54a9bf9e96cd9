#include "bridgesim/traffic.hpp"

#include <cmath>

#include "bridgesim/rng.hpp"

namespace bridgesim {
namespace {

void place_on_lane(TrafficAgent& a, const Lane& lane) {
  a.position = polyline_point_at(lane.points, a.arc_m, &a.waypoint);
  const Vec3 seg = lane.points[a.waypoint + 1] - lane.points[a.waypoint];
  const double len = norm(seg);
  a.velocity = len > 0.0 ? seg * (a.speed_mps / len) : Vec3{};
}

std::vector<std::size_t> lanes_of(const TrafficSpec& spec, AgentKind kind) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < spec.lanes.size(); ++k) {
    if (spec.lanes[k].kind == kind) out.push_back(k);
  }
  return out;
}

}  // namespace

TrafficState init_traffic(const TrafficSpec& spec, std::uint64_t seed) {
  TrafficState state;
  Rng rng(seed ^ 0x7261666669637331ULL);
  const int vehicles = spec.count - spec.human_count;
  const auto vehicle_lanes = lanes_of(spec, AgentKind::vehicle);
  const auto human_lanes = lanes_of(spec, AgentKind::human);
  for (int k = 0; k < spec.count; ++k) {
    const bool human = k >= vehicles;
    const auto& pool = human ? human_lanes : vehicle_lanes;
    if (pool.empty()) continue;
    const int ordinal = human ? k - vehicles : k;
    TrafficAgent a;
    a.kind = human ? AgentKind::human : AgentKind::vehicle;
    a.id = (human ? "H" : "V") + std::to_string(ordinal + 1);
    a.lane = pool[static_cast<std::size_t>(ordinal) % pool.size()];
    const Lane& lane = spec.lanes[a.lane];
    a.arc_m = rng.uniform() * polyline_length(lane.points);
    a.speed_mps = rng.uniform(lane.min_speed_mps, lane.max_speed_mps);
    place_on_lane(a, lane);
    state.agents.push_back(std::move(a));
  }
  return state;
}

TrafficState step_traffic(const TrafficState& traffic, const TrafficSpec& spec, double dt) {
  TrafficState next = traffic;
  for (auto& a : next.agents) {
    const Lane& lane = spec.lanes[a.lane];
    const double length = polyline_length(lane.points);
    a.arc_m += a.speed_mps * dt;
    if (a.arc_m >= length) a.arc_m = std::fmod(a.arc_m, length);
    place_on_lane(a, lane);
  }
  return next;
}

YawedBox vehicle_body(const TrafficAgent& agent, const TrafficSpec& spec) {
  const double yaw = std::atan2(agent.velocity.y, agent.velocity.x);
  return {agent.position + Vec3{0.0, 0.0, spec.vehicle_half_extents.z}, spec.vehicle_half_extents, yaw};
}

Cylinder human_body(const TrafficAgent& agent, const TrafficSpec& spec) {
  return {agent.position.x, agent.position.y, agent.position.z, agent.position.z + spec.human_height_m,
          spec.human_radius_m};
}

}  // namespace bridgesim
