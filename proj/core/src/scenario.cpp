#include "bridgesim/scenario.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <utility>

#include "bridgesim/error.hpp"
#include "bridgesim/rng.hpp"

namespace bridgesim {
namespace {

template <class Enum, std::size_t N>
Enum enum_from(std::string_view s, const std::array<std::pair<Enum, std::string_view>, N>& table,
               std::string_view what) {
  for (const auto& [value, name] : table) {
    if (name == s) return value;
  }
  throw ParseError("unknown " + std::string(what) + " '" + std::string(s) + "'");
}

template <class Enum, std::size_t N>
std::string_view enum_name(Enum e, const std::array<std::pair<Enum, std::string_view>, N>& table) {
  for (const auto& [value, name] : table) {
    if (value == e) return name;
  }
  return "?";
}

constexpr std::array<std::pair<ElementKind, std::string_view>, 7> kElementKinds{{
    {ElementKind::slab, "slab"},
    {ElementKind::arch, "arch"},
    {ElementKind::pier, "pier"},
    {ElementKind::interlayer, "interlayer"},
    {ElementKind::deck, "deck"},
    {ElementKind::terrain, "terrain"},
    {ElementKind::water, "water"},
}};
constexpr std::array<std::pair<DefectKind, std::string_view>, 3> kDefectKinds{{
    {DefectKind::crack, "crack"},
    {DefectKind::spalling, "spalling"},
    {DefectKind::corrosion, "corrosion"},
}};
constexpr std::array<std::pair<WindLevel, std::string_view>, 4> kWindLevels{{
    {WindLevel::none, "none"},
    {WindLevel::light, "light"},
    {WindLevel::gentle, "gentle"},
    {WindLevel::medium, "medium"},
}};
constexpr std::array<std::pair<AgentKind, std::string_view>, 2> kAgentKinds{{
    {AgentKind::vehicle, "vehicle"},
    {AgentKind::human, "human"},
}};

bool structural(ElementKind k) { return k != ElementKind::terrain && k != ElementKind::water; }

void require(bool ok, const char* invariant, const std::string& detail) {
  if (!ok) throw ValidationError(invariant, detail);
}

bool within_rel(double value, double bound) { return value <= bound * (1.0 + 1e-9); }

}  // namespace

std::string_view to_string(ElementKind k) { return enum_name(k, kElementKinds); }
std::string_view to_string(DefectKind k) { return enum_name(k, kDefectKinds); }
std::string_view to_string(WindLevel k) { return enum_name(k, kWindLevels); }
std::string_view to_string(AgentKind k) { return enum_name(k, kAgentKinds); }
ElementKind element_kind_from(std::string_view s) { return enum_from(s, kElementKinds, "element kind"); }
DefectKind defect_kind_from(std::string_view s) { return enum_from(s, kDefectKinds, "defect kind"); }
WindLevel wind_level_from(std::string_view s) { return enum_from(s, kWindLevels, "wind level"); }
AgentKind agent_kind_from(std::string_view s) { return enum_from(s, kAgentKinds, "agent kind"); }

double wind_force(WindLevel level) {
  switch (level) {
    case WindLevel::none:
      return 0.0;
    case WindLevel::light:
      return 0.12;
    case WindLevel::gentle:
      return 3.0;
    case WindLevel::medium:
      return 12.0;
  }
  return 0.0;
}

ScoringWeights default_weights(int task_count, double v_max_mps, double speed_limit_mps, double tau_min_s,
                               double tau_max_s) {
  ScoringWeights w;
  const double t = static_cast<double>(std::max(task_count, 1));
  w.path_gain = 100.0 / t;
  w.speeding_loss = -100.0 / (t * (v_max_mps / speed_limit_mps));
  w.efficiency_slope = -w.efficiency_base / (tau_max_s - tau_min_s);
  return w;
}

const BridgeElement* ScenarioSpec::find_element(std::string_view id) const {
  for (const auto& e : elements) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

const TaskSpec* ScenarioSpec::find_task(int id) const {
  for (const auto& t : tasks) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

double ScenarioSpec::min_speed_limit_mps() const {
  double v = tasks.empty() ? 0.0 : tasks.front().speed_limit_mps;
  for (const auto& t : tasks) v = std::min(v, t.speed_limit_mps);
  return v;
}

void validate(const ScenarioSpec& spec) {
  require(!spec.tasks.empty(), "tasks.count", "a scenario needs at least one task (T >= 1)");

  std::set<std::string> ids;
  for (const auto& e : spec.elements) {
    require(!e.id.empty(), "element.id", "element id must be non-empty");
    require(ids.insert(e.id).second, "element.id_unique", "duplicate element id '" + e.id + "'");
    require(volume(e.shape) > 0.0, "element.volume", "element '" + e.id + "' has zero volume");
  }

  for (std::size_t k = 0; k < spec.tasks.size(); ++k) {
    const auto& t = spec.tasks[k];
    const std::string name = "task " + std::to_string(t.id);
    require(t.id == static_cast<int>(k) + 1, "task.id", "task ids must be 1..T in order; got " + std::to_string(t.id));
    require(t.reference_points.size() >= 2, "task.reference_points",
            name + " needs at least two reference points");
    for (std::size_t n = 1; n < t.reference_points.size(); ++n) {
      require(!(t.reference_points[n] == t.reference_points[n - 1]), "task.reference_points_distinct",
              name + " repeats reference point " + std::to_string(n));
    }
    require(t.corridor_threshold_m > 0.0, "task.corridor_threshold", name + " corridor threshold must be > 0");
    require(t.recommended_distance.min_m < t.recommended_distance.max_m, "task.recommended_distance",
            name + " recommended distance needs min < max");
    require(t.speed_limit_mps > 0.0, "task.speed_limit", name + " speed limit must be > 0");
  }

  for (const auto& d : spec.defects) {
    const BridgeElement* host = spec.find_element(d.host_element);
    require(host != nullptr, "defect.host_element", "defect '" + d.id + "' host '" + d.host_element + "' missing");
    require(distance_to_surface(host->shape, d.position) <= kDefectSurfaceTolerance, "defect.on_surface",
            "defect '" + d.id + "' is farther than 0.05 m from its host surface");
  }

  const auto& w = spec.wind;
  require(w.force_newtons == wind_force(w.level), "wind.force",
          "wind level '" + std::string(to_string(w.level)) + "' must map to " + std::to_string(wind_force(w.level)) +
              " N");
  if (w.level != WindLevel::none) {
    require(std::abs(norm(w.direction) - 1.0) <= 1e-9, "wind.direction", "wind direction must be a unit vector");
  }

  for (const auto& e : spec.elements) {
    require(!contains(e.shape, spec.ground_station), "ground_station.outside",
            "ground station lies inside element '" + e.id + "'");
  }

  const auto& job = spec.job;
  require(job.tau_min_s > 0.0 && job.tau_min_s < job.tau_max_s, "job.tau", "need 0 < tau_min < tau_max");
  require(job.frame_rate_hz > 0.0, "job.frame_rate", "frame rate must be > 0");
  require(job.v_max_mps > 0.0, "job.v_max", "v_max must be > 0");
  require(job.battery_capacity_pct > 0.0, "job.battery_capacity", "battery capacity must be > 0");
  require(job.snapshot_range_m > 0.0, "job.snapshot_range", "snapshot range must be > 0");
  require(job.camera_hfov_deg > 0.0 && job.camera_hfov_deg < 180.0 && job.camera_vfov_deg > 0.0 &&
              job.camera_vfov_deg < 180.0,
          "job.camera_fov", "camera field of view must lie in (0, 180) degrees");
  require(job.weights.beta >= 0.0, "weights.beta", "beta must be >= 0");

  const double t = static_cast<double>(spec.task_count());
  require(within_rel(std::abs(job.weights.path_gain) * t, 100.0), "weights.path_gain",
          "path gain times T must not exceed 100");
  require(within_rel(std::abs(job.weights.speeding_loss) * t * (job.v_max_mps / spec.min_speed_limit_mps()), 100.0),
          "weights.speeding_loss", "speeding loss times T*v_max/v_limit must not exceed 100");

  const auto& d = spec.drone;
  require(d.mass_kg > 0.0, "drone.mass", "drone mass must be > 0");
  require(d.radius_m > 0.0, "drone.radius", "drone radius must be > 0");
  require(d.slow_down_time_s >= 0.0, "drone.slow_down_time", "slow-down time must be >= 0");
  require(d.max_forward_speed_mps > 0.0 && d.max_side_speed_mps > 0.0 && d.max_vertical_speed_mps > 0.0,
          "drone.max_speed", "drone axis speeds must be > 0");

  const auto& tr = spec.traffic;
  require(tr.count >= 0 && tr.human_count >= 0 && tr.human_count <= tr.count, "traffic.count",
          "need 0 <= human_count <= count");
  bool has_vehicle_lane = false;
  bool has_human_lane = false;
  for (const auto& lane : tr.lanes) {
    require(lane.points.size() >= 2 && polyline_length(lane.points) > 0.0, "traffic.lane",
            "lane '" + lane.id + "' needs a polyline of positive length");
    require(lane.min_speed_mps >= 0.0 && lane.min_speed_mps <= lane.max_speed_mps, "traffic.lane_speed",
            "lane '" + lane.id + "' needs 0 <= min_speed <= max_speed");
    has_vehicle_lane |= lane.kind == AgentKind::vehicle;
    has_human_lane |= lane.kind == AgentKind::human;
  }
  require(tr.count - tr.human_count == 0 || has_vehicle_lane, "traffic.lanes", "vehicles need a vehicle lane");
  require(tr.human_count == 0 || has_human_lane, "traffic.lanes", "humans need a human lane");

  if (spec.defect_placement) {
    require(spec.defect_placement->count >= 0, "defect_placement.count", "defect count must be >= 0");
    for (const auto& h : spec.defect_placement->hosts) {
      require(spec.find_element(h) != nullptr, "defect_placement.hosts", "unknown host element '" + h + "'");
    }
  }
}

std::vector<DefectSpec> place_defects(const ScenarioSpec& spec, std::uint64_t seed) {
  if (!spec.defect_placement || spec.defect_placement->count == 0) return {};
  const DefectPlacement& placement = *spec.defect_placement;

  std::vector<const BridgeElement*> hosts;
  if (placement.hosts.empty()) {
    for (const auto& e : spec.elements) {
      if (structural(e.kind)) hosts.push_back(&e);
    }
  } else {
    for (const auto& id : placement.hosts) {
      const BridgeElement* e = spec.find_element(id);
      if (e == nullptr) throw ValidationError("defect_placement.hosts", "unknown host element '" + id + "'");
      hosts.push_back(e);
    }
  }
  if (hosts.empty()) throw ValidationError("defect_placement.hosts", "no surface patches to host defects");

  std::vector<double> areas;
  double total = 0.0;
  for (const auto* h : hosts) {
    areas.push_back(surface_area(h->shape));
    total += areas.back();
  }
  if (total < placement.min_area_per_defect_m2 * placement.count) {
    throw ValidationError("defect_placement.area", "insufficient surface area (" + std::to_string(total) +
                                                       " m^2) for " + std::to_string(placement.count) + " defects");
  }

  Rng rng(seed);
  std::vector<DefectSpec> out;
  out.reserve(static_cast<std::size_t>(placement.count));
  for (int k = 0; k < placement.count; ++k) {
    DefectSpec d;
    d.id = "D" + std::to_string(k + 1);
    d.kind = static_cast<DefectKind>(rng.bits() % 3);
    // Thin shells can put a sample marginally inside a neighbouring
    // triangle's shell at a fold; those draws are rejected.
    for (int attempt = 0;; ++attempt) {
      double pick = rng.uniform() * total;
      std::size_t h = 0;
      while (h + 1 < hosts.size() && pick >= areas[h]) {
        pick -= areas[h];
        ++h;
      }
      const double uf = rng.uniform();
      const double u1 = rng.uniform();
      const double u2 = rng.uniform();
      const Vec3 p = sample_surface(hosts[h]->shape, uf, u1, u2);
      if (distance_to_surface(hosts[h]->shape, p) <= kDefectSurfaceTolerance) {
        d.position = p;
        d.host_element = hosts[h]->id;
        break;
      }
      if (attempt >= 256) {
        throw ValidationError("defect_placement.surface", "could not sample a surface point on '" + hosts[h]->id + "'");
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

ScenarioSpec with_defects_for_seed(const ScenarioSpec& spec, std::uint64_t seed) {
  ScenarioSpec out = spec;
  out.seed = seed;
  if (spec.defect_placement) out.defects = place_defects(spec, seed);
  return out;
}

std::optional<NearestElement> nearest_element(const ScenarioSpec& spec, const Vec3& point) {
  std::optional<NearestElement> best;
  for (const auto& e : spec.elements) {
    const double d = distance_to_solid(e.shape, point);
    if (!best || d < best->distance_m || (d == best->distance_m && e.id < best->id)) {
      best = NearestElement{e.id, d};
    }
  }
  return best;
}

}  // namespace bridgesim
