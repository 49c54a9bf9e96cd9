#pragma once

// Static world description: bridge elements, inspection tasks, defects, wind,
// traffic lanes and the job parameters used for scoring. Immutable after load.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "bridgesim/geometry.hpp"

namespace bridgesim {

inline constexpr int kScenarioFormatVersion = 1;
inline constexpr double kMetersPerSecondPerMph = 0.44704;
inline constexpr double kDefectSurfaceTolerance = 0.05;

enum class ElementKind { slab, arch, pier, interlayer, deck, terrain, water };
enum class DefectKind { crack, spalling, corrosion };
enum class WindLevel { none, light, gentle, medium };
enum class AgentKind { vehicle, human };

std::string_view to_string(ElementKind k);
std::string_view to_string(DefectKind k);
std::string_view to_string(WindLevel k);
std::string_view to_string(AgentKind k);
ElementKind element_kind_from(std::string_view s);
DefectKind defect_kind_from(std::string_view s);
WindLevel wind_level_from(std::string_view s);
AgentKind agent_kind_from(std::string_view s);

struct BridgeElement {
  std::string id;
  ElementKind kind = ElementKind::slab;
  Shape shape;
  bool crashable = true;
};

struct DistanceRange {
  double min_m = 0.0;
  double max_m = 0.0;
};

struct TaskSpec {
  int id = 0;  // 1..T
  std::string name;
  std::vector<Vec3> reference_points;
  double corridor_threshold_m = 2.0;
  DistanceRange recommended_distance;
  double speed_limit_mps = 10.0 * kMetersPerSecondPerMph;
  bool light_required = false;
};

struct DefectSpec {
  std::string id;
  Vec3 position;
  std::string host_element;
  DefectKind kind = DefectKind::crack;
};

// How defects are generated when the document does not list them explicitly.
struct DefectPlacement {
  int count = 0;
  std::vector<std::string> hosts;
  double min_area_per_defect_m2 = 1.0;
};

struct WindSpec {
  WindLevel level = WindLevel::none;
  Vec3 direction{1.0, 0.0, 0.0};
  double force_newtons = 0.0;
};

// Force in newtons for each wind level: 0, 0.12, 3 and 12 N.
double wind_force(WindLevel level);

struct Lane {
  std::string id;
  AgentKind kind = AgentKind::vehicle;
  std::vector<Vec3> points;
  double min_speed_mps = 0.0;
  double max_speed_mps = 0.0;
};

struct TrafficSpec {
  int count = 0;
  int human_count = 0;
  std::vector<Lane> lanes;
  Vec3 vehicle_half_extents{2.2, 0.9, 0.75};
  double human_radius_m = 0.3;
  double human_height_m = 1.8;
};

struct ScoringWeights {
  double path_gain = 25.0;             // on-path gain
  double speeding_loss = -25.0 / 3.0;  // speeding loss
  double efficiency_base = 100.0;
  double efficiency_slope = -100.0 / 600.0;
  double battery_loss = -100.0;
  double human_loss = -100.0;
  double vehicle_loss = -100.0;
  double other_loss = -3.0;
  double accuracy_gain = 100.0;
  double safety_floor = -100.0;
  double beta = 1.0;
};

// Defaults for T tasks: path_gain = 100/T, speeding_loss = -100/(T * v_max/v_limit),
// efficiency_slope = -efficiency_base / (tau_max - tau_min).
ScoringWeights default_weights(int task_count, double v_max_mps, double speed_limit_mps, double tau_min_s,
                               double tau_max_s);

struct JobSpec {
  double tau_min_s = 900.0;   // full efficiency score up to here
  double tau_max_s = 1500.0;  // maximum allowable flight time
  double frame_rate_hz = 50.0;
  double v_max_mps = 30.0 * kMetersPerSecondPerMph;
  ScoringWeights weights;
  double battery_capacity_pct = 100.0;
  double snapshot_range_m = 10.0;
  double camera_hfov_deg = 70.0;
  double camera_vfov_deg = 50.0;
  double proximity_warning_m = 2.5;
  double distance_reminder_m = 8.0;
};

struct DroneParams {
  double mass_kg = 1.2;
  double max_forward_speed_mps = 30.0 * kMetersPerSecondPerMph;
  double max_side_speed_mps = 30.0 * kMetersPerSecondPerMph;
  double max_vertical_speed_mps = 5.0;
  double rotation_rate_dps = 90.0;
  double slow_down_time_s = 0.5;
  double radius_m = 0.4;
};

struct ScenarioSpec {
  std::string name;
  std::vector<BridgeElement> elements;
  std::vector<TaskSpec> tasks;
  std::vector<DefectSpec> defects;
  std::optional<DefectPlacement> defect_placement;
  WindSpec wind;
  TrafficSpec traffic;
  Vec3 ground_station;
  JobSpec job;
  DroneParams drone;
  std::uint64_t seed = 0;

  const BridgeElement* find_element(std::string_view id) const;
  const TaskSpec* find_task(int id) const;
  int task_count() const { return static_cast<int>(tasks.size()); }
  // Smallest task speed limit; the bound that keeps conformity >= -100.
  double min_speed_limit_mps() const;
};

// 4.2, "4.2 m/s", "10 mph" or "15 km/h" to m/s. Throws ParseError.
double parse_speed(const nlohmann::json& value);

// Parses a JSON scenario document. Speeds may be numbers (m/s) or strings with
// a unit suffix ("10 mph", "4.2 m/s"). Throws ParseError or ValidationError.
ScenarioSpec load_scenario(std::string_view document);
ScenarioSpec load_scenario_file(const std::filesystem::path& path);

// Normalized document (SI numbers, explicit weights and defects). Loading it
// yields an equal ScenarioSpec.
nlohmann::json scenario_to_json(const ScenarioSpec& spec);

// Throws ValidationError naming the first violated invariant.
void validate(const ScenarioSpec& spec);

// Uniform placement over the host elements' surfaces. Deterministic in seed.
std::vector<DefectSpec> place_defects(const ScenarioSpec& spec, std::uint64_t seed);

// Same spec with defects regenerated from seed; explicit defect lists are kept.
ScenarioSpec with_defects_for_seed(const ScenarioSpec& spec, std::uint64_t seed);

struct NearestElement {
  std::string id;
  double distance_m = 0.0;
};

// Element with the smallest point-to-solid distance; ties go to the
// lexicographically smaller id. Empty optional when the spec has no elements.
std::optional<NearestElement> nearest_element(const ScenarioSpec& spec, const Vec3& point);

}  // namespace bridgesim
