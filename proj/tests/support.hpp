#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>

#include "bridgesim/scenario.hpp"
#include "bridgesim/session.hpp"

namespace testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(BRIDGESIM_FIXTURE_DIR) / name;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("bridgesim_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// One straight task along +x at 5 m, 10 m north of the station, and a pier
// further east carrying one defect. No traffic, no wind.
inline bridgesim::ScenarioSpec line_scenario() {
  using namespace bridgesim;
  ScenarioSpec s;
  s.name = "line";
  s.ground_station = {0.0, 0.0, 0.0};
  s.elements.push_back({"pier", ElementKind::pier, Cylinder{60.0, 10.0, 0.0, 20.0, 2.0}, true});
  TaskSpec t;
  t.id = 1;
  t.name = "line";
  for (int k = 0; k <= 4; ++k) t.reference_points.push_back({10.0 * k, 10.0, 5.0});
  t.corridor_threshold_m = 2.0;
  t.recommended_distance = {3.0, 8.0};
  s.tasks.push_back(t);
  s.defects.push_back({"D1", {58.0, 10.0, 5.0}, "pier", DefectKind::crack});
  s.job.weights = default_weights(1, s.job.v_max_mps, t.speed_limit_mps, s.job.tau_min_s, s.job.tau_max_s);
  s.seed = 7;
  return s;
}

inline bridgesim::SessionConfig line_config() {
  bridgesim::SessionConfig c;
  c.scenario = line_scenario();
  c.seed = 7;
  c.participant = "tester";
  return c;
}

}  // namespace testing
