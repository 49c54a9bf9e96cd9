#include <doctest.h>

#include <limits>
#include <string>

#include "bridgesim/error.hpp"
#include "bridgesim/rng.hpp"
#include "bridgesim/scenario.hpp"
#include "support.hpp"

using namespace bridgesim;
using nlohmann::json;

namespace {

std::string invariant_of(const ScenarioSpec& s) {
  try {
    validate(s);
  } catch (const ValidationError& e) {
    return e.invariant();
  }
  return "";
}

std::string invariant_of_doc(const std::string& doc) {
  try {
    load_scenario(doc);
  } catch (const ValidationError& e) {
    return e.invariant();
  }
  return "";
}

}  // namespace

TEST_SUITE("scenario") {
  TEST_CASE("fixture loads with four tasks and five defects") {
    const ScenarioSpec s = load_scenario_file(testing::fixture("two_bridge.json"));
    CHECK(s.task_count() == 4);
    CHECK(s.defects.size() == 5);
    CHECK(s.traffic.count == 6);
    CHECK(s.traffic.human_count == 2);
    CHECK(s.wind.level == WindLevel::light);
    CHECK(s.wind.force_newtons == 0.12);
    // 10 mph everywhere, so the defaults are 25 and -25/3.
    CHECK(s.job.weights.path_gain == doctest::Approx(25.0).epsilon(1e-12));
    CHECK(s.job.weights.speeding_loss == doctest::Approx(-25.0 / 3.0).epsilon(1e-12));
    CHECK(s.job.weights.efficiency_slope == doctest::Approx(-100.0 / 600.0).epsilon(1e-12));
  }

  TEST_CASE("normalized document round-trips") {
    const ScenarioSpec s = load_scenario_file(testing::fixture("two_bridge.json"));
    const json once = scenario_to_json(s);
    const ScenarioSpec again = load_scenario(once.dump());
    CHECK(scenario_to_json(again) == once);
    CHECK(load_scenario(scenario_to_json(again).dump(2)).defects.size() == s.defects.size());
  }

  TEST_CASE("speed units") {
    CHECK(parse_speed(json(4.2)) == 4.2);
    CHECK(parse_speed(json("4.2 m/s")) == doctest::Approx(4.2));
    CHECK(parse_speed(json("10 mph")) == doctest::Approx(4.4704));
    CHECK(parse_speed(json("15 km/h")) == doctest::Approx(15.0 / 3.6));
    CHECK_THROWS_AS(parse_speed(json("fast")), ParseError);
    CHECK_THROWS_AS(parse_speed(json("10 furlongs")), ParseError);
    CHECK_THROWS_AS(parse_speed(json(true)), ParseError);
  }

  TEST_CASE("wind levels map to fixed forces") {
    CHECK(wind_force(WindLevel::none) == 0.0);
    CHECK(wind_force(WindLevel::light) == 0.12);
    CHECK(wind_force(WindLevel::gentle) == 3.0);
    CHECK(wind_force(WindLevel::medium) == 12.0);
  }

  TEST_CASE("default weights") {
    const ScoringWeights w = default_weights(2, 30.0, 10.0, 900.0, 1500.0);
    CHECK(w.path_gain == 50.0);
    CHECK(w.speeding_loss == doctest::Approx(-100.0 / 6.0));
    CHECK(w.efficiency_slope == doctest::Approx(-100.0 / 600.0));
  }

  TEST_CASE("bad fixture names the task count invariant") {
    CHECK(invariant_of_doc(testing::slurp(testing::fixture("bad_scenario.json"))) == "tasks.count");
  }

  TEST_CASE("invariants") {
    const ScenarioSpec base = testing::line_scenario();
    CHECK(invariant_of(base).empty());

    ScenarioSpec s = base;
    s.tasks[0].reference_points.resize(1);
    CHECK(invariant_of(s) == "task.reference_points");

    s = base;
    s.tasks[0].reference_points[2] = s.tasks[0].reference_points[1];
    CHECK(invariant_of(s) == "task.reference_points_distinct");

    s = base;
    s.tasks[0].id = 2;
    CHECK(invariant_of(s) == "task.id");

    s = base;
    s.tasks[0].corridor_threshold_m = 0.0;
    CHECK(invariant_of(s) == "task.corridor_threshold");

    s = base;
    s.defects[0].position.x = 57.0;
    CHECK(invariant_of(s) == "defect.on_surface");

    s = base;
    s.defects[0].host_element = "nope";
    CHECK(invariant_of(s) == "defect.host_element");

    s = base;
    s.wind.level = WindLevel::gentle;
    CHECK(invariant_of(s) == "wind.force");

    s = base;
    s.ground_station = {60.0, 10.0, 5.0};
    CHECK(invariant_of(s) == "ground_station.outside");

    s = base;
    s.job.tau_min_s = s.job.tau_max_s;
    CHECK(invariant_of(s) == "job.tau");

    s = base;
    s.job.weights.path_gain = 101.0;
    CHECK(invariant_of(s) == "weights.path_gain");

    s = base;
    s.job.weights.speeding_loss *= 1.01;
    CHECK(invariant_of(s) == "weights.speeding_loss");

    s = base;
    s.elements.push_back(s.elements[0]);
    CHECK(invariant_of(s) == "element.id_unique");

    s = base;
    s.traffic.count = 1;
    s.traffic.human_count = 2;
    CHECK(invariant_of(s) == "traffic.count");
  }

  TEST_CASE("malformed documents are parse errors") {
    CHECK_THROWS_AS(load_scenario("{"), ParseError);
    CHECK_THROWS_AS(load_scenario(R"({"version": 1})"), ParseError);
    json doc = scenario_to_json(testing::line_scenario());
    doc["elements"][0]["kind"] = "bridge";
    CHECK_THROWS_AS(load_scenario(doc.dump()), ParseError);
    doc = scenario_to_json(testing::line_scenario());
    doc["version"] = 99;
    CHECK(invariant_of_doc(doc.dump()) == "version");
  }

  TEST_CASE("defect placement is seeded and lands on host surfaces") {
    ScenarioSpec s = testing::line_scenario();
    s.defects.clear();
    s.defect_placement = DefectPlacement{12, {"pier"}, 1.0};
    const auto a = place_defects(s, 5);
    const auto b = place_defects(s, 5);
    const auto c = place_defects(s, 6);
    REQUIRE(a.size() == 12);
    bool differs = false;
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(a[k].position == b[k].position);
      CHECK(a[k].host_element == "pier");
      CHECK(a[k].id == "D" + std::to_string(k + 1));
      CHECK(distance_to_surface(s.elements[0].shape, a[k].position) <= kDefectSurfaceTolerance);
      differs = differs || !(a[k].position == c[k].position);
    }
    CHECK(differs);

    const ScenarioSpec seeded = with_defects_for_seed(s, 5);
    CHECK(seeded.defects.size() == 12);
    CHECK(seeded.seed == 5);
    CHECK_NOTHROW(validate(seeded));

    // Explicit lists without a placement rule survive reseeding.
    const ScenarioSpec fixed = with_defects_for_seed(testing::line_scenario(), 99);
    REQUIRE(fixed.defects.size() == 1);
    CHECK(fixed.defects[0].position == Vec3{58.0, 10.0, 5.0});
  }

  TEST_CASE("defect placement needs enough surface") {
    ScenarioSpec s = testing::line_scenario();
    s.defect_placement = DefectPlacement{1000, {"pier"}, 1.0};  // pier is ~276 m2
    CHECK_THROWS_AS(place_defects(s, 1), ValidationError);
    try {
      place_defects(s, 1);
    } catch (const ValidationError& e) {
      CHECK(e.invariant() == "defect_placement.area");
    }
    s.defect_placement = DefectPlacement{1, {"missing"}, 1.0};
    CHECK_THROWS_AS(place_defects(s, 1), ValidationError);
  }

  TEST_CASE("nearest element") {
    ScenarioSpec s = testing::line_scenario();
    CHECK_FALSE(nearest_element(ScenarioSpec{}, {0, 0, 0}).has_value());
    auto n = nearest_element(s, {50.0, 10.0, 5.0});
    REQUIRE(n);
    CHECK(n->id == "pier");
    CHECK(n->distance_m == doctest::Approx(8.0));
    // Mirror pier at the same distance: the smaller id wins.
    s.elements.push_back({"a_pier", ElementKind::pier, Cylinder{40.0, 10.0, 0.0, 20.0, 2.0}, true});
    n = nearest_element(s, {50.0, 10.0, 5.0});
    CHECK(n->id == "a_pier");
  }

  TEST_CASE("nearest element agrees with dense sampling over element surfaces") {
    const ScenarioSpec s = load_scenario_file(testing::fixture("two_bridge.json"));
    Rng rng(3);
    for (int k = 0; k < 40; ++k) {
      const Vec3 p{rng.uniform(-80, 80), rng.uniform(-10, 130), rng.uniform(2.5, 20)};
      const auto n = nearest_element(s, p);
      REQUIRE(n);
      // Sampled surface distance can only overestimate.
      double sampled = std::numeric_limits<double>::infinity();
      for (const auto& e : s.elements) {
        if (contains(e.shape, p)) sampled = 0.0;
        for (int j = 0; j < 3000; ++j) {
          sampled = std::min(sampled, distance(p, sample_surface(e.shape, rng.uniform(), rng.uniform(), rng.uniform())));
        }
      }
      CHECK(n->distance_m <= sampled + 1e-9);
    }
  }
}
