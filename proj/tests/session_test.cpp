#include <doctest.h>

#include <sstream>
#include <string>
#include <vector>

#include "bridgesim/error.hpp"
#include "bridgesim/pilot.hpp"
#include "bridgesim/report.hpp"
#include "bridgesim/session.hpp"
#include "support.hpp"

using namespace bridgesim;

namespace {

ControlInput climb() { return {0.0, 0.0, 1.0, 0.0}; }

struct CountingObserver : SessionObserver {
  int frames = 0;
  std::int64_t last = -1;
  void on_frame(const TelemetryPipeline::Step& step, const DroneState&, const TrafficState&) override {
    ++frames;
    last = step.frame.index;
  }
};

FlightPlan line_plan() {
  FlightPlan p;
  p.steps = {MoveTo{{0, 10, 5}, {}}, MoveTo{{40, 10, 5}, {}}, MoveTo{{50, 10, 5}, {}}, SnapshotOf{"D1"},
             MoveTo{{50, -5, 5}, {}}, MoveTo{{0, 0, 3}, {}},  MoveTo{{0, 0, 0}, {}},  Hold{40}};
  return p;
}

}  // namespace

TEST_SUITE("session") {
  TEST_CASE("a pilot that never climbs flies no frames") {
    ScriptedPilot pilot({{0, 100, ControlInput{0.5, 0.0, 0.0, 0.0}}});
    const SessionResult r = run_session(testing::line_config(), pilot);
    CHECK(r.outcome.frames == 0);
    CHECK(r.outcome.reason == EndReason::aborted);
    CHECK(r.card.efficiency.score == 100.0);
  }

  TEST_CASE("ticks before takeoff are not frames") {
    ScriptedPilot pilot({{0, 5, ControlInput{}}, {5, 15, climb()}});
    CountingObserver obs;
    const SessionResult r = run_session(testing::line_config(), pilot, nullptr, &obs);
    CHECK(r.outcome.frames == 10);
    CHECK(r.outcome.reason == EndReason::aborted);
    CHECK(obs.frames == 10);
    CHECK(obs.last == 9);
    CHECK(r.frames.front().index == 0);
  }

  TEST_CASE("holding the snapshot key takes one snapshot") {
    ControlInput hold = climb();
    hold.snapshot = true;
    ScriptedPilot pilot({{0, 20, hold}});
    const SessionResult r = run_session(testing::line_config(), pilot);
    CHECK(r.analysis.ledger.snapshots_taken == 1);
  }

  TEST_CASE("vehicle contact ends the session") {
    SessionConfig c = testing::line_config();
    c.scenario.traffic.count = 1;
    c.scenario.traffic.lanes.push_back({"parked", AgentKind::vehicle, {{0, 0, 0}, {0.01, 0, 0}}, 0.0, 0.0});
    ScriptedPilot pilot({{0, 500, climb()}});
    const SessionResult r = run_session(c, pilot);
    CHECK(r.outcome.reason == EndReason::crash_traffic);
    CHECK(r.outcome.frames == 1);
    CHECK(r.analysis.ledger.vehicle);
    CHECK(r.card.safety == -100.0);
  }

  TEST_CASE("flight time beyond tau_max empties the battery") {
    SessionConfig c = testing::line_config();
    c.scenario.job.tau_min_s = 1.0;
    c.scenario.job.tau_max_s = 2.0;
    ScriptedPilot pilot({{0, 1000, ControlInput{0.0, 0.0, 0.1, 0.0}}});
    const SessionResult r = run_session(c, pilot);
    CHECK(r.outcome.reason == EndReason::battery_exhausted);
    CHECK(r.outcome.frames == 101);
    CHECK(r.card.efficiency.battery_failed);
    CHECK(r.card.efficiency.score == -100.0);
    CHECK(r.frames.back().battery_pct == 0.0);
  }

  TEST_CASE("landing needs the drone to have been airborne") {
    // Creeping up 1 cm per second never leaves the landing zone.
    ScriptedPilot pilot({{0, 200, ControlInput{0.0, 0.0, 0.002, 0.0}}});
    const SessionResult r = run_session(testing::line_config(), pilot);
    CHECK(r.outcome.reason == EndReason::aborted);
    CHECK(r.outcome.frames == 200);
  }

  TEST_CASE("planned inspection flight lands and detects the defect") {
    SessionConfig c = testing::line_config();
    ScriptedPilot pilot = compile_plan(line_plan(), c.scenario);
    const SessionResult r = run_session(c, pilot);
    CHECK(r.outcome.reason == EndReason::landed_at_station);
    CHECK(r.analysis.ledger.true_detections == 1);
    CHECK(r.analysis.ledger.snapshots_taken == 1);
    CHECK(r.card.accuracy.score == 100.0);
    CHECK(r.card.safety == 0.0);
    CHECK(r.card.conformity.per_task[0].on_path_fraction == 1.0);
    CHECK(r.card.conformity.score == doctest::Approx(100.0));
    CHECK(r.card.efficiency.score == 100.0);
  }

  TEST_CASE("same inputs give byte-identical logs and replay reproduces the card") {
    const SessionConfig c = testing::line_config();
    std::ostringstream a;
    std::ostringstream b;
    ScriptedPilot p1 = compile_plan(line_plan(), c.scenario);
    ScriptedPilot p2 = compile_plan(line_plan(), c.scenario);
    const SessionResult ra = run_session(c, p1, &a);
    run_session(c, p2, &b);
    REQUIRE(a.str() == b.str());

    const ReplayResult rep = replay(parse_session_log(a.str()));
    CHECK(rep.mismatches.empty());
    CHECK(to_json(rep.result.card) == to_json(ra.card));
    CHECK(rep.result.messages == ra.messages);
  }

  TEST_CASE("re-scoring with a different other-crash weight changes only safety") {
    SessionConfig c = testing::line_config();
    FlightPlan plan;
    // Straight into the pier; contact blocks the drone at its surface.
    plan.steps = {MoveTo{{0, 10, 5}, {}}, MoveTo{{40, 10, 5}, {}}, MoveTo{{59, 10, 5}, {}}, Hold{50}};
    ScriptedPilot pilot = compile_plan(plan, c.scenario);
    std::ostringstream log;
    const SessionResult r = run_session(c, pilot, &log);
    REQUIRE(r.analysis.ledger.other_count > 0);

    const SessionLog parsed = parse_session_log(log.str());
    ScoringWeights w = r.scenario.job.weights;
    w.other_loss = -10.0;
    const ReplayResult base = replay(parsed);
    const ReplayResult changed = replay(parsed, w);
    CHECK(base.mismatches.empty());
    CHECK(to_json(base.result.card) == to_json(r.card));
    CHECK(changed.result.card.safety != base.result.card.safety);
    CHECK(changed.result.card.safety ==
          std::max(-10.0 * r.analysis.ledger.other_count, r.scenario.job.weights.safety_floor));
    CHECK(to_json(changed.result.card)["conformity"] == to_json(base.result.card)["conformity"]);
    CHECK(changed.result.card.efficiency.score == base.result.card.efficiency.score);
    CHECK(changed.result.card.accuracy.score == base.result.card.accuracy.score);
  }

  TEST_CASE("replay flags a tampered log") {
    const SessionConfig c = testing::line_config();
    ScriptedPilot pilot = compile_plan(line_plan(), c.scenario);
    std::ostringstream log;
    run_session(c, pilot, &log);
    SessionLog parsed = parse_session_log(log.str());
    parsed.frames[100].position.y += 30.0;
    const ReplayResult rep = replay(parsed);
    CHECK_FALSE(rep.mismatches.empty());
    CHECK(rep.mismatches.front().frame == 100);
  }
}
