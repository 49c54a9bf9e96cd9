#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bridgesim/pilot.hpp"
#include "bridgesim/report.hpp"
#include "support.hpp"

using namespace bridgesim;
using nlohmann::json;

namespace {

const SessionResult& fixture_session() {
  static const SessionResult r = [] {
    SessionConfig c = testing::line_config();
    FlightPlan p;
    p.steps = {MoveTo{{0, 10, 5}, {}}, MoveTo{{40, 10, 5}, {}}, MoveTo{{50, 10, 5}, {}}, SnapshotOf{"D1"},
               MoveTo{{50, -5, 5}, {}}, MoveTo{{0, 0, 3}, {}},  MoveTo{{0, 0, 0}, {}},  Hold{40}};
    ScriptedPilot pilot = compile_plan(p, c.scenario);
    return run_session(c, pilot);
  }();
  return r;
}

QuestionnaireResponse neutral() {
  QuestionnaireResponse q;
  for (Phase p : kAllPhases) q.by_phase[p] = PhaseAnswers{};
  return q;
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("session report layout") {
    const SessionResult& r = fixture_session();
    const json doc = emit_report({"P01", 1, false, &r, std::nullopt, nullptr});
    CHECK(doc["format"] == kReportFormat);
    CHECK(doc["outcome"]["reason"] == "landed_at_station");
    CHECK(doc["outcome"]["frames"] == r.outcome.frames);
    CHECK(doc["standardized"]["accuracy"] == 100.0);
    CHECK(doc["events"]["true_detections"] == 1);
    CHECK(doc["charts"]["kiviat"].size() == 4);
    CHECK(doc["charts"]["crash_stack"]["transit"] == 0);
    CHECK_FALSE(doc.contains("self_assessment"));

    double sum = 0.0;
    for (const auto& s : doc["charts"]["waterfall"]["steps"]) sum += s["gain"].get<double>() + s["loss"].get<double>();
    CHECK(std::abs(sum - doc["scores"]["raw"]["conformity"].get<double>()) <= 1e-9);
    CHECK(doc["charts"]["waterfall"]["total"] == doc["scores"]["raw"]["conformity"]);

    // Without history the improvement series is the current session alone.
    CHECK(doc["charts"]["improvement"]["series"].size() == 1);
    CHECK(doc["charts"]["improvement"]["deltas_vs_first_pct"].empty());
  }

  TEST_CASE("questionnaire section appears only when answered") {
    const SessionResult& r = fixture_session();
    const json doc = emit_report({"P01", 1, false, &r, neutral(), nullptr});
    REQUIRE(doc.contains("self_assessment"));
    CHECK(doc["self_assessment"]["overall"]["time_pressure"] == 3);
  }

  TEST_CASE("improvement series comes from history") {
    const SessionResult& r = fixture_session();
    ParticipantHistory h;
    h.participant = "P01";
    h.entries.push_back({1, "session_1.log", EndReason::aborted, 10, {40, 50, 60, 20.0}});
    h.entries.push_back({2, "session_2.log", EndReason::landed_at_station, 10, r.card.standardized});
    const json doc = emit_report({"P01", 2, false, &r, std::nullopt, &h});
    const json& imp = doc["charts"]["improvement"];
    CHECK(imp["series"].size() == 2);
    REQUIRE(imp["deltas_vs_first_pct"].size() == 1);
    CHECK(imp["deltas_vs_first_pct"][0]["accuracy"].get<double>() == doctest::Approx(400.0));
  }

  TEST_CASE("write_report creates directories") {
    testing::TempDir tmp("report");
    const auto path = tmp.path() / "a" / "b" / "r.json";
    write_report(path, json{{"x", 1}});
    CHECK(json::parse(testing::slurp(path)) == json{{"x", 1}});
  }

  TEST_CASE("group report") {
    std::vector<LabelledCard> cards{{"A", {10, 20, 30, 40.0}}, {"B", {20, 30, 40, std::nullopt}}};
    json doc = group_report(cards);
    CHECK(doc["format"] == kGroupReportFormat);
    CHECK(doc["stats"]["participants"] == 2);
    CHECK(doc["stats"]["conformity"]["median"] == 15.0);
    CHECK_FALSE(doc.contains("questionnaire"));
    const std::vector<QuestionnaireResponse> qs{neutral()};
    doc = group_report(cards, qs);
    CHECK(doc["questionnaire"]["overall.frustration"]["mean"] == 3.0);
  }

  TEST_CASE("csv export") {
    const SessionResult& r = fixture_session();
    const std::vector<CsvRow> rows{{"P01", 1, r.card}, {"P,02", 2, r.card}};
    const std::string csv = score_cards_csv(rows);
    std::istringstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header.find("participant") == 0);
    int lines = 0;
    for (std::string l; std::getline(in, l);) ++lines;
    CHECK(lines == 2);
    CHECK(csv.find("\"P,02\"") != std::string::npos);
  }
}
