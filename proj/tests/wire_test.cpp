#include <doctest.h>

#include <string>

#include "bridgesim/error.hpp"
#include "bridgesim/wire.hpp"
#include "support.hpp"

using namespace bridgesim;
using nlohmann::json;

TEST_SUITE("wire") {
  TEST_CASE("every kind round-trips") {
    const WireKind kinds[] = {WireKind::hello,    WireKind::scenario_summary, WireKind::control,
                              WireKind::frame,    WireKind::feedback,         WireKind::hud,
                              WireKind::session_end, WireKind::report_ready,  WireKind::error};
    std::uint64_t seq = 7;
    for (WireKind k : kinds) {
      const WireMessage m{k, seq++, json{{"a", 1.5}, {"b", "x"}}};
      const std::string line = encode(m);
      CHECK(line.back() == '\n');
      CHECK(line.find('\n') == line.size() - 1);
      CHECK(decode(line) == m);
      CHECK(decode(line.substr(0, line.size() - 1)) == m);
      CHECK(wire_kind_from(to_string(k)) == k);
    }
    CHECK(decode(R"({"kind":"hello","seq":0})").payload == json::object());
  }

  TEST_CASE("directions") {
    CHECK(allowed(WireKind::hello, Direction::client_to_server));
    CHECK(allowed(WireKind::control, Direction::client_to_server));
    CHECK_FALSE(allowed(WireKind::frame, Direction::client_to_server));
    CHECK_FALSE(allowed(WireKind::control, Direction::server_to_client));
    CHECK(allowed(WireKind::report_ready, Direction::server_to_client));
    CHECK(allowed(WireKind::error, Direction::server_to_client));
  }

  TEST_CASE("malformed messages") {
    CHECK_THROWS_AS(decode("{nope"), ProtocolError);
    CHECK_THROWS_AS(decode("[1,2]"), ProtocolError);
    CHECK_THROWS_AS(decode(R"({"seq":1})"), ProtocolError);
    CHECK_THROWS_AS(decode(R"({"kind":"teleport","seq":1})"), ProtocolError);
    CHECK_THROWS_AS(decode(R"({"kind":"hello","seq":-1})"), ProtocolError);
    CHECK_THROWS_AS(decode(R"({"kind":"hello","seq":1.5})"), ProtocolError);
    CHECK_THROWS_AS(decode(R"({"kind":"hello","seq":1,"payload":[]})"), ProtocolError);
  }

  TEST_CASE("sequence numbers strictly increase") {
    SequenceCheck s;
    s.accept(10);
    s.accept(11);
    s.accept(40);
    CHECK_THROWS_AS(s.accept(40), ProtocolError);
    CHECK_THROWS_AS(s.accept(3), ProtocolError);
  }

  TEST_CASE("control payloads") {
    const ControlMessage c = parse_control(json{{"fb", 1.7}, {"rl", -0.25}, {"rt", -3}, {"snapshot", true}});
    CHECK(c.held.fb == 1.0);
    CHECK(c.held.rl == -0.25);
    CHECK(c.held.ud == 0.0);
    CHECK(c.held.rt == -1.0);
    CHECK(c.held.snapshot);
    CHECK_FALSE(c.held.light);
    CHECK(c.clamped_axes == 2);
    CHECK_FALSE(c.questionnaire);

    CHECK_THROWS_AS(parse_control(json{{"fb", "fast"}}), ProtocolError);
    CHECK_THROWS_AS(parse_control(json{{"light", 1}}), ProtocolError);
    CHECK(parse_control(json{{"questionnaire", json::object()}}).questionnaire);

    const ControlInput in{0.5, -0.5, 0.25, 0.0, true, false};
    CHECK(parse_control(control_payload(in)).held == in);
  }

  TEST_CASE("payload builders") {
    CHECK(hello_payload() == json{{"v", kWireVersion}});
    const json s = scenario_summary_payload(testing::line_scenario());
    CHECK(s["name"] == "line");
    CHECK(s["tasks"].size() == 1);
    CHECK(s["tasks"][0]["reference_points"].size() == 5);
    CHECK(s["defect_count"] == 1);
    CHECK(s["job"]["frame_rate_hz"] == 50.0);

    const json h = hud_payload({25.0, BatteryColor::red, true, 3.0});
    CHECK(h["color"] == "red");
    CHECK(h["flashing"] == true);
    const json f = feedback_payload({MessageKind::distance_reminder, "closer", 12});
    CHECK(f == json{{"i", 12}, {"kind", "distance_reminder"}, {"text", "closer"}});
    CHECK(error_payload("protocol", "bad") == json{{"code", "protocol"}, {"detail", "bad"}});
  }
}
