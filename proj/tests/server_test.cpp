#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "bridgesim/error.hpp"
#include "bridgesim/history.hpp"
#include "bridgesim/server.hpp"
#include "bridgesim/wire.hpp"
#include "support.hpp"

using namespace bridgesim;
using nlohmann::json;

namespace {

// Writes the script, half-closes, then reads everything the server sends.
std::vector<WireMessage> talk(int fd, const std::vector<std::string>& script) {
  for (const auto& line : script) {
    std::size_t off = 0;
    while (off < line.size()) {
      const ssize_t n = ::send(fd, line.data() + off, line.size() - off, MSG_NOSIGNAL);
      if (n <= 0) break;
      off += static_cast<std::size_t>(n);
    }
  }
  ::shutdown(fd, SHUT_WR);
  std::string all;
  char buf[8192];
  for (;;) {
    const ssize_t n = ::recv(fd, buf, sizeof buf, 0);
    if (n <= 0) break;
    all.append(buf, static_cast<std::size_t>(n));
  }
  std::vector<WireMessage> out;
  std::size_t start = 0;
  for (auto nl = all.find('\n'); nl != std::string::npos; start = nl + 1, nl = all.find('\n', start)) {
    out.push_back(decode(all.substr(start, nl - start)));
  }
  return out;
}

struct Run {
  ConnectionStats stats;
  std::vector<WireMessage> received;
};

Run serve(const ServerConfig& cfg, const std::vector<std::string>& script) {
  int fds[2];
  REQUIRE(::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) == 0);
  Run r;
  std::thread server([&] {
    r.stats = serve_connection(cfg, fds[0]);
    ::close(fds[0]);
  });
  r.received = talk(fds[1], script);
  server.join();
  ::close(fds[1]);
  return r;
}

ServerConfig lockstep_config(const std::filesystem::path& root) {
  ServerConfig cfg;
  cfg.session = testing::line_config();
  cfg.session.repetition = 0;
  cfg.data_root = root;
  cfg.lockstep = true;
  cfg.decimation = 5;
  cfg.speedup = 0.0;
  cfg.state_capacity = 1 << 16;
  cfg.questionnaire_wait = std::chrono::milliseconds(50);
  return cfg;
}

std::string msg(WireKind k, std::uint64_t seq, json payload) { return encode({k, seq, std::move(payload)}); }

std::vector<std::string> climb_script(int controls, std::uint64_t first_seq = 1) {
  std::vector<std::string> s{msg(WireKind::hello, first_seq, hello_payload())};
  for (int i = 0; i < controls; ++i) {
    s.push_back(msg(WireKind::control, first_seq + 1 + i, control_payload({0, 0, 1, 0})));
  }
  return s;
}

json questionnaire_form() {
  json phases = json::object();
  for (const char* p : {"calibration", "takeoff", "task1", "task2", "task3", "task4", "landing"}) {
    phases[p] = {{"performance", 2}, {"mental_demand", 4}, {"physical_demand", 1}};
  }
  return {{"overall", {{"time_pressure", 5}, {"frustration", 1}, {"in_task_feedback", 3}}}, {"by_phase", phases}};
}

}  // namespace

TEST_SUITE("server") {
  TEST_CASE("handshake, lockstep flight and disconnect grace") {
    testing::TempDir tmp("server");
    const Run r = serve(lockstep_config(tmp.path()), climb_script(30));
    REQUIRE(r.stats.handshake_ok);
    CHECK_FALSE(r.stats.protocol_error);
    // 30 commanded frames plus five seconds of zero input after the disconnect.
    CHECK(r.stats.outcome.frames == 30 + 250);
    CHECK(r.stats.outcome.reason == EndReason::aborted);

    REQUIRE(r.received.size() > 3);
    CHECK(r.received[0].kind == WireKind::scenario_summary);
    CHECK(r.received[0].seq == 1);
    CHECK(r.received[0].payload["name"] == "line");
    SequenceCheck seq;
    int frames = 0;
    for (const auto& m : r.received) {
      CHECK(allowed(m.kind, Direction::server_to_client));
      seq.accept(m.seq);
      if (m.kind == WireKind::frame) ++frames;
    }
    CHECK(frames == 280 / 5);
    CHECK(r.received[1].seq == 2);
    const WireMessage& end = r.received[r.received.size() - 2];
    CHECK(end.kind == WireKind::session_end);
    CHECK(end.payload["reason"] == "aborted");
    CHECK(end.payload["frames"] == 280);
    const WireMessage& ready = r.received.back();
    CHECK(ready.kind == WireKind::report_ready);

    REQUIRE(r.stats.report_path);
    CHECK(ready.payload["path"] == r.stats.report_path->string());
    CHECK(*r.stats.report_path == tmp.path() / "tester" / "session_1_report.json");
    CHECK(std::filesystem::exists(tmp.path() / "tester" / "session_1.log"));
    CHECK(load_history(tmp.path(), "tester").entries.size() == 1);
    const json report = json::parse(testing::slurp(*r.stats.report_path));
    CHECK_FALSE(report.contains("self_assessment"));

    // A second connection becomes repetition 2.
    const Run again = serve(lockstep_config(tmp.path()), climb_script(5));
    CHECK(*again.stats.report_path == tmp.path() / "tester" / "session_2_report.json");
  }

  TEST_CASE("clamped axes and a questionnaire sent during flight") {
    testing::TempDir tmp("server");
    std::vector<std::string> script = climb_script(10);
    script.push_back(msg(WireKind::control, 20, json{{"ud", 2.5}, {"fb", -4}}));
    script.push_back(msg(WireKind::control, 21, json{{"questionnaire", questionnaire_form()}}));
    const Run r = serve(lockstep_config(tmp.path()), script);
    CHECK(r.stats.clamp_warnings == 2);
    CHECK(r.stats.questionnaire_received);
    CHECK(r.received[r.received.size() - 2].payload["clamp_warnings"] == 2);
    const json report = json::parse(testing::slurp(*r.stats.report_path));
    REQUIRE(report.contains("self_assessment"));
    CHECK(report["self_assessment"]["overall"]["time_pressure"] == 5);
  }

  TEST_CASE("practice sessions stay out of the history") {
    testing::TempDir tmp("server");
    ServerConfig cfg = lockstep_config(tmp.path());
    cfg.session.practice = true;
    const Run r = serve(cfg, climb_script(5));
    CHECK(*r.stats.report_path == tmp.path() / "tester" / "practice_report.json");
    CHECK(std::filesystem::exists(tmp.path() / "tester" / "practice.log"));
    CHECK(load_history(tmp.path(), "tester").entries.empty());
  }

  TEST_CASE("a sequence violation yields an error and a disconnect") {
    testing::TempDir tmp("server");
    std::vector<std::string> script = climb_script(3);
    script.push_back(msg(WireKind::control, 2, control_payload({0, 0, 1, 0})));
    const Run r = serve(lockstep_config(tmp.path()), script);
    CHECK(r.stats.protocol_error);
    bool saw_error = false;
    for (const auto& m : r.received) {
      if (m.kind == WireKind::error) {
        saw_error = true;
        CHECK(m.payload["code"] == "protocol");
      }
    }
    CHECK(saw_error);
    CHECK(r.stats.outcome.frames == 3 + 250);
  }

  TEST_CASE("a second hello is a protocol error") {
    testing::TempDir tmp("server");
    std::vector<std::string> script = climb_script(2);
    script.push_back(msg(WireKind::hello, 9, hello_payload()));
    const Run r = serve(lockstep_config(tmp.path()), script);
    CHECK(r.stats.protocol_error);
  }

  TEST_CASE("handshake failures") {
    testing::TempDir tmp("server");
    const Run wrong_version = serve(lockstep_config(tmp.path()), {msg(WireKind::hello, 1, json{{"v", 2}})});
    CHECK_FALSE(wrong_version.stats.handshake_ok);
    CHECK(wrong_version.stats.protocol_error);
    REQUIRE(wrong_version.received.size() == 1);
    CHECK(wrong_version.received[0].kind == WireKind::error);

    const Run control_first =
        serve(lockstep_config(tmp.path()), {msg(WireKind::control, 1, control_payload({0, 0, 1, 0}))});
    CHECK(control_first.stats.protocol_error);
    CHECK(control_first.received.size() == 1);

    const Run silent = serve(lockstep_config(tmp.path()), {});
    CHECK_FALSE(silent.stats.handshake_ok);
    CHECK(silent.received.empty());
    CHECK_FALSE(std::filesystem::exists(tmp.path() / "tester"));
  }

  TEST_CASE("disconnect before takeoff ends at once") {
    testing::TempDir tmp("server");
    std::vector<std::string> script{msg(WireKind::hello, 1, hello_payload())};
    for (int i = 0; i < 5; ++i) script.push_back(msg(WireKind::control, 2 + i, control_payload({})));
    const Run r = serve(lockstep_config(tmp.path()), script);
    CHECK(r.stats.outcome.frames == 0);
    CHECK(r.stats.outcome.reason == EndReason::aborted);
  }

  TEST_CASE("addresses") {
    const Address a = parse_address("10.0.0.2:9000");
    CHECK(a.host == "10.0.0.2");
    CHECK(a.port == 9000);
    CHECK(parse_address("localhost:0").port == 0);
    CHECK_THROWS_AS(parse_address("nocolon"), Error);
    CHECK_THROWS_AS(parse_address(":80"), Error);
    CHECK_THROWS_AS(parse_address("h:99999"), Error);
    CHECK_THROWS_AS(parse_address("h:8x"), Error);

    ::unsetenv("BRIDGESIM_ADDR");
    CHECK(default_address().port == 7878);
    ::setenv("BRIDGESIM_ADDR", "0.0.0.0:4000", 1);
    CHECK(default_address().port == 4000);
    ::unsetenv("BRIDGESIM_ADDR");
  }

  TEST_CASE("listening server serves one session over tcp") {
    testing::TempDir tmp("server");
    Server srv(lockstep_config(tmp.path()), {"127.0.0.1", 0});
    REQUIRE(srv.port() != 0);
    std::thread t([&] { srv.run(1); });
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(srv.port());
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
    const auto received = talk(fd, climb_script(4));
    ::close(fd);
    t.join();
    REQUIRE_FALSE(received.empty());
    CHECK(received.back().kind == WireKind::report_ready);
  }
}
