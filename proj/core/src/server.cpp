#include "bridgesim/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <mutex>
#include <thread>

#include "bridgesim/channel.hpp"
#include "bridgesim/error.hpp"
#include "bridgesim/history.hpp"
#include "bridgesim/questionnaire.hpp"
#include "bridgesim/report.hpp"
#include "bridgesim/wire.hpp"

namespace bridgesim {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr std::size_t kMaxLineBytes = 1 << 20;

class LineReader {
 public:
  explicit LineReader(int fd) : fd_(fd) {}

  // Empty on EOF or a socket error. Throws ProtocolError on an oversized line.
  std::optional<std::string> next() {
    for (;;) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      if (buffer_.size() > kMaxLineBytes) throw ProtocolError("message exceeds 1 MiB");
      char chunk[4096];
      const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return std::nullopt;
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  int fd_;
  std::string buffer_;
};

bool send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

struct Outbound {
  WireKind kind;
  json payload;
};

struct Inbound {
  bool closed = false;
  ControlMessage control;
};

// Shared between the session thread and the two socket threads.
class Connection {
 public:
  Connection(const ServerConfig& config, int fd)
      : fd_(fd), control_(config.control_capacity), state_(config.state_capacity) {}

  Channel<Inbound>& control() { return control_; }
  Channel<Outbound>& state() { return state_; }

  void fail(std::string_view code, std::string_view detail) {
    std::lock_guard lock(mu_);
    if (!urgent_) urgent_ = Outbound{WireKind::error, error_payload(code, detail)};
    protocol_error_ = true;
  }

  bool protocol_error() const {
    std::lock_guard lock(mu_);
    return protocol_error_;
  }

  void start(std::uint64_t next_seq) {
    seq_ = next_seq;
    writer_ = std::thread([this] { write_loop(); });
    reader_ = std::thread([this] { read_loop(); });
  }

  void finish() {
    state_.close();
    if (writer_.joinable()) writer_.join();
    ::shutdown(fd_, SHUT_RDWR);
    if (reader_.joinable()) reader_.join();
  }

  LineReader& lines() { return lines_; }
  std::atomic<int> clamp_warnings{0};

 private:
  std::optional<Outbound> take_urgent() {
    std::lock_guard lock(mu_);
    auto u = std::move(urgent_);
    urgent_.reset();
    return u;
  }

  bool write(const Outbound& o) { return send_all(fd_, encode({o.kind, seq_++, o.payload})); }

  void write_loop() {
    bool dead = false;
    for (;;) {
      if (auto u = take_urgent(); u && !dead) {
        write(*u);
        ::shutdown(fd_, SHUT_RDWR);
        dead = true;
      }
      auto item = state_.pop_for(std::chrono::milliseconds(20));
      if (!item) {
        if (state_.closed() && state_.size() == 0) {
          if (auto u = take_urgent(); u && !dead) write(*u);
          return;
        }
        continue;
      }
      if (!dead && !write(*item)) dead = true;
    }
  }

  void read_loop() {
    SequenceCheck seq;
    try {
      while (auto line = lines_.next()) {
        const WireMessage m = decode(*line);
        seq.accept(m.seq);
        if (!allowed(m.kind, Direction::client_to_server)) {
          throw ProtocolError("'" + std::string(to_string(m.kind)) + "' is not accepted from the client");
        }
        if (m.kind != WireKind::control) throw ProtocolError("hello was already exchanged");
        Inbound in;
        in.control = parse_control(m.payload);
        clamp_warnings += in.control.clamped_axes;
        control_.try_push(std::move(in));
      }
    } catch (const ProtocolError& e) {
      fail("protocol", e.what());
    }
    Inbound closed;
    closed.closed = true;
    // A full control queue must still learn about the disconnect.
    while (!control_.try_push(closed) && !control_.closed()) std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }

  int fd_;
  LineReader lines_{fd_};
  Channel<Inbound> control_;
  Channel<Outbound> state_;
  mutable std::mutex mu_;
  std::optional<Outbound> urgent_;
  bool protocol_error_ = false;
  std::uint64_t seq_ = 1;
  std::thread writer_;
  std::thread reader_;
};

class GatewayInput : public InputSource, public SessionObserver {
 public:
  GatewayInput(const ServerConfig& config, Connection& conn, const ScenarioSpec& scenario)
      : config_(config), conn_(conn), scenario_(scenario),
        grace_frames_(static_cast<std::int64_t>(std::llround(config.disconnect_grace_s * scenario.job.frame_rate_hz))) {}

  std::optional<ControlInput> next(std::int64_t tick) override {
    if (!disconnected_) {
      if (config_.lockstep) {
        wait_one();
      } else {
        pace(tick);
        drain();
      }
    }
    if (disconnected_) {
      if (!started_) return std::nullopt;
      if (grace_used_ >= grace_frames_) return std::nullopt;
      ++grace_used_;
      return ControlInput{};
    }
    return held_;
  }

  void on_frame(const TelemetryPipeline::Step& step, const DroneState& state, const TrafficState& traffic) override {
    started_ = true;
    const int every = config_.decimation < 1 ? 1 : config_.decimation;
    if (step.frame.index % every == 0) {
      conn_.state().push_drop_oldest({WireKind::frame, frame_payload(step.frame, state, traffic, scenario_.traffic)});
      conn_.state().push_drop_oldest({WireKind::hud, hud_payload(step.feedback.hud)});
    }
    for (const auto& m : step.new_messages) conn_.state().push_drop_oldest({WireKind::feedback, feedback_payload(m)});
  }

  // After the session: wait for the questionnaire unless the client is gone.
  std::optional<json> await_questionnaire() {
    if (questionnaire_) return questionnaire_;
    const auto deadline = Clock::now() + config_.questionnaire_wait;
    while (!disconnected_ && Clock::now() < deadline) {
      auto in = conn_.control().pop_for(std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()));
      if (!in) continue;
      take(*in, false);
      if (questionnaire_) break;
    }
    return questionnaire_;
  }

 private:
  void pace(std::int64_t tick) {
    if (config_.speedup <= 0.0) return;
    if (!t0_) t0_ = Clock::now();
    const double sim_s = static_cast<double>(tick) / scenario_.job.frame_rate_hz / config_.speedup;
    std::this_thread::sleep_until(*t0_ + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(sim_s)));
  }

  void drain() {
    bool any = false;
    bool light = false;
    bool snapshot = false;
    while (auto in = conn_.control().try_pop()) {
      if (in->closed) {
        disconnected_ = true;
        break;
      }
      take(*in, true);
      any = true;
      light = light || in->control.held.light;
      snapshot = snapshot || in->control.held.snapshot;
    }
    if (any) {
      held_.light = light;
      held_.snapshot = snapshot;
    }
  }

  void wait_one() {
    auto in = conn_.control().pop();
    if (!in || in->closed) {
      disconnected_ = true;
      return;
    }
    take(*in, true);
  }

  void take(const Inbound& in, bool apply) {
    if (in.closed) {
      disconnected_ = true;
      return;
    }
    if (in.control.questionnaire) questionnaire_ = in.control.questionnaire;
    if (apply) held_ = in.control.held;
  }

  const ServerConfig& config_;
  Connection& conn_;
  const ScenarioSpec& scenario_;
  std::int64_t grace_frames_;
  std::int64_t grace_used_ = 0;
  bool started_ = false;
  bool disconnected_ = false;
  ControlInput held_;
  std::optional<json> questionnaire_;
  std::optional<Clock::time_point> t0_;
};

json session_end_payload(const SessionResult& r, int clamp_warnings) {
  return {{"reason", to_string(r.outcome.reason)},
          {"frames", r.outcome.frames},
          {"duration_s", static_cast<double>(r.outcome.frames) / r.scenario.job.frame_rate_hz},
          {"raw",
           {{"conformity", r.card.conformity.score},
            {"efficiency", r.card.efficiency.score},
            {"safety", r.card.safety},
            {"accuracy", r.card.accuracy.applicable ? json(r.card.accuracy.score) : json(nullptr)}}},
          {"standardized", to_json(r.card.standardized)},
          {"clamp_warnings", clamp_warnings}};
}

}  // namespace

ConnectionStats serve_connection(const ServerConfig& config, int fd) {
  ConnectionStats stats;
  Connection conn(config, fd);

  // Handshake: hello in, scenario_summary out.
  SessionConfig session = config.session;
  session.scenario = with_defects_for_seed(config.session.scenario, config.session.seed);
  try {
    const auto line = conn.lines().next();
    if (!line) return stats;
    const WireMessage hello = decode(*line);
    if (hello.kind != WireKind::hello) throw ProtocolError("expected hello, got " + std::string(to_string(hello.kind)));
    if (hello.payload.value("v", -1) != kWireVersion) {
      throw ProtocolError("unsupported protocol version " + hello.payload.value("v", json(nullptr)).dump());
    }
  } catch (const ProtocolError& e) {
    send_all(fd, encode({WireKind::error, 1, error_payload("protocol", e.what())}));
    stats.protocol_error = true;
    return stats;
  }
  if (!send_all(fd, encode({WireKind::scenario_summary, 1, scenario_summary_payload(session.scenario)}))) return stats;
  stats.handshake_ok = true;

  if (session.repetition <= 0 && !session.practice) {
    session.repetition = next_repetition(load_history(config.data_root, session.participant));
  }
  const auto dir = participant_dir(config.data_root, session.participant);
  std::filesystem::create_directories(dir);
  const std::string stem =
      session.practice ? std::string("practice") : "session_" + std::to_string(session.repetition);
  const auto log_path = dir / (stem + ".log");

  conn.start(2);
  GatewayInput gateway(config, conn, session.scenario);
  SessionResult result;
  {
    std::ofstream log(log_path, std::ios::binary | std::ios::trunc);
    if (!log) throw Error("cannot write session log '" + log_path.string() + "'");
    SessionConfig run = session;
    run.mode = SessionMode::interactive;
    result = run_session(run, gateway, &log, &gateway);
  }
  result.outcome.log_path = log_path;
  stats.outcome = result.outcome;
  stats.clamp_warnings = conn.clamp_warnings.load();
  conn.state().push_drop_oldest({WireKind::session_end, session_end_payload(result, stats.clamp_warnings)});

  std::optional<QuestionnaireResponse> questionnaire;
  if (auto form = gateway.await_questionnaire()) {
    try {
      questionnaire = questionnaire_ingest(*form);
      stats.questionnaire_received = true;
    } catch (const ValidationError& e) {
      conn.state().push_drop_oldest({WireKind::error, error_payload("questionnaire", e.what())});
    }
  }

  ParticipantHistory history;
  if (!session.practice) {
    history = record_repetition(config.data_root, session.participant,
                                {session.repetition, log_path.filename().string(), result.outcome.reason,
                                 result.outcome.frames, result.card.standardized});
  }
  ReportInput input{session.participant, session.repetition, session.practice, &result, questionnaire,
                    session.practice ? nullptr : &history};
  const auto report_path = dir / (stem + "_report.json");
  write_report(report_path, emit_report(input));
  stats.report_path = report_path;
  conn.state().push_drop_oldest(
      {WireKind::report_ready, {{"path", report_path.string()}, {"standardized", to_json(result.card.standardized)}}});

  conn.finish();
  stats.protocol_error = conn.protocol_error();
  stats.dropped_state = conn.state().dropped();
  return stats;
}

Address parse_address(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error("address must look like host:port, got '" + std::string(text) + "'");
  }
  Address a;
  a.host = std::string(text.substr(0, colon));
  const std::string port(text.substr(colon + 1));
  char* end = nullptr;
  const long p = std::strtol(port.c_str(), &end, 10);
  if (port.empty() || *end != '\0' || p < 0 || p > 65535) throw Error("bad port in address '" + std::string(text) + "'");
  a.port = static_cast<std::uint16_t>(p);
  return a;
}

Address default_address() {
  const char* env = std::getenv(std::string(kAddressEnv).c_str());
  return parse_address(env != nullptr && *env != '\0' ? env : kDefaultAddress);
}

Server::Server(ServerConfig config, const Address& address) : config_(std::move(config)) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(address.port);
  const std::string host = address.host == "localhost" ? "127.0.0.1" : address.host;
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    throw Error("cannot parse IPv4 address '" + address.host + "'");
  }
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error(std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 1) != 0) {
    const std::string why = std::strerror(errno);
    ::close(listen_fd_);
    throw Error("cannot listen on " + address.host + ":" + std::to_string(address.port) + ": " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

Server::~Server() {
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void Server::run(int max_sessions) {
  int served = 0;
  while (!stop_ && (max_sessions <= 0 || served < max_sessions)) {
    pollfd p{listen_fd_, POLLIN, 0};
    const int ready = ::poll(&p, 1, 100);
    if (ready <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    ServerConfig cfg = config_;
    if (served > 0 && cfg.session.repetition > 0) cfg.session.repetition += served;
    try {
      serve_connection(cfg, fd);
    } catch (const Error&) {
      ::close(fd);
      throw;
    }
    ::close(fd);
    ++served;
  }
}

}  // namespace bridgesim
