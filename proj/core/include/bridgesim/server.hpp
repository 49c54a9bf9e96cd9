#pragma once

// Session gateway for the cockpit UI. One connection drives one session; the
// session loop never waits on the client: state updates go through a bounded
// queue that drops the oldest entry when the client falls behind.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "bridgesim/session.hpp"

namespace bridgesim {

inline constexpr std::string_view kAddressEnv = "BRIDGESIM_ADDR";
inline constexpr std::string_view kDefaultAddress = "127.0.0.1:7878";

struct ServerConfig {
  SessionConfig session;  // repetition 0 picks the participant's next one
  std::filesystem::path data_root = "sessions";
  int decimation = 2;            // frame/hud every n-th frame
  double speedup = 1.0;          // simulated seconds per wall second; 0 runs unpaced
  bool lockstep = false;         // advance one frame per control message
  double disconnect_grace_s = 5.0;  // simulated time flown on zero input after a disconnect
  std::chrono::milliseconds questionnaire_wait{30'000};
  std::size_t control_capacity = 1024;
  std::size_t state_capacity = 256;
};

struct ConnectionStats {
  SessionOutcome outcome;
  bool handshake_ok = false;
  bool protocol_error = false;
  int clamp_warnings = 0;
  std::uint64_t dropped_state = 0;
  bool questionnaire_received = false;
  std::optional<std::filesystem::path> report_path;
};

// Runs one session over an already connected stream socket. The caller owns
// and closes fd.
ConnectionStats serve_connection(const ServerConfig& config, int fd);

struct Address {
  std::string host;
  std::uint16_t port = 0;
};

// "host:port". Throws Error.
Address parse_address(std::string_view text);
// $BRIDGESIM_ADDR or 127.0.0.1:7878.
Address default_address();

class Server {
 public:
  // Binds and listens; throws Error on failure. Port 0 picks a free port.
  Server(ServerConfig config, const Address& address);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const { return port_; }

  // Serves connections one after another until stop() or max_sessions (0 for
  // no limit) have been served.
  void run(int max_sessions = 0);
  void stop() { stop_ = true; }

 private:
  ServerConfig config_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stop_{false};
};

}  // namespace bridgesim
