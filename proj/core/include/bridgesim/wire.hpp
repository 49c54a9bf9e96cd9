#pragma once

// Cockpit wire protocol: newline-delimited JSON objects
//   {"kind": "<kind>", "seq": <n>, "payload": {...}}
// Sequence numbers start anywhere and strictly increase per direction. The
// client opens with hello {"v": 1}; the server answers with scenario_summary.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "bridgesim/dynamics.hpp"
#include "bridgesim/scenario.hpp"
#include "bridgesim/telemetry.hpp"
#include "bridgesim/traffic.hpp"

namespace bridgesim {

inline constexpr int kWireVersion = 1;

enum class WireKind { hello, scenario_summary, control, frame, feedback, hud, session_end, report_ready, error };
std::string_view to_string(WireKind k);
WireKind wire_kind_from(std::string_view s);  // throws ProtocolError

enum class Direction { client_to_server, server_to_client };

// hello and control go client to server; everything else server to client.
bool allowed(WireKind kind, Direction dir);

struct WireMessage {
  WireKind kind = WireKind::hello;
  std::uint64_t seq = 0;
  nlohmann::json payload = nlohmann::json::object();
  bool operator==(const WireMessage&) const = default;
};

// One line, terminated by '\n'.
std::string encode(const WireMessage& m);
// Accepts a line with or without the trailing newline. Throws ProtocolError.
WireMessage decode(std::string_view line);

// Enforces strictly increasing sequence numbers for one direction.
class SequenceCheck {
 public:
  void accept(std::uint64_t seq);  // throws ProtocolError

 private:
  std::optional<std::uint64_t> last_;
};

// Control payload: {"fb","rl","ud","rt": numbers, "light","snapshot": held
// booleans, optional "questionnaire": form}. Missing axes are 0.
struct ControlMessage {
  ControlInput held;
  int clamped_axes = 0;  // axis values outside [-1, 1] that were clamped
  std::optional<nlohmann::json> questionnaire;
};
ControlMessage parse_control(const nlohmann::json& payload);  // throws ProtocolError
nlohmann::json control_payload(const ControlInput& held);

nlohmann::json hello_payload();
nlohmann::json scenario_summary_payload(const ScenarioSpec& scenario);
nlohmann::json frame_payload(const FrameRecord& frame, const DroneState& state, const TrafficState& traffic,
                             const TrafficSpec& spec);
nlohmann::json hud_payload(const HudState& hud);
nlohmann::json feedback_payload(const FeedbackMessage& m);
nlohmann::json error_payload(std::string_view code, std::string_view detail);

}  // namespace bridgesim
