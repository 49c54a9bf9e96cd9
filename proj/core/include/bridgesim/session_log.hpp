#pragma once

// Newline-delimited JSON session log. Line 1 is a header embedding the
// normalized scenario, then one record per frame with event records
// (snapshot, crash, message) interleaved after the frame that produced them,
// and a closing "end" record. Doubles are written in shortest round-trip form
// so a log replays bit-exactly.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "bridgesim/scenario.hpp"
#include "bridgesim/telemetry.hpp"

namespace bridgesim {

inline constexpr std::string_view kLogFormat = "bridgesim-session-log";
inline constexpr int kLogVersion = 1;

enum class EndReason { landed_at_station, crash_traffic, battery_exhausted, aborted };
std::string_view to_string(EndReason r);
EndReason end_reason_from(std::string_view s);

struct LogHeader {
  std::string participant;
  int repetition = 0;
  std::uint64_t seed = 0;
  bool practice = false;
  nlohmann::json scenario;  // normalized scenario document
};

struct LogEnd {
  EndReason reason = EndReason::aborted;
  std::int64_t frames = 0;
};

nlohmann::json frame_to_json(const FrameRecord& f);
FrameRecord frame_from_json(const nlohmann::json& j);
nlohmann::json snapshot_to_json(const SnapshotRecord& s);
nlohmann::json crash_to_json(const CrashRecord& c);
nlohmann::json message_to_json(const FeedbackMessage& m);

class SessionLogWriter {
 public:
  explicit SessionLogWriter(std::ostream& out) : out_(&out) {}

  void header(const LogHeader& h);
  void frame(const FrameRecord& f);
  void event(const nlohmann::json& record);
  void end(const LogEnd& e);

 private:
  void line(const nlohmann::json& j);
  std::ostream* out_;
};

struct SessionLog {
  LogHeader header;
  std::vector<FrameRecord> frames;
  std::vector<nlohmann::json> events;  // snapshot / crash / message records in file order
  LogEnd end;
};

// Throws TruncatedLogError (with the byte offset of the incomplete record),
// VersionMismatchError, or LogError for malformed records.
SessionLog parse_session_log(std::string_view bytes);
SessionLog read_session_log(const std::filesystem::path& path);

}  // namespace bridgesim
