#pragma once

// Fixed-rate session loop: input source -> dynamics -> telemetry -> log.
// The inspection starts on the first upward command from the ground and ends
// on landing at the ground station, a traffic crash, an empty battery or when
// the input source gives out.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bridgesim/assessment.hpp"
#include "bridgesim/dynamics.hpp"
#include "bridgesim/scenario.hpp"
#include "bridgesim/session_log.hpp"
#include "bridgesim/telemetry.hpp"
#include "bridgesim/traffic.hpp"

namespace bridgesim {

enum class SessionMode { interactive, scripted, replay };
std::string_view to_string(SessionMode m);

struct SessionConfig {
  ScenarioSpec scenario;
  SessionMode mode = SessionMode::scripted;
  std::uint64_t seed = 0;
  std::string participant = "anonymous";
  int repetition = 1;
  bool practice = false;
};

// Landing: inside this horizontal radius of the ground station, below this
// altitude above it and slower than this, for kLandingFrames frames in a row.
inline constexpr double kLandingRadiusM = 3.0;
inline constexpr double kLandingAltitudeM = 0.2;
inline constexpr double kLandingSpeedMps = 0.2;
inline constexpr int kLandingFrames = 25;
// Landing only counts after the drone has been this high.
inline constexpr double kAirborneAltitudeM = 0.5;

// Supplies the held control state once per simulation tick. light/snapshot
// are "key is down"; the session turns them into press edges. An empty
// optional means the source is exhausted or failed.
class InputSource {
 public:
  virtual ~InputSource() = default;
  virtual std::optional<ControlInput> next(std::int64_t tick) = 0;
};

struct TimelineEntry {
  std::int64_t from = 0;  // inclusive tick
  std::int64_t to = 0;    // exclusive tick
  ControlInput held;
  bool operator==(const TimelineEntry&) const = default;
};

// Open-loop input timeline. Ticks not covered by an entry get zero input; the
// source is exhausted at `length`.
class ScriptedPilot : public InputSource {
 public:
  // Throws ValidationError("pilot.timeline") unless entries are sorted,
  // non-empty and non-overlapping.
  explicit ScriptedPilot(std::vector<TimelineEntry> entries, std::optional<std::int64_t> length = {});

  std::optional<ControlInput> next(std::int64_t tick) override;

  const std::vector<TimelineEntry>& entries() const { return entries_; }
  std::int64_t length() const { return length_; }

 private:
  std::vector<TimelineEntry> entries_;
  std::int64_t length_ = 0;
  std::size_t cursor_ = 0;
};

nlohmann::json pilot_to_json(const ScriptedPilot& pilot);
// Explicit {"timeline": [...]} documents only; see load_pilot() for plans.
ScriptedPilot pilot_from_json(const nlohmann::json& doc);

struct SessionOutcome {
  EndReason reason = EndReason::aborted;
  std::int64_t frames = 0;  // N
  std::optional<std::filesystem::path> log_path;
};

// Hooks for the gateway. Called from the session thread.
class SessionObserver {
 public:
  virtual ~SessionObserver() = default;
  virtual void on_frame(const TelemetryPipeline::Step& step, const DroneState& state, const TrafficState& traffic) = 0;
};

struct SessionResult {
  SessionOutcome outcome;
  ScenarioSpec scenario;  // defects placed for the session seed
  std::vector<FrameRecord> frames;
  std::vector<FeedbackMessage> messages;  // message onsets
  SessionAnalysis analysis;
  ScoreCard card;
};

// Runs until an end condition. When `log` is given the full session log is
// written to it.
SessionResult run_session(const SessionConfig& config, InputSource& input, std::ostream* log = nullptr,
                          SessionObserver* observer = nullptr);

struct ReplayMismatch {
  std::int64_t frame = 0;  // -1 for whole-log checks
  std::string field;
};

struct ReplayResult {
  LogHeader header;
  SessionResult result;
  std::vector<ReplayMismatch> mismatches;  // logged vs recomputed
};

// Recomputes telemetry and scores from the logged frames. Weights default to
// those stored in the log's scenario.
ReplayResult replay(const SessionLog& log, const std::optional<ScoringWeights>& weights = {});

}  // namespace bridgesim
