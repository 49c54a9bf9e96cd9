#pragma once

// Frame-stream analysis: on-path tests against task reference paths, task
// windows, speeding, crash edges, snapshot crediting and in-task feedback.
// The streaming pipeline and the batch analysis produce identical ledgers.

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "bridgesim/dynamics.hpp"
#include "bridgesim/scenario.hpp"

namespace bridgesim {

struct OnPathResult {
  bool on_path = false;
  double l_star_m = 0.0;
  std::size_t nearest_point = 0;  // 0-based index of the closest reference point
};

// Closest reference point first (ties to the lower index), then the distance
// to the one or two path segments touching it, then the corridor test l* <= threshold.
// Only segments adjacent to the closest point are searched, so a strongly
// folded path can report a larger l* than the true polyline distance.
OnPathResult on_path(const TaskSpec& task, const Vec3& position);

struct TaskAssignment {
  std::optional<int> task;     // the single task the frame counts toward
  std::optional<int> nearest;  // task with the smallest l*
  std::optional<double> l_star_m;  // l* of `nearest`
};

// Among tasks whose corridor contains the point, picks the smallest l*, then
// the smallest task id.
TaskAssignment assign_task(std::span<const TaskSpec> tasks, const Vec3& position);

struct FrameRecord {
  std::int64_t index = 0;
  ControlInput input;  // light/snapshot are press edges
  Vec3 position;
  double speed_mps = 0.0;
  double battery_pct = 0.0;
  double yaw = 0.0;
  bool light_on = false;
  std::optional<int> task;
  std::optional<double> l_star_m;
  bool speeding = false;  // causal flag shown live; see SessionAnalysis::speeding
  CollisionReport collision;

  bool operator==(const FrameRecord&) const = default;
};

struct TaskWindow {
  int task = 0;
  std::int64_t start = 0;  // first frame assigned to the task
  std::int64_t end = -1;   // last frame assigned to the task
  bool entered = false;

  bool contains(std::int64_t i) const { return entered && i >= start && i <= end; }
  std::int64_t length() const { return entered ? end - start + 1 : 0; }
  bool operator==(const TaskWindow&) const = default;
};

// One window per task id 1..task_count, built from each frame's `task`.
std::vector<TaskWindow> task_windows(std::span<const FrameRecord> frames, int task_count);

// v > limit inside the union of entered windows. The limit is the smallest
// speed limit among the windows containing the frame.
bool speeding_flag(const FrameRecord& frame, std::span<const TaskWindow> windows, std::span<const TaskSpec> tasks);
bool speeding_flag(const FrameRecord& frame, std::span<const TaskWindow> windows, double speed_limit_mps);

struct CrashRecord {
  std::int64_t frame = 0;
  std::string kind;    // "human", "vehicle" or the element kind
  std::string object;  // element id or agent kind
  std::optional<int> task;  // nullopt: transit

  bool operator==(const CrashRecord&) const = default;
};

struct CrashSummary {
  bool human = false;
  bool vehicle = false;
  int other_count = 0;
  std::vector<CrashRecord> records;  // unattributed
};

// Human/vehicle are sticky booleans (one record each, first contact). Other
// contacts count rising edges; contact on the first frame is an edge.
CrashSummary record_crashes(std::span<const FrameRecord> frames);

// Sets CrashRecord::task from the final windows.
void attribute_crashes(std::vector<CrashRecord>& records, std::span<const TaskWindow> windows);

struct SnapshotRecord {
  std::int64_t frame = 0;
  Vec3 position;
  double yaw = 0.0;
  std::vector<std::string> visible;   // defects in the frustum
  std::vector<std::string> credited;  // zero or one first-time detection

  bool true_detection() const { return !credited.empty(); }
  bool operator==(const SnapshotRecord&) const = default;
};

// A defect is credited once. Each snapshot credits at most one defect, the
// closest visible one not yet detected (ties to scenario order), so
// true detections never exceed snapshots taken.
SnapshotRecord record_snapshot(const FrameRecord& frame, std::span<const DefectSpec> defects,
                               std::set<std::string>& already_detected, const JobSpec& job);

struct EventLedger {
  bool human = false;
  bool vehicle = false;
  int other_count = 0;
  std::vector<CrashRecord> crashes;
  std::vector<SnapshotRecord> snapshots;
  int snapshots_taken = 0;   // X_pd
  int true_detections = 0;   // X_td
  int defect_count = 0;      // X_d
  bool battery_failed = false;

  bool operator==(const EventLedger&) const = default;
};

struct SessionAnalysis {
  std::vector<TaskWindow> windows;
  std::vector<bool> speeding;  // retrospective flag per frame, from closed windows
  EventLedger ledger;
  std::int64_t frame_count = 0;
  double frame_rate_hz = 0.0;

  bool operator==(const SessionAnalysis&) const = default;
};

// Recomputes everything from positions, speeds, inputs and contact flags.
SessionAnalysis analyze_frames(std::span<const FrameRecord> frames, const ScenarioSpec& scenario);

enum class BatteryColor { green, yellow, red };
std::string_view to_string(BatteryColor c);
BatteryColor battery_color(double battery_pct);  // green >= 70, yellow [30,70), red < 30

struct HudState {
  double battery_pct = 0.0;
  BatteryColor color = BatteryColor::green;
  bool flashing = false;
  double speed_mps = 0.0;

  bool operator==(const HudState&) const = default;
};

enum class MessageKind { speeding, distance_reminder, proximity_or_crash };
std::string_view to_string(MessageKind k);
MessageKind message_kind_from(std::string_view s);

struct FeedbackMessage {
  MessageKind kind = MessageKind::speeding;
  std::string text;
  std::int64_t frame = 0;

  bool operator==(const FeedbackMessage&) const = default;
};

struct FeedbackTick {
  HudState hud;
  std::vector<FeedbackMessage> messages;
};

// contact_rising: any contact flag went from false to non-false this frame.
FeedbackTick feedback_tick(const FrameRecord& frame, const TaskAssignment& assignment, const ScenarioSpec& scenario,
                           bool contact_rising);

// Incremental analysis over a live frame stream.
class TelemetryPipeline {
 public:
  explicit TelemetryPipeline(const ScenarioSpec& scenario);

  struct Raw {
    std::int64_t index = 0;
    ControlInput input;
    DroneState state;
    CollisionReport collision;
  };

  struct Step {
    FrameRecord frame;
    FeedbackTick feedback;
    std::vector<FeedbackMessage> new_messages;  // kinds that just became active
    std::optional<SnapshotRecord> snapshot;
    std::vector<CrashRecord> crashes;  // contact edges on this frame
    bool terminal_crash = false;       // human or vehicle contact
  };

  Step process(const Raw& raw);
  // Same as process() but takes a logged frame (used by replay).
  Step process(const FrameRecord& logged);

  SessionAnalysis finalize() const;
  std::span<const FrameRecord> frames() const { return frames_; }
  const EventLedger& provisional_ledger() const { return ledger_; }

 private:
  Step process_frame(FrameRecord frame);

  const ScenarioSpec* scenario_;
  std::vector<FrameRecord> frames_;
  EventLedger ledger_;
  std::set<std::string> detected_;
  std::optional<FrameRecord> previous_;
  std::set<MessageKind> active_;
  std::vector<TaskWindow> windows_;
};

}  // namespace bridgesim
