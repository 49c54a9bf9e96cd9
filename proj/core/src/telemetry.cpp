#include "bridgesim/telemetry.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

#include "bridgesim/error.hpp"

namespace bridgesim {
namespace {

std::string format(const char* fmt, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

FeedbackMessage make_message(MessageKind kind, std::string text, std::int64_t frame) {
  return FeedbackMessage{kind, std::move(text), frame};
}

double speed_limit_for(int task, std::span<const TaskSpec> tasks) {
  for (const auto& t : tasks) {
    if (t.id == task) return t.speed_limit_mps;
  }
  return std::numeric_limits<double>::infinity();
}

bool other_rising(const FrameRecord& frame, const FrameRecord* previous) {
  return frame.collision.other.has_value() && (previous == nullptr || !previous->collision.other.has_value());
}

bool contact_rising(const FrameRecord& frame, const FrameRecord* previous) {
  if (previous == nullptr) return frame.collision.any_contact();
  return (frame.collision.human && !previous->collision.human) ||
         (frame.collision.vehicle && !previous->collision.vehicle) || other_rising(frame, previous);
}

// Crash records produced by one frame given the running sticky flags.
std::vector<CrashRecord> crash_edges(const FrameRecord& frame, const FrameRecord* previous, bool& human_seen,
                                     bool& vehicle_seen) {
  std::vector<CrashRecord> out;
  if (frame.collision.human && !human_seen) {
    human_seen = true;
    out.push_back({frame.index, "human", "human", std::nullopt});
  }
  if (frame.collision.vehicle && !vehicle_seen) {
    vehicle_seen = true;
    out.push_back({frame.index, "vehicle", "vehicle", std::nullopt});
  }
  if (other_rising(frame, previous)) {
    out.push_back({frame.index, frame.collision.other->kind, frame.collision.other->id, std::nullopt});
  }
  return out;
}

std::vector<bool> final_speeding(std::span<const FrameRecord> frames, std::span<const TaskWindow> windows,
                                 std::span<const TaskSpec> tasks) {
  std::vector<bool> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(speeding_flag(f, windows, tasks));
  return out;
}

}  // namespace

OnPathResult on_path(const TaskSpec& task, const Vec3& position) {
  const auto& pts = task.reference_points;
  OnPathResult r;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < pts.size(); ++n) {
    const double d = distance(position, pts[n]);
    if (d < best) {
      best = d;
      r.nearest_point = n;
    }
  }
  const std::size_t n = r.nearest_point;
  double l = std::numeric_limits<double>::infinity();
  if (n > 0) l = std::min(l, point_segment_distance(position, pts[n - 1], pts[n]));
  if (n + 1 < pts.size()) l = std::min(l, point_segment_distance(position, pts[n], pts[n + 1]));
  if (pts.size() < 2) l = best;
  r.l_star_m = l;
  r.on_path = l <= task.corridor_threshold_m;
  return r;
}

TaskAssignment assign_task(std::span<const TaskSpec> tasks, const Vec3& position) {
  TaskAssignment a;
  double best_on = std::numeric_limits<double>::infinity();
  double best_any = std::numeric_limits<double>::infinity();
  for (const auto& t : tasks) {
    const OnPathResult r = on_path(t, position);
    if (r.l_star_m < best_any || (r.l_star_m == best_any && a.nearest && t.id < *a.nearest)) {
      best_any = r.l_star_m;
      a.nearest = t.id;
      a.l_star_m = r.l_star_m;
    }
    if (r.on_path && (r.l_star_m < best_on || (r.l_star_m == best_on && a.task && t.id < *a.task))) {
      best_on = r.l_star_m;
      a.task = t.id;
    }
  }
  return a;
}

std::vector<TaskWindow> task_windows(std::span<const FrameRecord> frames, int task_count) {
  std::vector<TaskWindow> windows(static_cast<std::size_t>(std::max(task_count, 0)));
  for (int t = 0; t < task_count; ++t) windows[static_cast<std::size_t>(t)].task = t + 1;
  for (const auto& f : frames) {
    if (!f.task || *f.task < 1 || *f.task > task_count) continue;
    TaskWindow& w = windows[static_cast<std::size_t>(*f.task - 1)];
    if (!w.entered) {
      w.entered = true;
      w.start = f.index;
    }
    w.end = f.index;
  }
  return windows;
}

bool speeding_flag(const FrameRecord& frame, std::span<const TaskWindow> windows, std::span<const TaskSpec> tasks) {
  double limit = std::numeric_limits<double>::infinity();
  for (const auto& w : windows) {
    if (w.contains(frame.index)) limit = std::min(limit, speed_limit_for(w.task, tasks));
  }
  return frame.speed_mps > limit;
}

bool speeding_flag(const FrameRecord& frame, std::span<const TaskWindow> windows, double speed_limit_mps) {
  const bool inside = std::any_of(windows.begin(), windows.end(), [&](const TaskWindow& w) { return w.contains(frame.index); });
  return inside && frame.speed_mps > speed_limit_mps;
}

CrashSummary record_crashes(std::span<const FrameRecord> frames) {
  CrashSummary s;
  const FrameRecord* previous = nullptr;
  for (const auto& f : frames) {
    for (auto& r : crash_edges(f, previous, s.human, s.vehicle)) {
      if (r.kind != "human" && r.kind != "vehicle") ++s.other_count;
      s.records.push_back(std::move(r));
    }
    previous = &f;
  }
  return s;
}

void attribute_crashes(std::vector<CrashRecord>& records, std::span<const TaskWindow> windows) {
  for (auto& r : records) {
    r.task.reset();
    for (const auto& w : windows) {
      if (w.contains(r.frame)) {
        r.task = w.task;
        break;
      }
    }
  }
}

SnapshotRecord record_snapshot(const FrameRecord& frame, std::span<const DefectSpec> defects,
                               std::set<std::string>& already_detected, const JobSpec& job) {
  SnapshotRecord s;
  s.frame = frame.index;
  s.position = frame.position;
  s.yaw = frame.yaw;
  DroneState pose;
  pose.position = frame.position;
  pose.yaw = frame.yaw;
  const DefectSpec* best = nullptr;
  double best_d = 0.0;
  for (const auto& d : defects) {
    if (!camera_sees(pose, d, job)) continue;
    s.visible.push_back(d.id);
    if (already_detected.contains(d.id)) continue;
    const double dist = distance(d.position, frame.position);
    if (best == nullptr || dist < best_d) {
      best = &d;
      best_d = dist;
    }
  }
  if (best != nullptr) {
    already_detected.insert(best->id);
    s.credited.push_back(best->id);
  }
  return s;
}

SessionAnalysis analyze_frames(std::span<const FrameRecord> frames, const ScenarioSpec& scenario) {
  std::vector<FrameRecord> assigned(frames.begin(), frames.end());
  for (auto& f : assigned) f.task = assign_task(scenario.tasks, f.position).task;

  SessionAnalysis a;
  a.frame_count = static_cast<std::int64_t>(frames.size());
  a.frame_rate_hz = scenario.job.frame_rate_hz;
  a.windows = task_windows(assigned, scenario.task_count());
  a.speeding = final_speeding(assigned, a.windows, scenario.tasks);

  CrashSummary crashes = record_crashes(assigned);
  attribute_crashes(crashes.records, a.windows);
  a.ledger.human = crashes.human;
  a.ledger.vehicle = crashes.vehicle;
  a.ledger.other_count = crashes.other_count;
  a.ledger.crashes = std::move(crashes.records);

  std::set<std::string> detected;
  for (const auto& f : assigned) {
    if (!f.input.snapshot) continue;
    a.ledger.snapshots.push_back(record_snapshot(f, scenario.defects, detected, scenario.job));
    ++a.ledger.snapshots_taken;
    a.ledger.true_detections += static_cast<int>(a.ledger.snapshots.back().credited.size());
  }
  a.ledger.defect_count = static_cast<int>(scenario.defects.size());
  a.ledger.battery_failed = static_cast<double>(a.frame_count) / scenario.job.frame_rate_hz > scenario.job.tau_max_s;
  return a;
}

std::string_view to_string(BatteryColor c) {
  switch (c) {
    case BatteryColor::green:
      return "green";
    case BatteryColor::yellow:
      return "yellow";
    case BatteryColor::red:
      return "red";
  }
  return "?";
}

BatteryColor battery_color(double battery_pct) {
  if (battery_pct >= 70.0) return BatteryColor::green;
  if (battery_pct >= 30.0) return BatteryColor::yellow;
  return BatteryColor::red;
}

std::string_view to_string(MessageKind k) {
  switch (k) {
    case MessageKind::speeding:
      return "speeding";
    case MessageKind::distance_reminder:
      return "distance_reminder";
    case MessageKind::proximity_or_crash:
      return "proximity_or_crash";
  }
  return "?";
}

MessageKind message_kind_from(std::string_view s) {
  if (s == "speeding") return MessageKind::speeding;
  if (s == "distance_reminder") return MessageKind::distance_reminder;
  if (s == "proximity_or_crash") return MessageKind::proximity_or_crash;
  throw ParseError("unknown message kind '" + std::string(s) + "'");
}

FeedbackTick feedback_tick(const FrameRecord& frame, const TaskAssignment& assignment, const ScenarioSpec& scenario,
                           bool contact_rising_edge) {
  const JobSpec& job = scenario.job;
  FeedbackTick tick;
  tick.hud.battery_pct = frame.battery_pct;
  tick.hud.color = battery_color(frame.battery_pct);
  tick.hud.flashing = frame.battery_pct < 30.0;
  tick.hud.speed_mps = frame.speed_mps;

  if (frame.speeding) {
    const double limit = frame.task ? speed_limit_for(*frame.task, scenario.tasks) : 0.0;
    tick.messages.push_back(make_message(
        MessageKind::speeding,
        format("Slow down: %.1f m/s is above the %.1f m/s inspection speed limit", frame.speed_mps, limit),
        frame.index));
  }
  if (!assignment.task && assignment.l_star_m && *assignment.l_star_m <= job.distance_reminder_m) {
    const TaskSpec* t = scenario.find_task(*assignment.nearest);
    std::string text = "Task " + std::to_string(*assignment.nearest) + ": back to the reference path";
    if (t != nullptr) {
      text += format(", keep %g-%g m from the structure", t->recommended_distance.min_m, t->recommended_distance.max_m);
    }
    tick.messages.push_back(make_message(MessageKind::distance_reminder, std::move(text), frame.index));
  }
  if (contact_rising_edge) {
    std::string what = frame.collision.human     ? "a person"
                       : frame.collision.vehicle ? "a vehicle"
                       : frame.collision.other   ? "the " + frame.collision.other->kind
                                                 : "an object";
    tick.messages.push_back(make_message(MessageKind::proximity_or_crash, "Crash: the drone hit " + what, frame.index));
  } else if (frame.collision.min_clearance_m <= job.proximity_warning_m) {
    tick.messages.push_back(make_message(
        MessageKind::proximity_or_crash,
        format("Caution: object %.1f m away (warning distance %.1f m)", frame.collision.min_clearance_m,
               job.proximity_warning_m),
        frame.index));
  }
  return tick;
}

TelemetryPipeline::TelemetryPipeline(const ScenarioSpec& scenario) : scenario_(&scenario) {
  windows_ = task_windows({}, scenario.task_count());
  ledger_.defect_count = static_cast<int>(scenario.defects.size());
}

TelemetryPipeline::Step TelemetryPipeline::process(const Raw& raw) {
  FrameRecord f;
  f.index = raw.index;
  f.input = raw.input;
  f.position = raw.state.position;
  f.speed_mps = raw.state.speed();
  f.battery_pct = raw.state.battery_pct;
  f.yaw = raw.state.yaw;
  f.light_on = raw.state.light_on;
  f.collision = raw.collision;
  return process_frame(std::move(f));
}

TelemetryPipeline::Step TelemetryPipeline::process(const FrameRecord& logged) {
  FrameRecord f = logged;
  f.task.reset();
  f.l_star_m.reset();
  f.speeding = false;
  return process_frame(std::move(f));
}

TelemetryPipeline::Step TelemetryPipeline::process_frame(FrameRecord f) {
  const ScenarioSpec& sc = *scenario_;
  if (!frames_.empty() && f.index != frames_.back().index + 1) {
    throw Error("frame indices must increase by one; got " + std::to_string(f.index) + " after " +
                std::to_string(frames_.back().index));
  }
  if (frames_.empty() && f.index != 0) throw Error("first frame index must be 0");

  const TaskAssignment assignment = assign_task(sc.tasks, f.position);
  f.task = assignment.task;
  f.l_star_m = assignment.l_star_m;
  f.speeding = f.task.has_value() && f.speed_mps > speed_limit_for(*f.task, sc.tasks);

  if (f.task) {
    TaskWindow& w = windows_[static_cast<std::size_t>(*f.task - 1)];
    if (!w.entered) {
      w.entered = true;
      w.start = f.index;
    }
    w.end = f.index;
  }

  Step out;
  const FrameRecord* prev = previous_ ? &*previous_ : nullptr;
  out.crashes = crash_edges(f, prev, ledger_.human, ledger_.vehicle);
  for (const auto& c : out.crashes) {
    if (c.kind != "human" && c.kind != "vehicle") ++ledger_.other_count;
    ledger_.crashes.push_back(c);
  }
  out.terminal_crash = f.collision.human || f.collision.vehicle;

  if (f.input.snapshot) {
    out.snapshot = record_snapshot(f, sc.defects, detected_, sc.job);
    ++ledger_.snapshots_taken;
    ledger_.true_detections += static_cast<int>(out.snapshot->credited.size());
    ledger_.snapshots.push_back(*out.snapshot);
  }

  out.feedback = feedback_tick(f, assignment, sc, contact_rising(f, prev));
  std::set<MessageKind> now;
  for (const auto& m : out.feedback.messages) {
    now.insert(m.kind);
    if (!active_.contains(m.kind)) out.new_messages.push_back(m);
  }
  active_ = std::move(now);

  out.frame = f;
  frames_.push_back(f);
  previous_ = std::move(f);
  return out;
}

SessionAnalysis TelemetryPipeline::finalize() const {
  SessionAnalysis a;
  a.frame_count = static_cast<std::int64_t>(frames_.size());
  a.frame_rate_hz = scenario_->job.frame_rate_hz;
  a.windows = windows_;
  a.speeding = final_speeding(frames_, windows_, scenario_->tasks);
  a.ledger = ledger_;
  attribute_crashes(a.ledger.crashes, a.windows);
  a.ledger.battery_failed =
      static_cast<double>(a.frame_count) / scenario_->job.frame_rate_hz > scenario_->job.tau_max_s;
  return a;
}

}  // namespace bridgesim
