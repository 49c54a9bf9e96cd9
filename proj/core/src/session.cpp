#include "bridgesim/session.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "bridgesim/error.hpp"

namespace bridgesim {

std::string_view to_string(SessionMode m) {
  switch (m) {
    case SessionMode::interactive:
      return "interactive";
    case SessionMode::scripted:
      return "scripted";
    case SessionMode::replay:
      return "replay";
  }
  return "?";
}

ScriptedPilot::ScriptedPilot(std::vector<TimelineEntry> entries, std::optional<std::int64_t> length)
    : entries_(std::move(entries)) {
  std::int64_t last = 0;
  for (const auto& e : entries_) {
    if (e.from < last || e.to <= e.from) {
      throw ValidationError("pilot.timeline", "entries must be sorted, non-empty and non-overlapping (entry at tick " +
                                                  std::to_string(e.from) + ")");
    }
    last = e.to;
  }
  length_ = length.value_or(last);
  if (length_ < last) throw ValidationError("pilot.timeline", "length is shorter than the last entry");
}

std::optional<ControlInput> ScriptedPilot::next(std::int64_t tick) {
  if (tick < 0 || tick >= length_) return std::nullopt;
  if (cursor_ < entries_.size() && tick < entries_[cursor_].from) cursor_ = 0;
  while (cursor_ < entries_.size() && entries_[cursor_].to <= tick) ++cursor_;
  if (cursor_ < entries_.size() && entries_[cursor_].from <= tick) return entries_[cursor_].held;
  return ControlInput{};
}

nlohmann::json pilot_to_json(const ScriptedPilot& pilot) {
  nlohmann::json timeline = nlohmann::json::array();
  for (const auto& e : pilot.entries()) {
    nlohmann::json j = {{"from", e.from}, {"to", e.to}};
    if (e.held.fb != 0.0) j["fb"] = e.held.fb;
    if (e.held.rl != 0.0) j["rl"] = e.held.rl;
    if (e.held.ud != 0.0) j["ud"] = e.held.ud;
    if (e.held.rt != 0.0) j["rt"] = e.held.rt;
    if (e.held.light) j["light"] = true;
    if (e.held.snapshot) j["snapshot"] = true;
    timeline.push_back(std::move(j));
  }
  return {{"version", 1}, {"length", pilot.length()}, {"timeline", std::move(timeline)}};
}

ScriptedPilot pilot_from_json(const nlohmann::json& doc) {
  try {
    std::vector<TimelineEntry> entries;
    for (const auto& j : doc.at("timeline")) {
      TimelineEntry e;
      e.from = j.at("from").get<std::int64_t>();
      e.to = j.at("to").get<std::int64_t>();
      e.held.fb = j.value("fb", 0.0);
      e.held.rl = j.value("rl", 0.0);
      e.held.ud = j.value("ud", 0.0);
      e.held.rt = j.value("rt", 0.0);
      e.held.light = j.value("light", false);
      e.held.snapshot = j.value("snapshot", false);
      entries.push_back(e);
    }
    std::optional<std::int64_t> length;
    if (doc.contains("length")) length = doc.at("length").get<std::int64_t>();
    return ScriptedPilot(std::move(entries), length);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("pilot timeline: ") + e.what());
  }
}

namespace {

class LandingDetector {
 public:
  explicit LandingDetector(const Vec3& station) : station_(station) {}

  bool update(const DroneState& s) {
    const double altitude = s.position.z - station_.z;
    if (altitude > kAirborneAltitudeM) airborne_ = true;
    const double dx = s.position.x - station_.x;
    const double dy = s.position.y - station_.y;
    const bool settled = airborne_ && std::hypot(dx, dy) <= kLandingRadiusM && altitude < kLandingAltitudeM &&
                         s.speed() < kLandingSpeedMps;
    run_ = settled ? run_ + 1 : 0;
    return run_ >= kLandingFrames;
  }

 private:
  Vec3 station_;
  bool airborne_ = false;
  int run_ = 0;
};

void write_events(SessionLogWriter& w, const TelemetryPipeline::Step& s) {
  for (const auto& c : s.crashes) w.event(crash_to_json(c));
  if (s.snapshot) w.event(snapshot_to_json(*s.snapshot));
  for (const auto& m : s.new_messages) w.event(message_to_json(m));
}

std::vector<nlohmann::json> events_of(const TelemetryPipeline::Step& s) {
  std::vector<nlohmann::json> out;
  for (const auto& c : s.crashes) out.push_back(crash_to_json(c));
  if (s.snapshot) out.push_back(snapshot_to_json(*s.snapshot));
  for (const auto& m : s.new_messages) out.push_back(message_to_json(m));
  return out;
}

}  // namespace

SessionResult run_session(const SessionConfig& config, InputSource& input, std::ostream* log,
                          SessionObserver* observer) {
  SessionResult result;
  result.scenario = with_defects_for_seed(config.scenario, config.seed);
  const ScenarioSpec& sc = result.scenario;
  const double dt = 1.0 / sc.job.frame_rate_hz;

  std::optional<SessionLogWriter> writer;
  if (log != nullptr) {
    writer.emplace(*log);
    writer->header({config.participant, config.repetition, config.seed, config.practice, scenario_to_json(sc)});
  }

  TelemetryPipeline pipeline(sc);
  LandingDetector landing(sc.ground_station);
  DroneState state;
  state.position = sc.ground_station;
  state.battery_pct = sc.job.battery_capacity_pct;
  TrafficState traffic;
  ControlInput previous_held;
  bool started = false;
  std::int64_t frame = 0;
  EndReason reason = EndReason::aborted;

  for (std::int64_t tick = 0;; ++tick) {
    const std::optional<ControlInput> held = input.next(tick);
    if (!held) break;
    ControlInput in = held->clamped();
    in.light = held->light && !previous_held.light;
    in.snapshot = held->snapshot && !previous_held.snapshot;
    previous_held = *held;

    if (!started) {
      if (in.ud <= 0.0) continue;
      started = true;
      traffic = init_traffic(sc.traffic, config.seed);
    }

    DroneState proposed = drain_battery(step(state, in, sc.wind, dt, sc.drone), dt, sc.job);
    traffic = step_traffic(traffic, sc.traffic, dt);
    const CollisionReport collision = detect_collisions(proposed, sc, traffic);
    state = resolve_contact(state, proposed, collision);

    TelemetryPipeline::Step s = pipeline.process({frame, in, state, collision});
    if (writer) {
      writer->frame(s.frame);
      write_events(*writer, s);
    }
    for (const auto& m : s.new_messages) result.messages.push_back(m);
    if (observer != nullptr) observer->on_frame(s, state, traffic);
    ++frame;

    const bool landed = landing.update(state);
    if (s.terminal_crash) {
      reason = EndReason::crash_traffic;
      break;
    }
    if (static_cast<double>(frame) / sc.job.frame_rate_hz > sc.job.tau_max_s) {
      reason = EndReason::battery_exhausted;
      break;
    }
    if (landed) {
      reason = EndReason::landed_at_station;
      break;
    }
  }

  result.outcome.reason = reason;
  result.outcome.frames = frame;
  if (writer) writer->end({reason, frame});
  result.frames.assign(pipeline.frames().begin(), pipeline.frames().end());
  result.analysis = pipeline.finalize();
  result.card = score_session(result.frames, result.analysis, sc);
  return result;
}

ReplayResult replay(const SessionLog& log, const std::optional<ScoringWeights>& weights) {
  ReplayResult out;
  out.header = log.header;
  out.result.scenario = load_scenario(log.header.scenario.dump());
  const ScenarioSpec& sc = out.result.scenario;

  TelemetryPipeline pipeline(sc);
  std::vector<nlohmann::json> events;
  for (const auto& logged : log.frames) {
    TelemetryPipeline::Step s = pipeline.process(logged);
    if (s.frame.task != logged.task) out.mismatches.push_back({logged.index, "task"});
    if (s.frame.l_star_m != logged.l_star_m) out.mismatches.push_back({logged.index, "l"});
    if (s.frame.speeding != logged.speeding) out.mismatches.push_back({logged.index, "xs"});
    for (auto& e : events_of(s)) events.push_back(std::move(e));
    for (const auto& m : s.new_messages) out.result.messages.push_back(m);
  }
  if (events != log.events) out.mismatches.push_back({-1, "events"});

  out.result.frames.assign(pipeline.frames().begin(), pipeline.frames().end());
  out.result.analysis = pipeline.finalize();
  out.result.outcome.reason = log.end.reason;
  out.result.outcome.frames = log.end.frames;

  const EventLedger& ledger = out.result.analysis.ledger;
  if ((log.end.reason == EndReason::crash_traffic) != (ledger.human || ledger.vehicle)) {
    out.mismatches.push_back({-1, "reason"});
  }
  if ((log.end.reason == EndReason::battery_exhausted) != ledger.battery_failed) {
    out.mismatches.push_back({-1, "reason"});
  }

  out.result.card = score_session(out.result.frames, out.result.analysis, sc, weights.value_or(sc.job.weights));
  return out;
}

}  // namespace bridgesim
