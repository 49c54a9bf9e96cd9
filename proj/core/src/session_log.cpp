#include "bridgesim/session_log.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "bridgesim/error.hpp"

namespace bridgesim {
namespace {

using nlohmann::json;

json vec(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

json opt_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json clearance_to_json(double c) { return std::isinf(c) ? json(nullptr) : json(c); }
double clearance_from(const json& j) { return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>(); }

}  // namespace

std::string_view to_string(EndReason r) {
  switch (r) {
    case EndReason::landed_at_station:
      return "landed_at_station";
    case EndReason::crash_traffic:
      return "crash_traffic";
    case EndReason::battery_exhausted:
      return "battery_exhausted";
    case EndReason::aborted:
      return "aborted";
  }
  return "?";
}

EndReason end_reason_from(std::string_view s) {
  if (s == "landed_at_station") return EndReason::landed_at_station;
  if (s == "crash_traffic") return EndReason::crash_traffic;
  if (s == "battery_exhausted") return EndReason::battery_exhausted;
  if (s == "aborted") return EndReason::aborted;
  throw ParseError("unknown end reason '" + std::string(s) + "'");
}

json frame_to_json(const FrameRecord& f) {
  const auto& o = f.input;
  json other = nullptr;
  if (f.collision.other) other = {{"id", f.collision.other->id}, {"kind", f.collision.other->kind}};
  return {{"t", "frame"},
          {"i", f.index},
          {"o", json::array({o.fb, o.rl, o.ud, o.rt, o.light, o.snapshot})},
          {"d", json::array({f.position.x, f.position.y, f.position.z, f.speed_mps, f.battery_pct})},
          {"yaw", f.yaw},
          {"light", f.light_on},
          {"task", f.task ? json(*f.task) : json(nullptr)},
          {"l", opt_number(f.l_star_m)},
          {"xs", f.speeding},
          {"c",
           {{"h", f.collision.human},
            {"v", f.collision.vehicle},
            {"o", other},
            {"clr", clearance_to_json(f.collision.min_clearance_m)}}}};
}

FrameRecord frame_from_json(const json& j) {
  FrameRecord f;
  f.index = j.at("i").get<std::int64_t>();
  const json& o = j.at("o");
  f.input = {o.at(0).get<double>(), o.at(1).get<double>(), o.at(2).get<double>(),
             o.at(3).get<double>(), o.at(4).get<bool>(),   o.at(5).get<bool>()};
  const json& d = j.at("d");
  f.position = {d.at(0).get<double>(), d.at(1).get<double>(), d.at(2).get<double>()};
  f.speed_mps = d.at(3).get<double>();
  f.battery_pct = d.at(4).get<double>();
  f.yaw = j.at("yaw").get<double>();
  f.light_on = j.at("light").get<bool>();
  if (!j.at("task").is_null()) f.task = j.at("task").get<int>();
  if (!j.at("l").is_null()) f.l_star_m = j.at("l").get<double>();
  f.speeding = j.at("xs").get<bool>();
  const json& c = j.at("c");
  f.collision.human = c.at("h").get<bool>();
  f.collision.vehicle = c.at("v").get<bool>();
  if (!c.at("o").is_null()) {
    f.collision.other = ContactObject{c.at("o").at("id").get<std::string>(), c.at("o").at("kind").get<std::string>()};
  }
  f.collision.min_clearance_m = clearance_from(c.at("clr"));
  return f;
}

json snapshot_to_json(const SnapshotRecord& s) {
  return {{"t", "snapshot"}, {"i", s.frame},         {"pos", vec(s.position)},
          {"yaw", s.yaw},    {"visible", s.visible}, {"credited", s.credited}};
}

json crash_to_json(const CrashRecord& c) {
  return {{"t", "crash"}, {"i", c.frame}, {"kind", c.kind}, {"object", c.object}};
}

json message_to_json(const FeedbackMessage& m) {
  return {{"t", "message"}, {"i", m.frame}, {"kind", std::string(to_string(m.kind))}, {"text", m.text}};
}

void SessionLogWriter::line(const json& j) { *out_ << j.dump() << '\n'; }

void SessionLogWriter::header(const LogHeader& h) {
  line({{"t", "header"},
        {"format", kLogFormat},
        {"version", kLogVersion},
        {"participant", h.participant},
        {"repetition", h.repetition},
        {"seed", h.seed},
        {"practice", h.practice},
        {"scenario", h.scenario}});
}

void SessionLogWriter::frame(const FrameRecord& f) { line(frame_to_json(f)); }
void SessionLogWriter::event(const json& record) { line(record); }

void SessionLogWriter::end(const LogEnd& e) {
  line({{"t", "end"}, {"reason", std::string(to_string(e.reason))}, {"frames", e.frames}});
  out_->flush();
}

SessionLog parse_session_log(std::string_view bytes) {
  SessionLog log;
  bool have_header = false;
  bool have_end = false;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) throw TruncatedLogError(pos);
    const std::string_view text = bytes.substr(pos, nl - pos);
    const std::size_t offset = pos;
    pos = nl + 1;
    if (have_end) throw LogError("record after end of log at byte offset " + std::to_string(offset));

    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error&) {
      if (pos >= bytes.size()) throw TruncatedLogError(offset);
      throw LogError("malformed log record at byte offset " + std::to_string(offset));
    }

    try {
      const std::string type = j.at("t").get<std::string>();
      if (!have_header) {
        if (type != "header") throw LogError("session log must start with a header record");
        if (j.value("format", std::string()) != kLogFormat) throw VersionMismatchError("not a bridgesim session log");
        const int version = j.at("version").get<int>();
        if (version != kLogVersion) {
          throw VersionMismatchError("session log version " + std::to_string(version) + " is not supported (expected " +
                                     std::to_string(kLogVersion) + ")");
        }
        log.header.participant = j.at("participant").get<std::string>();
        log.header.repetition = j.at("repetition").get<int>();
        log.header.seed = j.at("seed").get<std::uint64_t>();
        log.header.practice = j.at("practice").get<bool>();
        log.header.scenario = j.at("scenario");
        have_header = true;
      } else if (type == "frame") {
        log.frames.push_back(frame_from_json(j));
      } else if (type == "end") {
        log.end.reason = end_reason_from(j.at("reason").get<std::string>());
        log.end.frames = j.at("frames").get<std::int64_t>();
        have_end = true;
      } else if (type == "snapshot" || type == "crash" || type == "message") {
        log.events.push_back(std::move(j));
      } else {
        throw LogError("unknown record type '" + type + "' at byte offset " + std::to_string(offset));
      }
    } catch (const json::exception& e) {
      throw LogError("bad log record at byte offset " + std::to_string(offset) + ": " + e.what());
    }
  }
  if (!have_end) throw TruncatedLogError(bytes.size());
  if (static_cast<std::int64_t>(log.frames.size()) != log.end.frames) {
    throw LogError("end record reports " + std::to_string(log.end.frames) + " frames but the log holds " +
                   std::to_string(log.frames.size()));
  }
  return log;
}

SessionLog read_session_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open session log '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_session_log(buf.str());
}

}  // namespace bridgesim
