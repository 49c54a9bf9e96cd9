#include "bridgesim/history.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "bridgesim/error.hpp"

namespace bridgesim {
namespace {

using nlohmann::json;

constexpr const char* kHistoryFile = "history.json";

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void check_participant(const std::string& participant) {
  if (participant.empty() || participant == "." || participant == ".." ||
      participant.find_first_of("/\\") != std::string::npos) {
    throw ValidationError("participant.id", "'" + participant + "' cannot be used as a directory name");
  }
}

}  // namespace

std::optional<double> percent_change(double old_value, double new_value) {
  if (old_value == 0.0) return std::nullopt;
  return (new_value - old_value) / std::abs(old_value) * 100.0;
}

json to_json(const Standardized& s) {
  return {{"conformity", s.conformity},
          {"efficiency", s.efficiency},
          {"safety", s.safety},
          {"accuracy", optional_number(s.accuracy)}};
}

Standardized standardized_from_json(const json& j) {
  Standardized s;
  s.conformity = j.at("conformity").get<double>();
  s.efficiency = j.at("efficiency").get<double>();
  s.safety = j.at("safety").get<double>();
  if (j.contains("accuracy") && !j.at("accuracy").is_null()) s.accuracy = j.at("accuracy").get<double>();
  return s;
}

std::filesystem::path participant_dir(const std::filesystem::path& root, const std::string& participant) {
  check_participant(participant);
  return root / participant;
}

std::filesystem::path session_log_path(const std::filesystem::path& root, const std::string& participant,
                                       int repetition) {
  return participant_dir(root, participant) / ("session_" + std::to_string(repetition) + ".log");
}

ParticipantHistory load_history(const std::filesystem::path& root, const std::string& participant) {
  ParticipantHistory h;
  h.participant = participant;
  const auto path = participant_dir(root, participant) / kHistoryFile;
  std::ifstream in(path);
  if (!in) return h;
  try {
    const json doc = json::parse(in);
    for (const auto& e : doc.at("sessions")) {
      HistoryEntry entry;
      entry.repetition = e.at("repetition").get<int>();
      entry.log = e.at("log").get<std::string>();
      entry.reason = end_reason_from(e.at("reason").get<std::string>());
      entry.frames = e.at("frames").get<std::int64_t>();
      entry.scores = standardized_from_json(e.at("standardized"));
      h.entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw ParseError("history file '" + path.string() + "': " + e.what());
  }
  std::sort(h.entries.begin(), h.entries.end(),
            [](const HistoryEntry& a, const HistoryEntry& b) { return a.repetition < b.repetition; });
  return h;
}

ParticipantHistory record_repetition(const std::filesystem::path& root, const std::string& participant,
                                     const HistoryEntry& entry) {
  ParticipantHistory h = load_history(root, participant);
  std::erase_if(h.entries, [&](const HistoryEntry& e) { return e.repetition == entry.repetition; });
  h.entries.push_back(entry);
  std::sort(h.entries.begin(), h.entries.end(),
            [](const HistoryEntry& a, const HistoryEntry& b) { return a.repetition < b.repetition; });

  json sessions = json::array();
  for (const auto& e : h.entries) {
    sessions.push_back({{"repetition", e.repetition},
                        {"log", e.log},
                        {"reason", std::string(to_string(e.reason))},
                        {"frames", e.frames},
                        {"standardized", to_json(e.scores)}});
  }
  const auto dir = participant_dir(root, participant);
  std::filesystem::create_directories(dir);
  const auto path = dir / kHistoryFile;
  const auto tmp = dir / (std::string(kHistoryFile) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << json{{"participant", participant}, {"sessions", sessions}}.dump(2) << '\n';
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
  return h;
}

std::vector<ImprovementDelta> improvement_deltas(const ParticipantHistory& history) {
  std::vector<ImprovementDelta> out;
  if (history.entries.empty()) return out;
  const Standardized& first = history.entries.front().scores;
  for (std::size_t i = 1; i < history.entries.size(); ++i) {
    const Standardized& s = history.entries[i].scores;
    ImprovementDelta d;
    d.repetition = history.entries[i].repetition;
    d.conformity = percent_change(first.conformity, s.conformity);
    d.efficiency = percent_change(first.efficiency, s.efficiency);
    d.safety = percent_change(first.safety, s.safety);
    if (first.accuracy && s.accuracy) d.accuracy = percent_change(*first.accuracy, *s.accuracy);
    out.push_back(d);
  }
  return out;
}

int next_repetition(const ParticipantHistory& history) {
  return history.entries.empty() ? 1 : history.entries.back().repetition + 1;
}

}  // namespace bridgesim
