#pragma once

// Per-participant training history. Layout under a data root:
//   <root>/<participant>/history.json
//   <root>/<participant>/session_<repetition>.log

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bridgesim/assessment.hpp"
#include "bridgesim/session.hpp"

namespace bridgesim {

struct HistoryEntry {
  int repetition = 0;
  std::string log;  // file name relative to the participant directory
  EndReason reason = EndReason::aborted;
  std::int64_t frames = 0;
  Standardized scores;
  bool operator==(const HistoryEntry&) const = default;
};

struct ParticipantHistory {
  std::string participant;
  std::vector<HistoryEntry> entries;  // ascending repetition
};

struct ImprovementDelta {
  int repetition = 0;
  // Percent change against the first session; empty where the first value is 0
  // or the dimension is not applicable.
  std::optional<double> conformity;
  std::optional<double> efficiency;
  std::optional<double> safety;
  std::optional<double> accuracy;
};

// (new - old) / |old| * 100; empty when old is 0.
std::optional<double> percent_change(double old_value, double new_value);

std::filesystem::path participant_dir(const std::filesystem::path& root, const std::string& participant);
std::filesystem::path session_log_path(const std::filesystem::path& root, const std::string& participant,
                                       int repetition);

// Missing history yields an empty entry list.
ParticipantHistory load_history(const std::filesystem::path& root, const std::string& participant);

// Adds or replaces the entry for its repetition and rewrites history.json.
ParticipantHistory record_repetition(const std::filesystem::path& root, const std::string& participant,
                                     const HistoryEntry& entry);

// One delta per session after the first.
std::vector<ImprovementDelta> improvement_deltas(const ParticipantHistory& history);

// Next unused repetition number (1 for a new participant).
int next_repetition(const ParticipantHistory& history);

nlohmann::json to_json(const Standardized& s);
Standardized standardized_from_json(const nlohmann::json& j);

}  // namespace bridgesim
