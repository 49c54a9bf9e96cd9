#pragma once

// Report bundles: one JSON document per session (scores, breakdowns, events,
// chart payloads), one per group, and a CSV export of score cards.

#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "bridgesim/assessment.hpp"
#include "bridgesim/history.hpp"
#include "bridgesim/questionnaire.hpp"
#include "bridgesim/session.hpp"

namespace bridgesim {

inline constexpr std::string_view kReportFormat = "bridgesim-report";
inline constexpr std::string_view kGroupReportFormat = "bridgesim-group-report";

nlohmann::json to_json(const ScoreCard& card);
nlohmann::json to_json(const EventLedger& ledger);
nlohmann::json to_json(const BoxStats& b);
nlohmann::json to_json(const GroupStats& g);

struct ReportInput {
  std::string participant;
  int repetition = 1;
  bool practice = false;
  const SessionResult* session = nullptr;
  std::optional<QuestionnaireResponse> questionnaire;
  const ParticipantHistory* history = nullptr;  // improvement series source
};

// The self_assessment section is present only with a questionnaire.
nlohmann::json emit_report(const ReportInput& input);

// Throws Error when the file cannot be written.
void write_report(const std::filesystem::path& path, const nlohmann::json& report);

nlohmann::json group_report(std::span<const LabelledCard> cards,
                            std::span<const QuestionnaireResponse> questionnaires = {});

struct CsvRow {
  std::string participant;
  int repetition = 1;
  ScoreCard card;
};

// Header plus one line per card; raw and standardized values.
std::string score_cards_csv(std::span<const CsvRow> rows);

}  // namespace bridgesim
