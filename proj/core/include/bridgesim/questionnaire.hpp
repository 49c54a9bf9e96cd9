#pragma once

// Post-session self-assessment: three overall questions plus three questions
// for each inspection phase, answered on a five-point Likert scale where
// 1 = strongly agree (most positive) and 5 = strongly disagree (most negative).

#include <array>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace bridgesim {

enum class Phase { calibration, takeoff, task1, task2, task3, task4, landing };
inline constexpr std::array<Phase, 7> kAllPhases{Phase::calibration, Phase::takeoff, Phase::task1, Phase::task2,
                                                 Phase::task3,       Phase::task4,   Phase::landing};
std::string_view to_string(Phase p);

struct OverallAnswers {
  int time_pressure = 3;
  int frustration = 3;
  int in_task_feedback = 3;
  bool operator==(const OverallAnswers&) const = default;
};

struct PhaseAnswers {
  int performance = 3;
  int mental_demand = 3;
  int physical_demand = 3;
  bool operator==(const PhaseAnswers&) const = default;
};

struct QuestionnaireResponse {
  OverallAnswers overall;
  std::map<Phase, PhaseAnswers> by_phase;  // all seven phases
  bool operator==(const QuestionnaireResponse&) const = default;
};

// Validates a form payload: every question present, every value an integer in
// 1..5. Throws ValidationError naming the offending field.
QuestionnaireResponse questionnaire_ingest(const nlohmann::json& payload);
nlohmann::json to_json(const QuestionnaireResponse& r);

struct QuestionSummary {
  double mean = 0.0;
  int most_positive = 0;  // smallest value
  int most_negative = 0;  // largest value
  std::size_t responses = 0;
};

// Keys: "overall.time_pressure", ..., "<phase>.performance", ...
std::map<std::string, QuestionSummary> questionnaire_summary(std::span<const QuestionnaireResponse> responses);

}  // namespace bridgesim
