#include "bridgesim/questionnaire.hpp"

#include <algorithm>

#include "bridgesim/error.hpp"

namespace bridgesim {
namespace {

using nlohmann::json;

int likert(const json& obj, const std::string& path, const char* key) {
  const std::string field = path + "." + key;
  if (!obj.is_object() || !obj.contains(key)) throw ValidationError("questionnaire.missing", field + " is missing");
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ValidationError("questionnaire.likert", field + " must be an integer 1..5");
  const int x = v.get<int>();
  if (x < 1 || x > 5) throw ValidationError("questionnaire.likert", field + " = " + std::to_string(x) + " is outside 1..5");
  return x;
}

void add(std::map<std::string, std::vector<int>>& acc, const std::string& key, int v) { acc[key].push_back(v); }

}  // namespace

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::calibration:
      return "calibration";
    case Phase::takeoff:
      return "takeoff";
    case Phase::task1:
      return "task1";
    case Phase::task2:
      return "task2";
    case Phase::task3:
      return "task3";
    case Phase::task4:
      return "task4";
    case Phase::landing:
      return "landing";
  }
  return "?";
}

QuestionnaireResponse questionnaire_ingest(const json& payload) {
  if (!payload.is_object()) throw ValidationError("questionnaire.form", "questionnaire payload must be an object");
  QuestionnaireResponse r;
  const json overall = payload.value("overall", json());
  r.overall.time_pressure = likert(overall, "overall", "time_pressure");
  r.overall.frustration = likert(overall, "overall", "frustration");
  r.overall.in_task_feedback = likert(overall, "overall", "in_task_feedback");
  const json phases = payload.value("by_phase", json());
  for (Phase p : kAllPhases) {
    const std::string name(to_string(p));
    if (!phases.is_object() || !phases.contains(name)) {
      throw ValidationError("questionnaire.missing", "by_phase." + name + " is missing");
    }
    const json& ph = phases.at(name);
    const std::string path = "by_phase." + name;
    r.by_phase[p] = {likert(ph, path, "performance"), likert(ph, path, "mental_demand"),
                     likert(ph, path, "physical_demand")};
  }
  return r;
}

json to_json(const QuestionnaireResponse& r) {
  json phases = json::object();
  for (const auto& [p, a] : r.by_phase) {
    phases[std::string(to_string(p))] = {
        {"performance", a.performance}, {"mental_demand", a.mental_demand}, {"physical_demand", a.physical_demand}};
  }
  return {{"overall",
           {{"time_pressure", r.overall.time_pressure},
            {"frustration", r.overall.frustration},
            {"in_task_feedback", r.overall.in_task_feedback}}},
          {"by_phase", phases}};
}

std::map<std::string, QuestionSummary> questionnaire_summary(std::span<const QuestionnaireResponse> responses) {
  std::map<std::string, std::vector<int>> acc;
  for (const auto& r : responses) {
    add(acc, "overall.time_pressure", r.overall.time_pressure);
    add(acc, "overall.frustration", r.overall.frustration);
    add(acc, "overall.in_task_feedback", r.overall.in_task_feedback);
    for (const auto& [p, a] : r.by_phase) {
      const std::string prefix = std::string(to_string(p)) + ".";
      add(acc, prefix + "performance", a.performance);
      add(acc, prefix + "mental_demand", a.mental_demand);
      add(acc, prefix + "physical_demand", a.physical_demand);
    }
  }
  std::map<std::string, QuestionSummary> out;
  for (const auto& [key, values] : acc) {
    QuestionSummary s;
    s.responses = values.size();
    double sum = 0.0;
    for (int v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    s.most_positive = *std::min_element(values.begin(), values.end());
    s.most_negative = *std::max_element(values.begin(), values.end());
    out[key] = s;
  }
  return out;
}

}  // namespace bridgesim
