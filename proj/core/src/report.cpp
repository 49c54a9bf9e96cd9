#include "bridgesim/report.hpp"

#include <fstream>
#include <sstream>

#include "bridgesim/error.hpp"
#include "bridgesim/session_log.hpp"

namespace bridgesim {
namespace {

using nlohmann::json;

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json task_to_json(const TaskConformity& t) {
  return {{"task", t.task},
          {"entered", t.entered},
          {"window_frames", t.window_frames},
          {"duration_s", t.duration_s},
          {"on_path_fraction", t.on_path_fraction},
          {"speeding_term", t.speeding_term},
          {"gain", t.gain},
          {"loss", t.loss},
          {"crashes", t.crash_count}};
}

json accuracy_to_json(const AccuracyScore& a) {
  return {{"applicable", a.applicable}, {"no_snapshots", a.no_snapshots}, {"recall", a.recall},
          {"precision", a.precision},   {"f_beta", a.f_beta},             {"score", a.score}};
}

json improvement_to_json(const ParticipantHistory* history, int repetition, const Standardized& current) {
  json series = json::array();
  json deltas = json::array();
  if (history != nullptr && !history->entries.empty()) {
    for (const auto& e : history->entries) series.push_back({{"repetition", e.repetition}, {"standardized", to_json(e.scores)}});
    for (const auto& d : improvement_deltas(*history)) {
      deltas.push_back({{"repetition", d.repetition},
                        {"conformity", optional_number(d.conformity)},
                        {"efficiency", optional_number(d.efficiency)},
                        {"safety", optional_number(d.safety)},
                        {"accuracy", optional_number(d.accuracy)}});
    }
  } else {
    series.push_back({{"repetition", repetition}, {"standardized", to_json(current)}});
  }
  return {{"series", series}, {"deltas_vs_first_pct", deltas}};
}

std::string csv_number(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

json to_json(const ScoreCard& card) {
  json per_task = json::array();
  for (const auto& t : card.conformity.per_task) per_task.push_back(task_to_json(t));
  return {{"raw",
           {{"conformity", card.conformity.score},
            {"efficiency", card.efficiency.score},
            {"safety", card.safety},
            {"accuracy", card.accuracy.applicable ? json(card.accuracy.score) : json(nullptr)}}},
          {"standardized", to_json(card.standardized)},
          {"conformity", {{"on_path", card.conformity.on_path}, {"speeding", card.conformity.speeding}, {"per_task", per_task}}},
          {"efficiency", {{"duration_s", card.efficiency.duration_s}, {"battery_failed", card.efficiency.battery_failed}}},
          {"accuracy", accuracy_to_json(card.accuracy)}};
}

json to_json(const EventLedger& ledger) {
  json crashes = json::array();
  for (const auto& c : ledger.crashes) {
    crashes.push_back({{"frame", c.frame},
                       {"kind", c.kind},
                       {"object", c.object},
                       {"task", c.task ? json(*c.task) : json(nullptr)}});
  }
  json snapshots = json::array();
  for (const auto& s : ledger.snapshots) {
    snapshots.push_back({{"frame", s.frame},
                         {"position", {s.position.x, s.position.y, s.position.z}},
                         {"yaw", s.yaw},
                         {"visible", s.visible},
                         {"credited", s.credited}});
  }
  return {{"crash_human", ledger.human},
          {"crash_vehicle", ledger.vehicle},
          {"crash_other_count", ledger.other_count},
          {"crashes", crashes},
          {"snapshots", snapshots},
          {"snapshots_taken", ledger.snapshots_taken},
          {"true_detections", ledger.true_detections},
          {"defect_count", ledger.defect_count},
          {"battery_failed", ledger.battery_failed}};
}

json to_json(const BoxStats& b) {
  json points = json::array();
  for (const auto& [label, v] : b.points) points.push_back({{"participant", label}, {"value", v}});
  return {{"min", b.min}, {"q1", b.q1}, {"median", b.median}, {"q3", b.q3}, {"max", b.max}, {"points", points}};
}

json to_json(const GroupStats& g) {
  return {{"participants", g.participants},
          {"conformity", to_json(g.conformity)},
          {"efficiency", to_json(g.efficiency)},
          {"safety", to_json(g.safety)},
          {"accuracy", g.accuracy.points.empty() ? json(nullptr) : to_json(g.accuracy)}};
}

json emit_report(const ReportInput& input) {
  if (input.session == nullptr) throw Error("report needs a session result");
  const SessionResult& s = *input.session;
  const ScoreCard& card = s.card;

  json kiviat = json::array();
  for (const auto& axis : kiviat_data(card.standardized)) {
    kiviat.push_back({{"axis", axis.name}, {"value", optional_number(axis.value)}});
  }
  const Waterfall wf = conformity_waterfall(card.conformity);
  json steps = json::array();
  for (const auto& st : wf.steps) steps.push_back({{"task", st.task}, {"gain", st.gain}, {"loss", st.loss}});
  json messages = json::array();
  for (const auto& m : s.messages) {
    messages.push_back({{"frame", m.frame}, {"kind", std::string(to_string(m.kind))}, {"text", m.text}});
  }

  json report = {
      {"format", kReportFormat},
      {"version", 1},
      {"participant", input.participant},
      {"repetition", input.repetition},
      {"practice", input.practice},
      {"scenario", s.scenario.name},
      {"outcome",
       {{"reason", std::string(to_string(s.outcome.reason))},
        {"frames", s.outcome.frames},
        {"duration_s", static_cast<double>(s.outcome.frames) / s.scenario.job.frame_rate_hz},
        {"log", s.outcome.log_path ? json(s.outcome.log_path->string()) : json(nullptr)}}},
      {"scores", to_json(card)},
      {"standardized", to_json(card.standardized)},
      {"events", to_json(s.analysis.ledger)},
      {"messages", messages},
      {"charts",
       {{"kiviat", kiviat},
        {"waterfall", {{"steps", steps}, {"total", wf.total}}},
        {"crash_stack", crash_by_task(s.analysis.ledger, s.scenario.task_count())},
        {"accuracy", accuracy_to_json(card.accuracy)},
        {"improvement", improvement_to_json(input.history, input.repetition, card.standardized)}}},
  };
  if (input.questionnaire) report["self_assessment"] = to_json(*input.questionnaire);
  return report;
}

void write_report(const std::filesystem::path& path, const json& report) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  out << report.dump(2) << '\n';
  out.flush();
  if (!out) throw Error("cannot write report '" + path.string() + "'");
}

json group_report(std::span<const LabelledCard> cards, std::span<const QuestionnaireResponse> questionnaires) {
  json doc = {{"format", kGroupReportFormat}, {"version", 1}, {"stats", to_json(group_summary(cards))}};
  if (!questionnaires.empty()) {
    json q = json::object();
    for (const auto& [key, sum] : questionnaire_summary(questionnaires)) {
      q[key] = {{"mean", sum.mean},
                {"most_positive", sum.most_positive},
                {"most_negative", sum.most_negative},
                {"responses", sum.responses}};
    }
    doc["questionnaire"] = q;
  }
  return doc;
}

std::string score_cards_csv(std::span<const CsvRow> rows) {
  std::string out =
      "participant,repetition,conformity,efficiency,safety,accuracy,"
      "conformity_pct,efficiency_pct,safety_pct,accuracy_pct\n";
  for (const auto& r : rows) {
    const ScoreCard& c = r.card;
    out += csv_field(r.participant) + ',' + std::to_string(r.repetition) + ',' + csv_number(c.conformity.score) + ',' +
           csv_number(c.efficiency.score) + ',' + csv_number(c.safety) + ',' +
           (c.accuracy.applicable ? csv_number(c.accuracy.score) : "") + ',' +
           csv_number(c.standardized.conformity) + ',' + csv_number(c.standardized.efficiency) + ',' +
           csv_number(c.standardized.safety) + ',' +
           (c.standardized.accuracy ? csv_number(*c.standardized.accuracy) : "") + '\n';
  }
  return out;
}

}  // namespace bridgesim
