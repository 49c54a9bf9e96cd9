#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bridgesim/error.hpp"
#include "bridgesim/history.hpp"
#include "bridgesim/pilot.hpp"
#include "bridgesim/questionnaire.hpp"
#include "bridgesim/report.hpp"
#include "bridgesim/scenario.hpp"
#include "bridgesim/server.hpp"
#include "bridgesim/session.hpp"
#include "bridgesim/session_log.hpp"

namespace bridgesim {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

enum class Format { text, json };

struct Options {
  Format format = Format::text;
};

// Exit codes.
constexpr int kOk = 0;
constexpr int kProblem = 1;
constexpr int kBadInput = 2;

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

void print_card(std::ostream& out, const ScoreCard& c) {
  const Standardized& s = c.standardized;
  out << "conformity  " << fixed(c.conformity.score, 3) << "  (" << fixed(s.conformity) << "%)\n";
  for (const auto& t : c.conformity.per_task) {
    out << "  task " << t.task << (t.entered ? "" : " (not entered)") << ": on-path " << fixed(100.0 * t.on_path_fraction)
        << "%, gain " << fixed(t.gain, 3) << ", loss " << fixed(t.loss, 3) << ", crashes " << t.crash_count << '\n';
  }
  out << "efficiency  " << fixed(c.efficiency.score, 3) << "  (" << fixed(s.efficiency) << "%), duration "
      << fixed(c.efficiency.duration_s, 1) << " s" << (c.efficiency.battery_failed ? ", battery failed" : "") << '\n';
  out << "safety      " << fixed(c.safety, 3) << "  (" << fixed(s.safety) << "%)\n";
  if (!c.accuracy.applicable) {
    out << "accuracy    n/a (no defects)\n";
  } else {
    out << "accuracy    " << fixed(c.accuracy.score, 3) << "  (" << fixed(*s.accuracy) << "%), recall "
        << fixed(c.accuracy.recall, 3) << ", precision " << fixed(c.accuracy.precision, 3)
        << (c.accuracy.no_snapshots ? ", no snapshots taken" : "") << '\n';
  }
}

void print_outcome(std::ostream& out, const SessionOutcome& o, double frame_rate) {
  out << "outcome     " << to_string(o.reason) << ", " << o.frames << " frames ("
      << fixed(static_cast<double>(o.frames) / frame_rate, 2) << " s)\n";
  if (o.log_path) out << "log         " << o.log_path->string() << '\n';
}

json outcome_json(const SessionOutcome& o) {
  return {{"reason", to_string(o.reason)},
          {"frames", o.frames},
          {"log", o.log_path ? json(o.log_path->string()) : json(nullptr)}};
}

ScoringWeights weights_with(const ScoringWeights& base, const std::optional<double>& omega_h,
                            const std::optional<double>& omega_v, const std::optional<double>& omega_o,
                            const std::optional<double>& omega_f, const std::optional<double>& beta) {
  ScoringWeights w = base;
  if (omega_h) w.human_loss = *omega_h;
  if (omega_v) w.vehicle_loss = *omega_v;
  if (omega_o) w.other_loss = *omega_o;
  if (omega_f) w.accuracy_gain = *omega_f;
  if (beta) w.beta = *beta;
  return w;
}

std::optional<QuestionnaireResponse> load_questionnaire(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return questionnaire_ingest(read_json_file(path));
}

// Latest standardized scores of everyone under a directory: top-level *.json
// cards ({"participant", "standardized"} or report bundles) and participant
// directories holding a history.json.
std::vector<LabelledCard> collect_cards(const fs::path& dir, std::vector<QuestionnaireResponse>& questionnaires) {
  if (!fs::is_directory(dir)) throw Error("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> paths;
  for (const auto& e : fs::directory_iterator(dir)) paths.push_back(e.path());
  std::sort(paths.begin(), paths.end());
  std::vector<LabelledCard> cards;
  for (const auto& p : paths) {
    if (fs::is_regular_file(p) && p.extension() == ".json") {
      const json doc = read_json_file(p);
      if (!doc.contains("standardized")) continue;
      cards.push_back({doc.value("participant", p.stem().string()), standardized_from_json(doc.at("standardized"))});
      if (doc.contains("self_assessment")) questionnaires.push_back(questionnaire_ingest(doc.at("self_assessment")));
    } else if (fs::is_directory(p) && fs::exists(p / "history.json")) {
      const ParticipantHistory h = load_history(dir, p.filename().string());
      if (!h.entries.empty()) cards.push_back({h.participant, h.entries.back().scores});
    }
  }
  return cards;
}

int cmd_validate(const Options& opt, const std::string& path, std::ostream& out, std::ostream& err) {
  try {
    const ScenarioSpec sc = load_scenario_file(path);
    if (opt.format == Format::json) {
      out << json{{"valid", true},
                  {"name", sc.name},
                  {"tasks", sc.task_count()},
                  {"elements", sc.elements.size()},
                  {"defects", sc.defects.size()}}
                 .dump()
          << '\n';
    } else {
      out << "ok: " << sc.name << " (" << sc.task_count() << " tasks, " << sc.elements.size() << " elements, "
          << sc.defects.size() << " defects)\n";
    }
    return kOk;
  } catch (const ValidationError& e) {
    err << "invalid scenario: " << e.invariant() << '\n' << e.what() << '\n';
    if (opt.format == Format::json) out << json{{"valid", false}, {"invariant", e.invariant()}, {"detail", e.what()}}.dump() << '\n';
    return kBadInput;
  }
}

struct RunArgs {
  std::string pilot;
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string participant = "scripted";
  int repetition = 0;
  bool practice = false;
  std::string root;
  std::string log;
  std::string report;
  std::string questionnaire;
};

int cmd_run_scripted(const Options& opt, const RunArgs& a, std::ostream& out) {
  SessionConfig cfg;
  cfg.scenario = load_scenario_file(a.scenario);
  cfg.seed = a.seed.value_or(cfg.scenario.seed);
  cfg.participant = a.participant;
  cfg.practice = a.practice;
  cfg.mode = SessionMode::scripted;

  ParticipantHistory history;
  fs::path log_path = a.log;
  if (!a.root.empty()) {
    history = load_history(a.root, a.participant);
    cfg.repetition = a.repetition > 0 ? a.repetition : next_repetition(history);
    if (log_path.empty()) {
      log_path = a.practice ? participant_dir(a.root, a.participant) / "practice.log"
                            : session_log_path(a.root, a.participant, cfg.repetition);
    }
  } else {
    cfg.repetition = a.repetition > 0 ? a.repetition : 1;
  }

  ScriptedPilot pilot = load_pilot_file(a.pilot, with_defects_for_seed(cfg.scenario, cfg.seed));
  SessionResult r;
  if (!log_path.empty()) {
    if (log_path.has_parent_path()) fs::create_directories(log_path.parent_path());
    std::ofstream log(log_path, std::ios::binary | std::ios::trunc);
    if (!log) throw Error("cannot write session log '" + log_path.string() + "'");
    r = run_session(cfg, pilot, &log);
    r.outcome.log_path = log_path;
  } else {
    r = run_session(cfg, pilot);
  }

  const bool record = !a.root.empty() && !a.practice;
  if (record) {
    history = record_repetition(a.root, a.participant,
                                {cfg.repetition, log_path.filename().string(), r.outcome.reason, r.outcome.frames,
                                 r.card.standardized});
  }
  if (!a.report.empty()) {
    ReportInput in{cfg.participant, cfg.repetition, cfg.practice, &r, load_questionnaire(a.questionnaire),
                   record ? &history : nullptr};
    write_report(a.report, emit_report(in));
  }

  if (opt.format == Format::json) {
    out << json{{"outcome", outcome_json(r.outcome)}, {"repetition", cfg.repetition}, {"scores", to_json(r.card)}}.dump()
        << '\n';
  } else {
    print_outcome(out, r.outcome, r.scenario.job.frame_rate_hz);
    print_card(out, r.card);
  }
  return kOk;
}

int cmd_replay(const Options& opt, const std::string& path, std::ostream& out) {
  const ReplayResult rr = replay(read_session_log(path));
  if (opt.format == Format::json) {
    json mism = json::array();
    for (const auto& m : rr.mismatches) mism.push_back({{"frame", m.frame}, {"field", m.field}});
    out << json{{"outcome", outcome_json(rr.result.outcome)}, {"mismatches", mism}, {"scores", to_json(rr.result.card)}}
               .dump()
        << '\n';
  } else {
    print_outcome(out, rr.result.outcome, rr.result.scenario.job.frame_rate_hz);
    out << "replay      " << (rr.mismatches.empty() ? "consistent" : std::to_string(rr.mismatches.size()) + " mismatches")
        << '\n';
    for (std::size_t i = 0; i < rr.mismatches.size() && i < 10; ++i) {
      out << "  frame " << rr.mismatches[i].frame << ": " << rr.mismatches[i].field << '\n';
    }
    print_card(out, rr.result.card);
  }
  return rr.mismatches.empty() ? kOk : kProblem;
}

struct WeightArgs {
  std::optional<double> omega_h, omega_v, omega_o, omega_f, beta;
};

int cmd_score(const Options& opt, const std::string& path, const WeightArgs& w, std::ostream& out) {
  const SessionLog log = read_session_log(path);
  const ScenarioSpec sc = load_scenario(log.header.scenario.dump());
  const ScoringWeights weights = weights_with(sc.job.weights, w.omega_h, w.omega_v, w.omega_o, w.omega_f, w.beta);
  const ReplayResult rr = replay(log, weights);
  if (opt.format == Format::json) {
    out << to_json(rr.result.card).dump() << '\n';
  } else {
    print_card(out, rr.result.card);
  }
  return kOk;
}

struct ReportArgs {
  std::string participant;
  std::string root = "sessions";
  int repetition = 0;
  std::string questionnaire;
  std::string out;
};

int cmd_report(const Options& opt, const ReportArgs& a, std::ostream& out) {
  const ParticipantHistory history = load_history(a.root, a.participant);
  if (history.entries.empty()) throw Error("no recorded sessions for participant '" + a.participant + "'");
  const auto it = a.repetition > 0 ? std::find_if(history.entries.begin(), history.entries.end(),
                                                  [&](const HistoryEntry& e) { return e.repetition == a.repetition; })
                                   : history.entries.end() - 1;
  if (it == history.entries.end()) throw Error("participant has no repetition " + std::to_string(a.repetition));
  const fs::path log_path = participant_dir(a.root, a.participant) / it->log;
  ReplayResult rr = replay(read_session_log(log_path));
  rr.result.outcome.log_path = log_path;

  ParticipantHistory upto = history;
  upto.entries.assign(history.entries.begin(), it + 1);
  ReportInput in{a.participant, it->repetition, false, &rr.result, load_questionnaire(a.questionnaire), &upto};
  const json report = emit_report(in);
  const fs::path dest = a.out.empty() ? participant_dir(a.root, a.participant) /
                                            ("session_" + std::to_string(it->repetition) + "_report.json")
                                      : fs::path(a.out);
  write_report(dest, report);
  if (opt.format == Format::json) {
    out << report.dump() << '\n';
  } else {
    out << "report      " << dest.string() << '\n';
    print_outcome(out, rr.result.outcome, rr.result.scenario.job.frame_rate_hz);
    print_card(out, rr.result.card);
    for (const auto& d : improvement_deltas(upto)) {
      auto pct = [](const std::optional<double>& v) { return v ? fixed(*v) + "%" : std::string("n/a"); };
      out << "  vs first, repetition " << d.repetition << ": conformity " << pct(d.conformity) << ", efficiency "
          << pct(d.efficiency) << ", safety " << pct(d.safety) << ", accuracy " << pct(d.accuracy) << '\n';
    }
  }
  return kOk;
}

int cmd_group_report(const Options& opt, const std::string& dir, const std::string& out_path, std::ostream& out) {
  std::vector<QuestionnaireResponse> questionnaires;
  const std::vector<LabelledCard> cards = collect_cards(dir, questionnaires);
  if (cards.empty()) throw Error("no score cards found in '" + dir + "'");
  const json doc = group_report(cards, questionnaires);
  if (!out_path.empty()) write_report(out_path, doc);
  if (opt.format == Format::json) {
    out << doc.dump() << '\n';
  } else {
    const GroupStats g = group_summary(cards);
    out << "participants " << g.participants << '\n';
    auto row = [&](const char* name, const BoxStats& b) {
      out << name << " min " << fixed(b.min) << "  q1 " << fixed(b.q1) << "  median " << fixed(b.median) << "  q3 "
          << fixed(b.q3) << "  max " << fixed(b.max) << '\n';
    };
    row("conformity ", g.conformity);
    row("efficiency ", g.efficiency);
    row("safety     ", g.safety);
    if (!g.accuracy.points.empty()) row("accuracy   ", g.accuracy);
  }
  return kOk;
}

int cmd_make_pilot(const std::string& plan_path, const std::string& scenario, const std::string& out_path,
                   std::ostream& out) {
  const ScenarioSpec sc = load_scenario_file(scenario);
  const ScriptedPilot pilot = compile_plan(flight_plan_from_json(read_json_file(plan_path)), sc);
  const std::string text = pilot_to_json(pilot).dump() + "\n";
  if (out_path.empty()) {
    out << text;
  } else {
    std::ofstream f(out_path, std::ios::trunc);
    f << text;
    if (!f) throw Error("cannot write '" + out_path + "'");
  }
  return kOk;
}

struct ServeArgs {
  std::string scenario;
  std::string addr;
  std::optional<std::uint64_t> seed;
  std::string participant = "trainee";
  int repetition = 0;
  bool practice = false;
  std::string root = "sessions";
  double speedup = 1.0;
  int decimation = 2;
  bool lockstep = false;
  int sessions = 0;
  int questionnaire_wait_ms = 30'000;
};

int cmd_serve(const ServeArgs& a, std::ostream& out) {
  ServerConfig cfg;
  cfg.session.scenario = load_scenario_file(a.scenario);
  cfg.session.seed = a.seed.value_or(cfg.session.scenario.seed);
  cfg.session.participant = a.participant;
  cfg.session.repetition = a.repetition;
  cfg.session.practice = a.practice;
  cfg.session.mode = SessionMode::interactive;
  cfg.data_root = a.root;
  cfg.speedup = a.speedup;
  cfg.decimation = a.decimation;
  cfg.lockstep = a.lockstep;
  cfg.questionnaire_wait = std::chrono::milliseconds(a.questionnaire_wait_ms);
  const Address address = a.addr.empty() ? default_address() : parse_address(a.addr);
  Server server(cfg, address);
  out << "listening on " << address.host << ':' << server.port() << std::endl;
  server.run(a.sessions);
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Drone bridge-inspection training simulator"};
  app.name("bridgesim");
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;
  std::map<std::string, Format> formats{{"text", Format::text}, {"json", Format::json}};
  app.add_option("--format", opt.format, "Output format")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case))
      ->capture_default_str();

  std::string scenario_path;
  auto* validate = app.add_subcommand("validate", "Check a scenario document");
  validate->add_option("scenario", scenario_path, "Scenario file")->required();

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run-scripted", "Fly a scripted pilot headless and score the session");
  run_cmd->add_option("pilot", run.pilot, "Pilot timeline or flight plan")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--scenario", run.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", run.seed, "Session seed (defaults to the scenario seed)");
  run_cmd->add_option("--participant", run.participant, "Participant id")->capture_default_str();
  run_cmd->add_option("--repetition", run.repetition, "Repetition number (0: next free)");
  run_cmd->add_flag("--practice", run.practice, "Practice session, not recorded in the history");
  run_cmd->add_option("--root", run.root, "Data root for logs and history");
  run_cmd->add_option("--log", run.log, "Session log path");
  run_cmd->add_option("--report", run.report, "Write a report bundle here");
  run_cmd->add_option("--questionnaire", run.questionnaire, "Questionnaire answers (JSON)");

  std::string log_path;
  auto* replay_cmd = app.add_subcommand("replay", "Recompute telemetry from a session log and check it");
  replay_cmd->add_option("log", log_path, "Session log")->required()->check(CLI::ExistingFile);

  WeightArgs w;
  auto* score_cmd = app.add_subcommand("score", "Score a session log, optionally with other weights");
  score_cmd->add_option("log", log_path, "Session log")->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--omega-h", w.omega_h, "Human crash loss");
  score_cmd->add_option("--omega-v", w.omega_v, "Vehicle crash loss");
  score_cmd->add_option("--omega-o", w.omega_o, "Loss per other crash");
  score_cmd->add_option("--omega-f", w.omega_f, "Accuracy gain");
  score_cmd->add_option("--beta", w.beta, "F-beta weight");

  ReportArgs rep;
  auto* report_cmd = app.add_subcommand("report", "Build the report bundle for a participant's session");
  report_cmd->add_option("participant", rep.participant, "Participant id")->required();
  report_cmd->add_option("--root", rep.root, "Data root")->capture_default_str();
  report_cmd->add_option("--repetition", rep.repetition, "Repetition (default: latest)");
  report_cmd->add_option("--questionnaire", rep.questionnaire, "Questionnaire answers (JSON)");
  report_cmd->add_option("--out", rep.out, "Report path");

  std::string group_dir;
  std::string group_out;
  auto* group_cmd = app.add_subcommand("group-report", "Group statistics over score cards or participant histories");
  group_cmd->add_option("dir", group_dir, "Directory")->required();
  group_cmd->add_option("--out", group_out, "Write the group report here");

  std::string plan_path;
  std::string pilot_out;
  auto* make_cmd = app.add_subcommand("make-pilot", "Compile a flight plan into an input timeline");
  make_cmd->add_option("plan", plan_path, "Flight plan")->required()->check(CLI::ExistingFile);
  make_cmd->add_option("--scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
  make_cmd->add_option("--out", pilot_out, "Output file (default: stdout)");

  ServeArgs sv;
  auto* serve_cmd = app.add_subcommand("serve", "Serve interactive sessions to the cockpit UI");
  serve_cmd->add_option("--scenario", sv.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--addr", sv.addr, "host:port (default: $BRIDGESIM_ADDR or 127.0.0.1:7878)");
  serve_cmd->add_option("--seed", sv.seed, "Session seed");
  serve_cmd->add_option("--participant", sv.participant, "Participant id")->capture_default_str();
  serve_cmd->add_option("--repetition", sv.repetition, "Repetition number (0: next free)");
  serve_cmd->add_flag("--practice", sv.practice, "Practice session");
  serve_cmd->add_option("--root", sv.root, "Data root")->capture_default_str();
  serve_cmd->add_option("--speedup", sv.speedup, "Simulated seconds per wall second (0: unpaced)")->capture_default_str();
  serve_cmd->add_option("--decimation", sv.decimation, "Send frame/hud every n-th frame")->capture_default_str();
  serve_cmd->add_flag("--lockstep", sv.lockstep, "One frame per control message");
  serve_cmd->add_option("--sessions", sv.sessions, "Stop after this many sessions (0: run forever)");
  serve_cmd->add_option("--questionnaire-wait-ms", sv.questionnaire_wait_ms, "Wait for the questionnaire")
      ->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    if (*validate) return cmd_validate(opt, scenario_path, out, err);
    if (*run_cmd) return cmd_run_scripted(opt, run, out);
    if (*replay_cmd) return cmd_replay(opt, log_path, out);
    if (*score_cmd) return cmd_score(opt, log_path, w, out);
    if (*report_cmd) return cmd_report(opt, rep, out);
    if (*group_cmd) return cmd_group_report(opt, group_dir, group_out, out);
    if (*make_cmd) return cmd_make_pilot(plan_path, scenario_path, pilot_out, out);
    if (*serve_cmd) return cmd_serve(sv, out);
  } catch (const ValidationError& e) {
    err << "error: invariant " << e.invariant() << ": " << e.what() << '\n';
    return kBadInput;
  } catch (const LogError& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  }
  return kBadInput;
}

}  // namespace bridgesim
