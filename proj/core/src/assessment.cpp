#include "bridgesim/assessment.hpp"

#include <algorithm>
#include <cmath>

#include "bridgesim/error.hpp"

namespace bridgesim {
namespace {

double median_of_sorted(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ConformityScore conformity_score(std::span<const FrameRecord> frames, std::span<const TaskWindow> windows,
                                 const std::vector<bool>& speeding, std::span<const TaskSpec> tasks,
                                 const ScoringWeights& weights, double frame_rate_hz) {
  ConformityScore c;
  const std::int64_t base = frames.empty() ? 0 : frames.front().index;
  for (const auto& task : tasks) {
    TaskConformity tc;
    tc.task = task.id;
    const auto w = std::find_if(windows.begin(), windows.end(), [&](const TaskWindow& x) { return x.task == task.id; });
    if (w != windows.end() && w->entered) {
      tc.entered = true;
      tc.window_frames = w->length();
      std::int64_t on = 0;
      double speed_sum = 0.0;
      for (std::int64_t i = w->start; i <= w->end; ++i) {
        const auto k = static_cast<std::size_t>(i - base);
        const FrameRecord& f = frames[k];
        if (f.task == task.id) ++on;
        if (speeding[k]) speed_sum += f.speed_mps / task.speed_limit_mps;
      }
      const double len = static_cast<double>(tc.window_frames);
      tc.on_path_fraction = static_cast<double>(on) / len;
      tc.speeding_term = speed_sum / len;
      tc.duration_s = len / frame_rate_hz;
    }
    tc.gain = weights.path_gain * tc.on_path_fraction;
    tc.loss = weights.speeding_loss * tc.speeding_term + 0.0;  // no negative zero
    c.on_path += tc.on_path_fraction;
    c.speeding += tc.speeding_term;
    c.score += tc.gain + tc.loss;
    c.per_task.push_back(tc);
  }
  return c;
}

ConformityScore conformity_score(std::span<const FrameRecord> frames, const SessionAnalysis& analysis,
                                 const ScenarioSpec& scenario) {
  return conformity_score(frames, analysis.windows, analysis.speeding, scenario.tasks, scenario.job.weights,
                          scenario.job.frame_rate_hz);
}

EfficiencyScore efficiency_score(std::int64_t frame_count, double frame_rate_hz, const JobSpec& job) {
  EfficiencyScore e;
  e.duration_s = static_cast<double>(frame_count) / frame_rate_hz;
  e.battery_failed = e.duration_s > job.tau_max_s;
  const auto& w = job.weights;
  e.score = e.battery_failed ? w.battery_loss
                             : w.efficiency_base + w.efficiency_slope * std::max(e.duration_s - job.tau_min_s, 0.0);
  return e;
}

double safety_score(bool human, bool vehicle, int other_count, const ScoringWeights& weights) {
  const double raw = weights.human_loss * (human ? 1.0 : 0.0) + weights.vehicle_loss * (vehicle ? 1.0 : 0.0) +
                     weights.other_loss * static_cast<double>(other_count);
  return std::max(raw, weights.safety_floor) + 0.0;
}

double safety_score(const EventLedger& ledger, const ScoringWeights& weights) {
  return safety_score(ledger.human, ledger.vehicle, ledger.other_count, weights);
}

double f_beta(double precision, double recall, double beta) {
  if (std::isinf(beta)) return recall;
  const double b2 = beta * beta;
  const double denom = b2 * precision + recall;
  if (denom <= 0.0) return 0.0;
  return (1.0 + b2) * precision * recall / denom;
}

AccuracyScore accuracy_score(int true_detections, int snapshots_taken, int defect_count,
                             const ScoringWeights& weights) {
  AccuracyScore a;
  if (defect_count <= 0) {
    a.applicable = false;
    return a;
  }
  a.recall = static_cast<double>(true_detections) / static_cast<double>(defect_count);
  if (snapshots_taken <= 0) {
    a.no_snapshots = true;
    return a;
  }
  a.precision = static_cast<double>(true_detections) / static_cast<double>(snapshots_taken);
  a.f_beta = f_beta(a.precision, a.recall, weights.beta);
  a.score = weights.accuracy_gain * a.f_beta;
  return a;
}

double standardize_value(double raw, double range_min, double range_max) {
  return (raw - range_min) / (range_max - range_min) * 100.0;
}

Standardized standardize(const ScoreCard& card, const ScoringWeights& weights) {
  Standardized s;
  s.conformity = standardize_value(card.conformity.score, -100.0, 100.0);
  s.efficiency = standardize_value(card.efficiency.score, weights.battery_loss, weights.efficiency_base);
  s.safety = standardize_value(card.safety, weights.safety_floor, 0.0);
  if (card.accuracy.applicable) s.accuracy = standardize_value(card.accuracy.score, 0.0, weights.accuracy_gain);
  return s;
}

ScoreCard score_session(std::span<const FrameRecord> frames, const SessionAnalysis& analysis,
                        const ScenarioSpec& scenario) {
  return score_session(frames, analysis, scenario, scenario.job.weights);
}

ScoreCard score_session(std::span<const FrameRecord> frames, const SessionAnalysis& analysis,
                        const ScenarioSpec& scenario, const ScoringWeights& weights) {
  ScoreCard card;
  card.conformity = conformity_score(frames, analysis.windows, analysis.speeding, scenario.tasks, weights,
                                     scenario.job.frame_rate_hz);
  for (const auto& crash : analysis.ledger.crashes) {
    if (!crash.task) continue;
    for (auto& t : card.conformity.per_task) {
      if (t.task == *crash.task) ++t.crash_count;
    }
  }
  JobSpec job = scenario.job;
  job.weights = weights;
  card.efficiency = efficiency_score(analysis.frame_count, scenario.job.frame_rate_hz, job);
  card.safety = safety_score(analysis.ledger, weights);
  card.accuracy = accuracy_score(analysis.ledger.true_detections, analysis.ledger.snapshots_taken,
                                 analysis.ledger.defect_count, weights);
  card.standardized = standardize(card, weights);
  return card;
}

std::array<KiviatAxis, 4> kiviat_data(const Standardized& s) {
  return {{{"conformity", s.conformity}, {"efficiency", s.efficiency}, {"safety", s.safety}, {"accuracy", s.accuracy}}};
}

Waterfall conformity_waterfall(const ConformityScore& conformity) {
  Waterfall w;
  for (const auto& t : conformity.per_task) {
    w.steps.push_back({t.task, t.gain, t.loss});
    w.total += t.gain + t.loss;
  }
  return w;
}

std::map<std::string, int> crash_by_task(const EventLedger& ledger, int task_count) {
  std::map<std::string, int> out;
  for (int t = 1; t <= task_count; ++t) out["task" + std::to_string(t)] = 0;
  out["transit"] = 0;
  for (const auto& c : ledger.crashes) ++out[c.task ? "task" + std::to_string(*c.task) : "transit"];
  return out;
}

BoxStats box_stats(std::vector<std::pair<std::string, double>> labelled) {
  if (labelled.empty()) throw Error("box statistics need at least one value");
  std::vector<double> v;
  v.reserve(labelled.size());
  for (const auto& [_, x] : labelled) v.push_back(x);
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  BoxStats b;
  b.min = v.front();
  b.max = v.back();
  b.median = median_of_sorted(v);
  if (n == 1) {
    b.q1 = b.q3 = b.median;
  } else {
    const std::size_t half = n / 2;
    b.q1 = median_of_sorted(std::span<const double>(v).first(half));
    b.q3 = median_of_sorted(std::span<const double>(v).last(half));
  }
  b.points = std::move(labelled);
  return b;
}

GroupStats group_summary(std::span<const LabelledCard> cards) {
  if (cards.empty()) throw Error("group summary needs at least one score card");
  std::vector<std::pair<std::string, double>> c, e, s, a;
  for (const auto& card : cards) {
    c.emplace_back(card.participant, card.scores.conformity);
    e.emplace_back(card.participant, card.scores.efficiency);
    s.emplace_back(card.participant, card.scores.safety);
    if (card.scores.accuracy) a.emplace_back(card.participant, *card.scores.accuracy);
  }
  GroupStats g;
  g.participants = cards.size();
  g.conformity = box_stats(std::move(c));
  g.efficiency = box_stats(std::move(e));
  g.safety = box_stats(std::move(s));
  if (!a.empty()) g.accuracy = box_stats(std::move(a));
  return g;
}

}  // namespace bridgesim
