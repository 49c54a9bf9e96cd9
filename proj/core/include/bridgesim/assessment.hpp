#pragma once

// Post-session scoring on four dimensions (conformity, efficiency, safety,
// accuracy), standardization to percentages and the chart payloads built on
// top of them.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bridgesim/scenario.hpp"
#include "bridgesim/telemetry.hpp"

namespace bridgesim {

struct TaskConformity {
  int task = 0;
  bool entered = false;
  std::int64_t window_frames = 0;
  double on_path_fraction = 0.0;  // frames assigned to the task / window length
  double speeding_term = 0.0;     // sum of (v/v_limit) over speeding frames / window length
  double gain = 0.0;              // path_gain * on_path_fraction
  double loss = 0.0;              // speeding_loss * speeding_term
  double duration_s = 0.0;
  int crash_count = 0;
};

struct ConformityScore {
  double on_path = 0.0;   // P_p, in [0, T]
  double speeding = 0.0;  // P_s
  double score = 0.0;     // P_C
  std::vector<TaskConformity> per_task;
};

// Never-entered tasks contribute zero to both sums.
ConformityScore conformity_score(std::span<const FrameRecord> frames, std::span<const TaskWindow> windows,
                                 const std::vector<bool>& speeding, std::span<const TaskSpec> tasks,
                                 const ScoringWeights& weights, double frame_rate_hz);
ConformityScore conformity_score(std::span<const FrameRecord> frames, const SessionAnalysis& analysis,
                                 const ScenarioSpec& scenario);

struct EfficiencyScore {
  double duration_s = 0.0;
  bool battery_failed = false;  // duration > tau_max
  double score = 0.0;
};

// [w_e0 + w_e1 * max(duration - tau_min, 0)] when the battery held, w_b otherwise.
EfficiencyScore efficiency_score(std::int64_t frame_count, double frame_rate_hz, const JobSpec& job);

// max(w_h*X_h + w_v*X_v + w_o*X_o, floor)
double safety_score(bool human, bool vehicle, int other_count, const ScoringWeights& weights);
double safety_score(const EventLedger& ledger, const ScoringWeights& weights);

// (1+b^2) Pr Rc / (b^2 Pr + Rc); 0 when the denominator vanishes. beta may be
// +infinity (recall only).
double f_beta(double precision, double recall, double beta);

struct AccuracyScore {
  bool applicable = true;  // false when the scenario has no defects
  bool no_snapshots = false;
  double recall = 0.0;
  double precision = 0.0;
  double f_beta = 0.0;
  double score = 0.0;
};

AccuracyScore accuracy_score(int true_detections, int snapshots_taken, int defect_count,
                             const ScoringWeights& weights);

struct Standardized {
  double conformity = 0.0;
  double efficiency = 0.0;
  double safety = 0.0;
  std::optional<double> accuracy;  // absent when not applicable
  bool operator==(const Standardized&) const = default;
};

struct ScoreCard {
  ConformityScore conformity;
  EfficiencyScore efficiency;
  double safety = 0.0;
  AccuracyScore accuracy;
  Standardized standardized;
};

// Affine maps onto [0, 100]: conformity and efficiency from [-100, 100],
// safety from [floor, 0], accuracy from [0, accuracy_gain].
Standardized standardize(const ScoreCard& card, const ScoringWeights& weights);
double standardize_value(double raw, double range_min, double range_max);

ScoreCard score_session(std::span<const FrameRecord> frames, const SessionAnalysis& analysis,
                        const ScenarioSpec& scenario);
ScoreCard score_session(std::span<const FrameRecord> frames, const SessionAnalysis& analysis,
                        const ScenarioSpec& scenario, const ScoringWeights& weights);

struct KiviatAxis {
  std::string name;
  std::optional<double> value;
};
// Fixed axis order: conformity, efficiency, safety, accuracy.
std::array<KiviatAxis, 4> kiviat_data(const Standardized& s);

struct WaterfallStep {
  int task = 0;
  double gain = 0.0;
  double loss = 0.0;
};
struct Waterfall {
  std::vector<WaterfallStep> steps;
  double total = 0.0;  // equals ConformityScore::score
};
Waterfall conformity_waterfall(const ConformityScore& conformity);

// Keys "task1".."taskT" and "transit".
std::map<std::string, int> crash_by_task(const EventLedger& ledger, int task_count);

struct BoxStats {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  std::vector<std::pair<std::string, double>> points;
};

// Quartiles by median of halves, excluding the median for odd counts. A single
// value gives min = Q1 = median = Q3 = max. Throws on an empty sample.
BoxStats box_stats(std::vector<std::pair<std::string, double>> labelled);

struct LabelledCard {
  std::string participant;
  Standardized scores;
};

struct GroupStats {
  BoxStats conformity;
  BoxStats efficiency;
  BoxStats safety;
  BoxStats accuracy;  // participants without an applicable accuracy are skipped
  std::size_t participants = 0;
};

GroupStats group_summary(std::span<const LabelledCard> cards);

}  // namespace bridgesim
