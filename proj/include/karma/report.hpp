#pragma once

#include <span>
#include <string>
#include <vector>

#include "karma/analysis.hpp"

namespace karma {

// Everything derived from the groundtruth table alone.
struct GroundtruthAnalysis {
  PerPredictor<Estimate<AccuracyEstimate>> overall;
  Estimate<PredictorAgreement> predictor_agreement;
  PerPredictor<Estimate<LogisticResult>> agreement;
  PerPredictor<SubredditEffect> subreddit;
  BalanceEffect balance;
};

// plan_corpus feeds the score/views correlation; pass plan_entries(plan).
GroundtruthAnalysis analyze_groundtruth(std::span<const PairStats> stats, const Subscribers& subscribers,
                                        std::span<const CorpusEntry> plan_corpus);

struct Report {
  std::vector<DatasetRow> dataset;
  QuestionnaireSummary questionnaire;
  std::vector<PairStats> pair_stats;
  GroundtruthAnalysis groundtruth;
  Estimate<PlayerAccuracy> players;
  ExpertiseReport expertise;
  EffortReport effort;
};

Report build_report(std::span<const Judgment> judgments, std::span<const QuestionnaireResponse> questionnaires,
                    const PairPlan& plan, const Subscribers& subscribers);

// Full report as a JSON document (deterministic key order).
std::string report_json(const Report& report);
std::string groundtruth_json(const GroundtruthAnalysis& analysis);

// File names written by emit_report besides report.json and pair_stats.csv.
const std::vector<std::string>& report_tables();

// Writes report.json, pair_stats.csv and the ten tables into out_dir,
// creating it if needed. Throws IoError when the directory is unwritable.
void emit_report(const Report& report, const std::string& out_dir);

}  // namespace karma
