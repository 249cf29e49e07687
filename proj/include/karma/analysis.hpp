#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "karma/game.hpp"
#include "karma/inference.hpp"
#include "karma/pairing.hpp"
#include "karma/stats.hpp"

namespace karma {

// A result that may be "not estimable", with the reason kept for the report.
template <typename T>
struct Estimate {
  std::optional<T> value;
  std::string reason;

  bool ok() const { return value.has_value(); }
};

template <typename T>
struct PerPredictor {
  T reddit;
  T imgur;

  T& operator[](Predictor p) { return p == Predictor::Reddit ? reddit : imgur; }
  const T& operator[](Predictor p) const { return p == Predictor::Reddit ? reddit : imgur; }
};

inline constexpr Predictor kPredictors[] = {Predictor::Reddit, Predictor::Imgur};

// One PairStats per plan pair with at least one judgment, in plan order.
// Throws IntegrityError for unknown pair ids and for sessions that do not
// hold exactly ten judgments.
std::vector<PairStats> build_groundtruth(std::span<const Judgment> judgments, const PairPlan& plan);

struct DatasetRow {
  std::string subreddit;
  std::size_t judgments = 0;
  std::size_t image_pairs = 0;
  std::size_t images = 0;
};

std::vector<DatasetRow> dataset_summary(std::span<const Judgment> judgments, const PairPlan& plan);

struct AnswerRow {
  std::string question;
  std::string answer;
  std::size_t count = 0;
  double percent = 0.0;  // of questionnaire responses
};

struct QuestionnaireSummary {
  std::vector<AnswerRow> rows;
  std::size_t responses = 0;
  std::size_t sessions = 0;
};

QuestionnaireSummary questionnaire_summary(std::span<const QuestionnaireResponse> responses,
                                           std::size_t completed_sessions);

PerPredictor<Estimate<LogisticResult>> agreement_effect(std::span<const PairStats> stats);

using Subscribers = std::map<std::string, double>;  // subreddit -> millions

// "subreddit,subscribers_millions" text.
Subscribers read_subscribers(std::istream& in);

struct SubredditPoint {
  std::string subreddit;
  double subscribers_millions = 0.0;
  std::size_t correct = 0;
  std::size_t n = 0;
  std::optional<double> accuracy;
  double ci_half_width = 0.0;  // t interval
  std::size_t pairs = 0;       // every tallied pair of the subreddit
  std::optional<double> rate;  // correct / pairs; ties and unknown winners count as misses
};

// The regression runs on `rate`, the plotted points show `accuracy`.
struct SubredditEffect {
  std::vector<SubredditPoint> points;  // sorted by subreddit
  Estimate<OlsResult> fit;
};

// Throws ValidationError when a subreddit in stats has no subscriber count.
PerPredictor<SubredditEffect> subreddit_effect(std::span<const PairStats> stats, const Subscribers& subscribers);

struct TypeAccuracy {
  std::size_t correct = 0;
  std::size_t n = 0;
  std::optional<double> accuracy;
  std::optional<double> ci_half_width;  // t interval
};

struct TypeRow {
  PairType pair_type = PairType::VH_VH;
  std::size_t pairs = 0;       // all pairs of this type
  std::size_t tie_pairs = 0;   // excluded majority ties
  double share_percent = 0.0;  // of all non-tie pairs
  PerPredictor<TypeAccuracy> accuracy;
};

struct DeltaKappaRow {
  std::string pair_id;
  double delta = 0.0;
  double kappa = 0.0;
  std::optional<bool> reddit_correct;
  std::optional<bool> imgur_correct;
};

struct BalanceEffect {
  std::vector<TypeRow> types;  // always the six permitted types, in order
  PerPredictor<Estimate<LogisticResult>> delta_fit;
  std::vector<DeltaKappaRow> delta_vs_kappa;
  std::size_t total_pairs = 0;
  std::size_t tie_pairs = 0;
};

BalanceEffect balance_effect(std::span<const PairStats> stats);

struct PlayerAccuracy {
  AccuracyEstimate preference;
  AccuracyEstimate prediction;
};

// Counts judgments whose chosen side has the strictly higher score.
PlayerAccuracy player_accuracy(std::span<const Judgment> judgments, const PairPlan& plan);

struct ExpertiseTest {
  std::string name;
  std::string group_a;
  std::string group_b;
  Tails tails = Tails::One;
  Estimate<TestResult> result;
  std::optional<double> threshold;  // Bonferroni-adjusted alpha, when estimable
  bool significant = false;
};

struct ExpertiseReport {
  std::vector<ExpertiseTest> tests;
  std::size_t battery_size = 0;  // estimable tests
  double alpha = 0.05;
  std::size_t respondents = 0;
  std::size_t powerusers = 0;
  std::size_t attentive_powerusers = 0;
};

// Heavy usage, over a year of tenure, votes on posts and on new posts.
bool is_poweruser(const QuestionnaireResponse& q);
bool is_all_nonuser(const QuestionnaireResponse& q);

// One-tailed Welch tests on per-session prediction accuracy, Bonferroni
// corrected over the estimable tests.
ExpertiseReport expertise_analysis(std::span<const Judgment> judgments,
                                   std::span<const QuestionnaireResponse> responses, double alpha = 0.05);

inline constexpr int kHistogramSeconds = 30;

struct HistogramBin {
  int second = 0;  // [second, second+1); the last bin collects everything >= 30 s
  std::size_t correct = 0;
  std::size_t incorrect = 0;
};

struct EffortReport {
  Estimate<TestResult> test;  // correct vs incorrect, two-tailed
  std::vector<HistogramBin> histogram;
  Estimate<OlsResult> accuracy_trend;  // per-bin accuracy vs bin index
  std::size_t judgments = 0;
};

// Response time of a judgment is pref_ms + pred_ms.
EffortReport effort_analysis(std::span<const Judgment> judgments);

}  // namespace karma
