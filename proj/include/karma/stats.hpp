#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "karma/game.hpp"
#include "karma/pairing.hpp"

namespace karma {

enum class Majority { Left, Right, Tie };
enum class Winner { Left, Right, Tie, Unknown };
enum class Predictor { Reddit, Imgur };

std::string_view to_string(Majority m);
std::string_view to_string(Winner w);
std::string_view to_string(Predictor p);
Majority majority_from_string(std::string_view text);
Winner winner_from_string(std::string_view text);

// Aggregated groundtruth for one pair.
struct PairStats {
  std::string pair_id;
  std::string subreddit;
  PairType pair_type = PairType::VH_VH;
  std::size_t n_raters = 0;
  std::size_t votes_left = 0;
  std::size_t votes_right = 0;
  Majority majority = Majority::Tie;
  double kappa = 0.0;
  double delta = 0.0;  // |percentile(left) - percentile(right)|
  Winner reddit_winner = Winner::Unknown;
  Winner imgur_winner = Winner::Unknown;
  std::optional<bool> reddit_correct;
  std::optional<bool> imgur_correct;

  std::optional<bool> correct(Predictor p) const { return p == Predictor::Reddit ? reddit_correct : imgur_correct; }
  bool operator==(const PairStats&) const = default;
};

// Agreement among one pair's raters on a binary forced choice:
// kappa = 2 * P_o - 1 with P_o = [a(a-1) + b(b-1)] / [n(n-1)].
// Throws EstimationError when fewer than two raters.
double fleiss_kappa_pair(std::size_t votes_left, std::size_t votes_right);

// Throws IntegrityError if a judgment belongs to another pair, EstimationError
// for an empty judgment list.
PairStats tally_pair(std::span<const Judgment> judgments, const Pair& pair);

// Normal-approximation half width z * sqrt(p(1-p)/n).
double binomial_ci(double p, std::size_t n, double z = 1.959964);

// Student-t interval on the mean of 0/1 outcomes:
// t_{0.975, n-1} * sqrt(p(1-p)/(n-1)). Zero for n < 2.
double t_interval_half_width(std::size_t correct, std::size_t n);

struct AccuracyEstimate {
  std::size_t correct = 0;
  std::size_t n = 0;
  double accuracy = 0.0;
  double ci_half_width = 0.0;
};

// Accuracy over pairs with defined correctness (majority ties and unknown
// winners excluded). Throws EstimationError when no pair qualifies.
AccuracyEstimate predictor_accuracy(std::span<const PairStats> stats, Predictor predictor);

struct PredictorAgreement {
  double match_rate = 0.0;
  std::size_t matched_pairs = 0;  // denominator of match_rate
  double r_squared = 0.0;
  std::size_t correlated_entries = 0;
};

// match_rate over pairs where both predictors name a side; r_squared is the
// squared Pearson correlation of signed log10(1+|score|) against
// log10(1+views) across the given entries that have a view count.
PredictorAgreement predictor_agreement(std::span<const PairStats> stats, std::span<const CorpusEntry> entries);

// Distinct corpus entries referenced by the plan, in first-seen order.
std::vector<CorpusEntry> plan_entries(const PairPlan& plan);

void write_pair_stats_csv(std::ostream& out, std::span<const PairStats> stats);
std::vector<PairStats> read_pair_stats_csv(std::istream& in);

}  // namespace karma
