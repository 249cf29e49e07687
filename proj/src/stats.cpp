#include "karma/stats.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include "karma/error.hpp"
#include "karma/inference.hpp"
#include "karma/io.hpp"
#include "karma/special.hpp"

namespace karma {

std::string_view to_string(Majority m) {
  switch (m) {
    case Majority::Left: return "L";
    case Majority::Right: return "R";
    case Majority::Tie: return "tie";
  }
  return "?";
}

std::string_view to_string(Winner w) {
  switch (w) {
    case Winner::Left: return "L";
    case Winner::Right: return "R";
    case Winner::Tie: return "tie";
    case Winner::Unknown: return "unknown";
  }
  return "?";
}

std::string_view to_string(Predictor p) { return p == Predictor::Reddit ? "reddit" : "imgur"; }

Majority majority_from_string(std::string_view text) {
  for (Majority m : {Majority::Left, Majority::Right, Majority::Tie})
    if (to_string(m) == text) return m;
  throw ValidationError("unknown majority '" + std::string(text) + "'");
}

Winner winner_from_string(std::string_view text) {
  for (Winner w : {Winner::Left, Winner::Right, Winner::Tie, Winner::Unknown})
    if (to_string(w) == text) return w;
  throw ValidationError("unknown winner '" + std::string(text) + "'");
}

double fleiss_kappa_pair(std::size_t votes_left, std::size_t votes_right) {
  const std::size_t n = votes_left + votes_right;
  if (n < 2) throw EstimationError("agreement is undefined for fewer than two raters");
  // 2 * P_o - 1 over a common integer denominator, so only one rounding happens.
  const auto a = static_cast<std::int64_t>(votes_left);
  const auto b = static_cast<std::int64_t>(votes_right);
  const auto pairs = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1);
  const std::int64_t numerator = 2 * (a * (a - 1) + b * (b - 1)) - pairs;
  return static_cast<double>(numerator) / static_cast<double>(pairs);
}

namespace {

template <typename T>
Winner compare(T left, T right) {
  if (left > right) return Winner::Left;
  if (right > left) return Winner::Right;
  return Winner::Tie;
}

std::optional<bool> correctness(Majority majority, Winner winner) {
  if (majority == Majority::Tie || winner == Winner::Tie || winner == Winner::Unknown) return std::nullopt;
  return (majority == Majority::Left) == (winner == Winner::Left);
}

}  // namespace

PairStats tally_pair(std::span<const Judgment> judgments, const Pair& pair) {
  if (judgments.empty()) throw EstimationError("pair '" + pair.pair_id + "' has no judgments");
  PairStats s;
  s.pair_id = pair.pair_id;
  s.subreddit = pair.subreddit;
  s.pair_type = pair.pair_type;
  for (const auto& j : judgments) {
    if (j.pair_id != pair.pair_id)
      throw IntegrityError("judgment for '" + j.pair_id + "' tallied under '" + pair.pair_id + "'");
    (j.preference == Side::Left ? s.votes_left : s.votes_right)++;
  }
  s.n_raters = judgments.size();
  s.majority = s.votes_left > s.votes_right   ? Majority::Left
               : s.votes_right > s.votes_left ? Majority::Right
                                              : Majority::Tie;
  // A single rater agrees with itself.
  s.kappa = s.n_raters >= 2 ? fleiss_kappa_pair(s.votes_left, s.votes_right) : 1.0;
  s.delta = std::abs(pair.left.percentile - pair.right.percentile);
  s.reddit_winner = compare(pair.left.score(), pair.right.score());
  s.imgur_winner =
      pair.left.views && pair.right.views ? compare(*pair.left.views, *pair.right.views) : Winner::Unknown;
  s.reddit_correct = correctness(s.majority, s.reddit_winner);
  s.imgur_correct = correctness(s.majority, s.imgur_winner);
  return s;
}

double binomial_ci(double p, std::size_t n, double z) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("binomial_ci: p outside [0, 1]");
  if (n == 0) throw ValidationError("binomial_ci: n must be positive");
  return z * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

double t_interval_half_width(std::size_t correct, std::size_t n) {
  if (correct > n) throw ValidationError("t_interval_half_width: correct exceeds n");
  if (n < 2) return 0.0;
  const double p = static_cast<double>(correct) / n;
  const double df = static_cast<double>(n - 1);
  return special::student_t_quantile(0.975, df) * std::sqrt(p * (1.0 - p) / df);
}

AccuracyEstimate predictor_accuracy(std::span<const PairStats> stats, Predictor predictor) {
  AccuracyEstimate est;
  for (const auto& s : stats) {
    const auto c = s.correct(predictor);
    if (!c) continue;
    ++est.n;
    if (*c) ++est.correct;
  }
  if (est.n == 0)
    throw EstimationError("no pairs with defined " + std::string(to_string(predictor)) + " correctness");
  est.accuracy = static_cast<double>(est.correct) / est.n;
  est.ci_half_width = binomial_ci(est.accuracy, est.n);
  return est;
}

PredictorAgreement predictor_agreement(std::span<const PairStats> stats, std::span<const CorpusEntry> entries) {
  PredictorAgreement out;
  std::size_t same = 0;
  for (const auto& s : stats) {
    const bool reddit_sided = s.reddit_winner == Winner::Left || s.reddit_winner == Winner::Right;
    const bool imgur_sided = s.imgur_winner == Winner::Left || s.imgur_winner == Winner::Right;
    if (!reddit_sided || !imgur_sided) continue;
    ++out.matched_pairs;
    if (s.reddit_winner == s.imgur_winner) ++same;
  }
  out.match_rate = out.matched_pairs ? static_cast<double>(same) / out.matched_pairs : 0.0;

  std::vector<double> scores, views;
  for (const auto& e : entries) {
    if (!e.views) continue;
    const double score = static_cast<double>(e.score());
    scores.push_back(std::copysign(std::log10(1.0 + std::abs(score)), score));
    views.push_back(std::log10(1.0 + static_cast<double>(*e.views)));
  }
  out.correlated_entries = scores.size();
  const double r = pearson_r(scores, views);
  out.r_squared = r * r;
  return out;
}

std::vector<CorpusEntry> plan_entries(const PairPlan& plan) {
  std::vector<CorpusEntry> out;
  std::set<std::string> seen;
  for (const auto& p : plan.pairs) {
    for (const auto* e : {&p.left, &p.right})
      if (seen.insert(e->id()).second) out.push_back(*e);
  }
  return out;
}

namespace {

constexpr std::string_view kPairStatsHeader =
    "pair_id,subreddit,pair_type,n,votes_l,votes_r,majority,kappa,delta,reddit_winner,imgur_winner,reddit_correct,"
    "imgur_correct";

std::string optional_bool(const std::optional<bool>& b) {
  if (!b) return "";
  return *b ? "1" : "0";
}

std::optional<bool> parse_optional_bool(const std::string& text) {
  if (text.empty()) return std::nullopt;
  if (text == "1") return true;
  if (text == "0") return false;
  throw ValidationError("expected 0, 1 or empty, got '" + text + "'");
}

}  // namespace

void write_pair_stats_csv(std::ostream& out, std::span<const PairStats> stats) {
  out << kPairStatsHeader << "\n";
  for (const auto& s : stats) {
    out << s.pair_id << ',' << s.subreddit << ',' << to_string(s.pair_type) << ',' << s.n_raters << ','
        << s.votes_left << ',' << s.votes_right << ',' << to_string(s.majority) << ',' << io::format_double(s.kappa)
        << ',' << io::format_double(s.delta) << ',' << to_string(s.reddit_winner) << ','
        << to_string(s.imgur_winner) << ',' << optional_bool(s.reddit_correct) << ','
        << optional_bool(s.imgur_correct) << "\n";
  }
}

std::vector<PairStats> read_pair_stats_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || io::trim(line) != kPairStatsHeader)
    throw ValidationError("pair stats table has an unexpected header");
  std::vector<PairStats> out;
  while (std::getline(in, line)) {
    if (io::trim(line).empty()) continue;
    const auto f = io::split_csv(line);
    if (f.size() != 13) throw ValidationError("pair stats row has " + std::to_string(f.size()) + " columns");
    PairStats s;
    s.pair_id = f[0];
    s.subreddit = f[1];
    s.pair_type = pair_type_from_string(f[2]);
    s.n_raters = static_cast<std::size_t>(io::parse_int(f[3]));
    s.votes_left = static_cast<std::size_t>(io::parse_int(f[4]));
    s.votes_right = static_cast<std::size_t>(io::parse_int(f[5]));
    s.majority = majority_from_string(f[6]);
    s.kappa = io::parse_double(f[7]);
    s.delta = io::parse_double(f[8]);
    s.reddit_winner = winner_from_string(f[9]);
    s.imgur_winner = winner_from_string(f[10]);
    s.reddit_correct = parse_optional_bool(f[11]);
    s.imgur_correct = parse_optional_bool(f[12]);
    if (s.votes_left + s.votes_right != s.n_raters) throw ValidationError("vote counts do not sum to n");
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace karma
