#include "karma/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <istream>
#include <set>

#include "karma/error.hpp"
#include "karma/io.hpp"

namespace karma {

std::vector<PairStats> build_groundtruth(std::span<const Judgment> judgments, const PairPlan& plan) {
  std::map<std::string, std::vector<Judgment>> by_pair;
  std::map<std::string, std::size_t> per_session;
  for (const auto& j : judgments) {
    const Pair* pair = plan.find(j.pair_id);
    if (!pair) throw IntegrityError("judgment log references unknown pair '" + j.pair_id + "'");
    if (pair->subreddit != j.subreddit)
      throw IntegrityError("judgment for '" + j.pair_id + "' carries subreddit '" + j.subreddit + "'");
    by_pair[j.pair_id].push_back(j);
    ++per_session[j.session_id];
  }
  for (const auto& [session, count] : per_session) {
    if (count != kRoundsPerGame)
      throw IntegrityError("session '" + session + "' has " + std::to_string(count) + " judgments, expected " +
                           std::to_string(kRoundsPerGame));
  }
  std::vector<PairStats> out;
  for (const auto& pair : plan.pairs) {
    auto it = by_pair.find(pair.pair_id);
    if (it == by_pair.end()) continue;
    out.push_back(tally_pair(it->second, pair));
  }
  return out;
}

std::vector<DatasetRow> dataset_summary(std::span<const Judgment> judgments, const PairPlan& plan) {
  std::vector<DatasetRow> rows;
  for (const auto& subreddit : plan.subreddits()) {
    DatasetRow row;
    row.subreddit = subreddit;
    std::set<std::string> images;
    for (const auto& p : plan.pairs) {
      if (p.subreddit != subreddit) continue;
      ++row.image_pairs;
      images.insert(p.left.id());
      images.insert(p.right.id());
    }
    row.images = images.size();
    row.judgments = static_cast<std::size_t>(
        std::count_if(judgments.begin(), judgments.end(), [&](const Judgment& j) { return j.subreddit == subreddit; }));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

constexpr std::array<const char*, 5> kQuestions = {"usage", "tenure", "attention", "votes", "votes_new"};

std::array<std::string, 5> answers_of(const QuestionnaireResponse& q) {
  return {std::string(to_string(q.usage)), std::string(to_string(q.tenure)), std::string(to_string(q.attention)),
          std::string(to_string(q.votes)), std::string(to_string(q.votes_new))};
}

// Answer options per question: the "more use" answer, the "less use" answer, nonuser.
std::array<std::string, 3> options_of(std::size_t question) {
  if (question == 0) return {"heavy", "casual", "nonuser"};
  if (question == 1) return {"over_year", "under_year", "nonuser"};
  return {"yes", "no", "nonuser"};
}

}  // namespace

QuestionnaireSummary questionnaire_summary(std::span<const QuestionnaireResponse> responses,
                                           std::size_t completed_sessions) {
  QuestionnaireSummary summary;
  summary.responses = responses.size();
  summary.sessions = completed_sessions;
  for (std::size_t qi = 0; qi < kQuestions.size(); ++qi) {
    for (const auto& option : options_of(qi)) {
      AnswerRow row{kQuestions[qi], option, 0, 0.0};
      for (const auto& r : responses)
        if (answers_of(r)[qi] == option) ++row.count;
      row.percent = responses.empty() ? 0.0 : 100.0 * row.count / responses.size();
      summary.rows.push_back(std::move(row));
    }
  }
  return summary;
}

namespace {

template <typename T, typename F>
Estimate<T> estimate(F&& f) {
  try {
    return {f(), ""};
  } catch (const EstimationError& e) {
    return {std::nullopt, e.what()};
  }
}

Estimate<LogisticResult> correctness_fit(std::span<const PairStats> stats, Predictor predictor,
                                         double PairStats::*regressor) {
  std::vector<double> x;
  std::vector<int> y;
  for (const auto& s : stats) {
    const auto c = s.correct(predictor);
    if (!c) continue;
    x.push_back(s.*regressor);
    y.push_back(*c ? 1 : 0);
  }
  return estimate<LogisticResult>([&] { return logistic_fit(x, y); });
}

}  // namespace

PerPredictor<Estimate<LogisticResult>> agreement_effect(std::span<const PairStats> stats) {
  PerPredictor<Estimate<LogisticResult>> out;
  for (Predictor p : kPredictors) out[p] = correctness_fit(stats, p, &PairStats::kappa);
  return out;
}

Subscribers read_subscribers(std::istream& in) {
  if (!in) throw IoError("subscribers stream is not readable");
  Subscribers out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (io::trim(line).empty()) continue;
    const auto f = io::split_csv(line);
    if (header) {
      header = false;
      if (f.size() != 2 || f[0] != "subreddit" || f[1] != "subscribers_millions")
        throw ValidationError("subscribers file must start with 'subreddit,subscribers_millions'");
      continue;
    }
    if (f.size() != 2) throw ValidationError("subscribers row must have 2 columns");
    const double millions = io::parse_double(f[1]);
    if (millions < 0.0) throw ValidationError("negative subscriber count for '" + f[0] + "'");
    if (!out.emplace(f[0], millions).second) throw ValidationError("duplicate subreddit '" + f[0] + "'");
  }
  return out;
}

PerPredictor<SubredditEffect> subreddit_effect(std::span<const PairStats> stats, const Subscribers& subscribers) {
  std::set<std::string> subreddits;
  for (const auto& s : stats) subreddits.insert(s.subreddit);

  PerPredictor<SubredditEffect> out;
  for (Predictor predictor : kPredictors) {
    SubredditEffect& effect = out[predictor];
    std::vector<double> x, y;
    for (const auto& sub : subreddits) {
      auto it = subscribers.find(sub);
      if (it == subscribers.end()) throw ValidationError("no subscriber count for subreddit '" + sub + "'");
      SubredditPoint point{sub, it->second, 0, 0, std::nullopt, 0.0, 0, std::nullopt};
      for (const auto& s : stats) {
        if (s.subreddit != sub) continue;
        ++point.pairs;
        const auto c = s.correct(predictor);
        if (!c) continue;
        ++point.n;
        if (*c) ++point.correct;
      }
      if (point.n > 0) {
        point.accuracy = static_cast<double>(point.correct) / point.n;
        point.ci_half_width = t_interval_half_width(point.correct, point.n);
      }
      if (point.pairs > 0) {
        point.rate = static_cast<double>(point.correct) / point.pairs;
        x.push_back(point.subscribers_millions);
        y.push_back(*point.rate);
      }
      effect.points.push_back(std::move(point));
    }
    if (x.size() < 3)
      effect.fit = {std::nullopt, "fewer than 3 subreddits with tallied pairs"};
    else
      effect.fit = estimate<OlsResult>([&] { return ols_fit(x, y); });
  }
  return out;
}

BalanceEffect balance_effect(std::span<const PairStats> stats) {
  BalanceEffect out;
  out.total_pairs = stats.size();
  std::size_t non_tie = 0;
  for (const auto& s : stats) {
    if (s.majority == Majority::Tie)
      ++out.tie_pairs;
    else
      ++non_tie;
    out.delta_vs_kappa.push_back({s.pair_id, s.delta, s.kappa, s.reddit_correct, s.imgur_correct});
  }
  for (PairType type : kPairTypes) {
    TypeRow row;
    row.pair_type = type;
    std::size_t type_non_tie = 0;
    for (const auto& s : stats) {
      if (s.pair_type != type) continue;
      ++row.pairs;
      if (s.majority == Majority::Tie) {
        ++row.tie_pairs;
        continue;
      }
      ++type_non_tie;
      for (Predictor p : kPredictors) {
        const auto c = s.correct(p);
        if (!c) continue;
        ++row.accuracy[p].n;
        if (*c) ++row.accuracy[p].correct;
      }
    }
    row.share_percent = non_tie ? 100.0 * type_non_tie / non_tie : 0.0;
    for (Predictor p : kPredictors) {
      auto& acc = row.accuracy[p];
      if (acc.n == 0) continue;
      acc.accuracy = static_cast<double>(acc.correct) / acc.n;
      acc.ci_half_width = t_interval_half_width(acc.correct, acc.n);
    }
    out.types.push_back(std::move(row));
  }
  for (Predictor p : kPredictors) out.delta_fit[p] = correctness_fit(stats, p, &PairStats::delta);
  return out;
}

PlayerAccuracy player_accuracy(std::span<const Judgment> judgments, const PairPlan& plan) {
  if (judgments.empty()) throw EstimationError("player accuracy needs at least one judgment");
  PlayerAccuracy out;
  out.preference.n = out.prediction.n = judgments.size();
  for (const auto& j : judgments) {
    const Pair* pair = plan.find(j.pair_id);
    if (!pair) throw IntegrityError("judgment log references unknown pair '" + j.pair_id + "'");
    if (is_prediction_correct(*pair, j.preference)) ++out.preference.correct;
    if (is_prediction_correct(*pair, j.prediction)) ++out.prediction.correct;
  }
  for (AccuracyEstimate* e : {&out.preference, &out.prediction}) {
    e->accuracy = static_cast<double>(e->correct) / e->n;
    e->ci_half_width = binomial_ci(e->accuracy, e->n);
  }
  return out;
}

bool is_poweruser(const QuestionnaireResponse& q) {
  return q.usage == Usage::Heavy && q.tenure == Tenure::OverYear && q.votes == YesNo::Yes &&
         q.votes_new == YesNo::Yes;
}

bool is_all_nonuser(const QuestionnaireResponse& q) {
  return q.usage == Usage::NonUser && q.tenure == Tenure::NonUser && q.attention == YesNo::NonUser &&
         q.votes == YesNo::NonUser && q.votes_new == YesNo::NonUser;
}

ExpertiseReport expertise_analysis(std::span<const Judgment> judgments,
                                   std::span<const QuestionnaireResponse> responses, double alpha) {
  std::map<std::string, std::pair<int, int>> tallies;  // session -> (correct, total)
  for (const auto& j : judgments) {
    auto& t = tallies[j.session_id];
    t.first += j.prediction_correct ? 1 : 0;
    ++t.second;
  }

  struct Respondent {
    QuestionnaireResponse answers;
    double accuracy;
  };
  std::vector<Respondent> respondents;
  for (const auto& q : responses) {
    auto it = tallies.find(q.session_id);
    if (it == tallies.end()) continue;
    respondents.push_back({q, static_cast<double>(it->second.first) / it->second.second});
  }

  ExpertiseReport report;
  report.alpha = alpha;
  report.respondents = respondents.size();
  for (const auto& r : respondents) {
    if (is_poweruser(r.answers)) {
      ++report.powerusers;
      if (r.answers.attention == YesNo::Yes) ++report.attentive_powerusers;
    }
  }

  using Filter = std::function<bool(const QuestionnaireResponse&)>;
  auto add_test = [&](std::string name, std::string label_a, const Filter& in_a, std::string label_b,
                      const Filter& in_b) {
    std::vector<double> a, b;
    for (const auto& r : respondents) {
      if (in_a(r.answers)) a.push_back(r.accuracy);
      if (in_b(r.answers)) b.push_back(r.accuracy);
    }
    ExpertiseTest test;
    test.name = std::move(name);
    test.group_a = std::move(label_a);
    test.group_b = std::move(label_b);
    test.tails = Tails::One;
    if (a.size() < 2 || b.size() < 2) {
      test.result = {std::nullopt, "fewer than 2 sessions in a group (" + std::to_string(a.size()) + " vs " +
                                       std::to_string(b.size()) + ")"};
    } else {
      test.result = estimate<TestResult>([&] { return welch_t_test(a, b, Tails::One, Direction::GreaterA); });
    }
    report.tests.push_back(std::move(test));
  };

  for (std::size_t qi = 0; qi < kQuestions.size(); ++qi) {
    const auto options = options_of(qi);
    const std::string q = kQuestions[qi];
    auto answer_is = [qi](const std::string& option) {
      return Filter([qi, option](const QuestionnaireResponse& r) { return answers_of(r)[qi] == option; });
    };
    for (int k = 0; k < 2; ++k)
      add_test(q + ":" + options[k] + ">nonuser", q + "=" + options[k], answer_is(options[k]), q + "=nonuser",
               answer_is("nonuser"));
    add_test(q + ":" + options[0] + ">" + options[1], q + "=" + options[0], answer_is(options[0]),
             q + "=" + options[1], answer_is(options[1]));
  }

  const Filter power = is_poweruser;
  const Filter non_power = [](const QuestionnaireResponse& r) { return !is_poweruser(r); };
  const Filter all_nonuser = is_all_nonuser;
  const Filter power_attentive = [](const QuestionnaireResponse& r) {
    return is_poweruser(r) && r.attention == YesNo::Yes;
  };
  const Filter power_inattentive = [](const QuestionnaireResponse& r) {
    return is_poweruser(r) && r.attention == YesNo::No;
  };
  add_test("poweruser>non_poweruser", "poweruser", power, "non_poweruser", non_power);
  add_test("poweruser>all_nonuser", "poweruser", power, "all_nonuser", all_nonuser);
  add_test("poweruser_attention_yes>non_poweruser", "poweruser,attention=yes", power_attentive, "non_poweruser",
           non_power);
  add_test("poweruser_attention_yes>all_nonuser", "poweruser,attention=yes", power_attentive, "all_nonuser",
           all_nonuser);
  add_test("poweruser_attention_no>non_poweruser", "poweruser,attention=no", power_inattentive, "non_poweruser",
           non_power);
  add_test("poweruser_attention_no>all_nonuser", "poweruser,attention=no", power_inattentive, "all_nonuser",
           all_nonuser);

  std::vector<double> p_values;
  for (const auto& t : report.tests)
    if (t.result.ok()) p_values.push_back(t.result.value->p);
  report.battery_size = p_values.size();
  const auto corrected = bonferroni(p_values, alpha);
  std::size_t k = 0;
  for (auto& t : report.tests) {
    if (!t.result.ok()) continue;
    t.threshold = corrected[k].adjusted_threshold;
    t.significant = corrected[k].significant;
    ++k;
  }
  return report;
}

EffortReport effort_analysis(std::span<const Judgment> judgments) {
  EffortReport out;
  out.judgments = judgments.size();
  out.histogram.resize(kHistogramSeconds + 1);
  for (int i = 0; i <= kHistogramSeconds; ++i) out.histogram[i].second = i;

  std::vector<double> correct, incorrect;
  for (const auto& j : judgments) {
    const double seconds = static_cast<double>(j.pref_ms + j.pred_ms) / 1000.0;
    const int bin = std::min(kHistogramSeconds, static_cast<int>(std::floor(seconds)));
    if (j.prediction_correct) {
      correct.push_back(seconds);
      ++out.histogram[bin].correct;
    } else {
      incorrect.push_back(seconds);
      ++out.histogram[bin].incorrect;
    }
  }
  if (correct.size() < 2 || incorrect.size() < 2)
    out.test = {std::nullopt, "need at least 2 correct and 2 incorrect judgments"};
  else
    out.test = estimate<TestResult>([&] { return welch_t_test(correct, incorrect, Tails::Two); });

  std::vector<double> x, y;
  for (const auto& b : out.histogram) {
    const std::size_t total = b.correct + b.incorrect;
    if (total == 0) continue;
    x.push_back(b.second);
    y.push_back(static_cast<double>(b.correct) / total);
  }
  if (x.size() < 3)
    out.accuracy_trend = {std::nullopt, "fewer than 3 non-empty response-time bins"};
  else
    out.accuracy_trend = estimate<OlsResult>([&] { return ols_fit(x, y); });
  return out;
}

}  // namespace karma
