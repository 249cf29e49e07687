#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "karma/analysis.hpp"
#include "karma/error.hpp"
#include "karma/report.hpp"
#include "karma/simulate.hpp"

#include <json.hpp>

using namespace karma;

namespace {

struct World {
  std::vector<CorpusEntry> corpus = fixtures::corpus(fixtures::eight_subreddits(), 200, 31);
  PairPlan plan = fixtures::plan(corpus);
  Subscribers subscribers = {{"CrappyDesign", 0.174044}, {"EarthPorn", 10.450075}, {"OldSchoolCool", 7.058654},
                             {"aww", 8.809353},          {"funny", 5.064231},      {"itookapicture", 0.247151},
                             {"photocritique", 0.03656}, {"pics", 18.399582}};
};

const World& world() {
  static const World w;
  return w;
}

PairStats synthetic(PairType type, bool tie, std::optional<bool> reddit, std::optional<bool> imgur,
                    const std::string& sub = "pics", double delta = 0.3, double kappa = 0.2) {
  static int counter = 0;
  PairStats s;
  s.pair_id = sub + ":" + std::to_string(counter++);
  s.subreddit = sub;
  s.pair_type = type;
  s.n_raters = 10;
  s.majority = tie ? Majority::Tie : Majority::Left;
  s.reddit_correct = tie ? std::nullopt : reddit;
  s.imgur_correct = tie ? std::nullopt : imgur;
  s.delta = delta;
  s.kappa = kappa;
  return s;
}

// Ten judgments per session with chosen correctness; pairs from one subreddit.
std::vector<Judgment> session_log(const PairPlan& plan, const std::string& sid, int correct, std::int64_t ms = 4000,
                                  const std::string& sub = "pics") {
  std::vector<Judgment> out;
  int r = 0;
  for (const auto& p : plan.pairs) {
    if (p.subreddit != sub) continue;
    if (r == 10) break;
    Judgment j;
    j.session_id = sid;
    j.pair_id = p.pair_id;
    j.subreddit = sub;
    const Side hi = p.left.score() > p.right.score() ? Side::Left : Side::Right;
    const Side lo = hi == Side::Left ? Side::Right : Side::Left;
    j.prediction = r < correct ? hi : lo;
    j.preference = j.prediction;
    j.prediction_correct = r < correct;
    j.pref_ms = ms / 2;
    j.pred_ms = ms - ms / 2;
    out.push_back(j);
    ++r;
  }
  return out;
}

QuestionnaireResponse answers(const std::string& sid, Usage u, Tenure t = Tenure::NonUser, YesNo a = YesNo::NonUser,
                              YesNo v = YesNo::NonUser, YesNo vn = YesNo::NonUser) {
  return {sid, u, t, a, v, vn};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("build_groundtruth") {
  const auto& plan = world().plan;
  CHECK(build_groundtruth({}, plan).empty());

  auto oracle = simulate_players(plan, PlayerModel{PlayerModel::Preference::HigherScore}, 400, 1);
  auto stats = build_groundtruth(oracle.log.judgments, plan);
  CHECK(stats.size() == 400);
  for (std::size_t i = 1; i < stats.size(); ++i) CHECK(plan.find(stats[i].pair_id) > plan.find(stats[i - 1].pair_id));

  auto bad = session_log(plan, "s", 5);
  bad[3].pair_id = "pics:999";
  CHECK_THROWS_AS(build_groundtruth(bad, plan), IntegrityError);

  auto partial = session_log(plan, "s", 5);
  partial.pop_back();
  CHECK_THROWS_AS(build_groundtruth(partial, plan), IntegrityError);

  auto wrong_sub = session_log(plan, "s", 5);
  wrong_sub[0].subreddit = "aww";
  CHECK_THROWS_AS(build_groundtruth(wrong_sub, plan), IntegrityError);
}

TEST_CASE("dataset and questionnaire summaries") {
  const auto& plan = world().plan;
  std::vector<Judgment> log = session_log(plan, "a", 5);
  auto more = session_log(plan, "b", 7);
  log.insert(log.end(), more.begin(), more.end());
  auto rows = dataset_summary(log, plan);
  REQUIRE(rows.size() == 8);
  for (const auto& r : rows) {
    if (r.subreddit == "pics") {
      CHECK(r.judgments == 20);
      CHECK(r.image_pairs == 50);  // plan pairs, as in the dataset table
      CHECK(r.images <= 100);
    } else {
      CHECK(r.judgments == 0);
      CHECK(r.image_pairs == 50);
    }
  }

  std::vector<QuestionnaireResponse> qs = {answers("a", Usage::Heavy), answers("b", Usage::Casual),
                                           answers("c", Usage::Heavy)};
  auto q = questionnaire_summary(qs, 4);
  CHECK(q.responses == 3);
  CHECK(q.sessions == 4);
  CHECK(q.rows.size() == 15);
  CHECK(q.rows[0].question == "usage");
  CHECK(q.rows[0].answer == "heavy");
  CHECK(q.rows[0].count == 2);
  CHECK(q.rows[0].percent == doctest::Approx(200.0 / 3));
  for (std::size_t i = 0; i < q.rows.size(); i += 3)
    CHECK(q.rows[i].count + q.rows[i + 1].count + q.rows[i + 2].count == 3);
}

TEST_CASE("agreement effect") {
  std::vector<PairStats> all_correct;
  for (int i = 0; i < 20; ++i) all_correct.push_back(synthetic(PairType::VH_H, false, true, true, "pics", 0.3, i / 20.0));
  auto r = agreement_effect(all_correct);
  CHECK_FALSE(r.reddit.ok());
  CHECK_FALSE(r.reddit.reason.empty());

  // recover a known generator
  Rng rng(2);
  std::vector<PairStats> stats;
  for (int i = 0; i < 400; ++i) {
    const double kappa = rng.uniform() * 2 - 1;
    const bool c = rng.bernoulli(1 / (1 + std::exp(-(0.4 + 1.2 * kappa))));
    stats.push_back(synthetic(PairType::VH_H, false, c, c, "pics", 0.3, kappa));
  }
  auto fit = agreement_effect(stats);
  REQUIRE(fit.reddit.ok());
  CHECK(std::abs(fit.reddit.value->slope - 1.2) <= 3 * fit.reddit.value->slope_se);
}

TEST_CASE("subreddit effect") {
  const auto& subs = world().subscribers;
  // rates per subreddit: correct out of 50 pairs, a few ties
  const std::map<std::string, std::pair<int, int>> counts = {
      {"photocritique", {34, 0}}, {"CrappyDesign", {41, 0}}, {"itookapicture", {37, 2}}, {"funny", {32, 0}},
      {"OldSchoolCool", {35, 1}}, {"aww", {31, 2}},          {"EarthPorn", {32, 0}},     {"pics", {26, 1}}};
  std::vector<PairStats> stats;
  for (const auto& [sub, c] : counts)
    for (int i = 0; i < 50; ++i) {
      const bool tie = i >= 50 - c.second;
      stats.push_back(synthetic(PairType::VH_H, tie, i < c.first, i < c.first, sub));
    }
  auto r = subreddit_effect(stats, subs);
  REQUIRE(r.reddit.fit.ok());
  const auto& fit = *r.reddit.fit.value;
  CHECK(std::abs(fit.slope + 0.011949) <= 0.0002);
  CHECK(std::abs(fit.intercept - 0.745037) <= 0.001);
  CHECK(std::abs(fit.r2 - 0.74) <= 0.01);
  CHECK(std::abs(fit.p_value - 0.0063) <= 0.0007);
  for (const auto& pt : r.reddit.points) {
    CHECK(pt.pairs == 50);
    CHECK(pt.n == 50 - static_cast<std::size_t>(counts.at(pt.subreddit).second));
    CHECK(*pt.accuracy == doctest::Approx(static_cast<double>(pt.correct) / pt.n));
  }
  const auto* aww = &r.reddit.points[0];
  for (const auto& pt : r.reddit.points)
    if (pt.subreddit == "aww") aww = &pt;
  CHECK(*aww->accuracy == doctest::Approx(0.645833333333));
  CHECK(aww->ci_half_width == doctest::Approx(0.140341819471).epsilon(1e-6));

  // order invariance
  std::vector<PairStats> reversed(stats.rbegin(), stats.rend());
  auto again = subreddit_effect(reversed, subs);
  CHECK(again.reddit.fit.value->slope == doctest::Approx(fit.slope).epsilon(1e-12));

  // one shared accuracy everywhere
  std::vector<PairStats> flat;
  for (const auto& [sub, c] : counts)
    for (int i = 0; i < 10; ++i) flat.push_back(synthetic(PairType::VH_H, false, i < 7, i < 7, sub));
  auto level = subreddit_effect(flat, subs);
  CHECK(level.reddit.fit.value->slope == doctest::Approx(0.0));
  CHECK(level.reddit.fit.value->r2 == 0.0);

  Subscribers missing = subs;
  missing.erase("pics");
  CHECK_THROWS_AS(subreddit_effect(stats, missing), ValidationError);

  std::istringstream in("subreddit,subscribers_millions\npics,18.399582\nphotocritique,0.03656\n");
  auto read = read_subscribers(in);
  CHECK(read.at("pics") == 18.399582);
  std::istringstream bad("pics,18\n");
  CHECK_THROWS_AS(read_subscribers(bad), ValidationError);
}

TEST_CASE("balance effect strata") {
  const std::vector<std::pair<int, int>> strata = {{78, 124}, {56, 81}, {63, 94}, {41, 59}, {6, 7}, {10, 11}};
  const double heights[] = {0.6290, 0.6914, 0.6702, 0.6949, 0.8571, 0.9091};
  const double bars[] = {0.0862172229059, 0.102778179916, 0.0968094375418, 0.12102217529, 0.349558835542,
                         0.202558077451};
  std::vector<PairStats> stats;
  for (std::size_t t = 0; t < 6; ++t)
    for (int i = 0; i < strata[t].second; ++i)
      stats.push_back(synthetic(kPairTypes[t], false, i < strata[t].first, i < strata[t].first, "pics",
                                0.1 * static_cast<double>(t) + 0.01 * (i % 7)));
  for (int i = 0; i < 24; ++i) stats.push_back(synthetic(kPairTypes[i % 6], true, std::nullopt, std::nullopt));

  auto b = balance_effect(stats);
  REQUIRE(b.types.size() == 6);
  CHECK(b.total_pairs == 400);
  CHECK(b.tie_pairs == 24);
  std::size_t denominators = 0;
  for (std::size_t t = 0; t < 6; ++t) {
    const auto& row = b.types[t];
    CHECK(row.pair_type == kPairTypes[t]);
    CHECK(row.accuracy.reddit.n == static_cast<std::size_t>(strata[t].second));
    CHECK(std::round(*row.accuracy.reddit.accuracy * 1e4) / 1e4 == heights[t]);
    CHECK(std::abs(*row.accuracy.reddit.ci_half_width - bars[t]) < 1e-3);
    CHECK(row.share_percent == doctest::Approx(100.0 * strata[t].second / 376));
    denominators += row.accuracy.reddit.n;
  }
  CHECK(b.total_pairs - denominators == b.tie_pairs);
  CHECK(b.delta_vs_kappa.size() == 400);
  CHECK(b.delta_fit.reddit.ok());

  // a type with no eligible pairs still has a row
  std::vector<PairStats> few = {synthetic(PairType::VH_VH, false, true, true), synthetic(PairType::VH_VH, false, false, false)};
  auto sparse = balance_effect(few);
  REQUIRE(sparse.types.size() == 6);
  CHECK_FALSE(sparse.types[5].accuracy.reddit.accuracy);

  // constant delta is not estimable but the table is kept
  std::vector<PairStats> flat;
  for (int i = 0; i < 30; ++i) flat.push_back(synthetic(PairType::VH_H, false, i % 3 == 0, i % 2 == 0, "pics", 0.0));
  auto zero = balance_effect(flat);
  CHECK_FALSE(zero.delta_fit.reddit.ok());
  CHECK(zero.types[2].accuracy.reddit.n == 30);
}

TEST_CASE("player accuracy") {
  const auto& plan = world().plan;
  auto perfect = session_log(plan, "a", 10);
  auto pa = player_accuracy(perfect, plan);
  CHECK(pa.preference.accuracy == 1.0);
  CHECK(pa.prediction.accuracy == 1.0);

  auto five = session_log(plan, "a", 3);
  five.resize(5);
  CHECK(player_accuracy(five, plan).prediction.accuracy == 0.6);

  // flip placement: new plan with sides swapped and choices mirrored
  PairPlan flipped = plan;
  for (auto& p : flipped.pairs) std::swap(p.left, p.right);
  auto log = session_log(plan, "a", 6);
  auto mirrored = log;
  for (auto& j : mirrored) {
    j.preference = j.preference == Side::Left ? Side::Right : Side::Left;
    j.prediction = j.prediction == Side::Left ? Side::Right : Side::Left;
  }
  auto x = player_accuracy(log, plan), y = player_accuracy(mirrored, flipped);
  CHECK(x.prediction.accuracy == y.prediction.accuracy);
  CHECK(x.preference.accuracy == y.preference.accuracy);
  CHECK(x.prediction.ci_half_width == doctest::Approx(binomial_ci(0.6, 10)));
}

TEST_CASE("expertise battery") {
  const auto& plan = world().plan;
  std::vector<Judgment> log;
  std::vector<QuestionnaireResponse> qs;
  Rng rng(4);
  auto add = [&](const std::string& sid, int correct, QuestionnaireResponse q) {
    auto s = session_log(plan, sid, correct);
    log.insert(log.end(), s.begin(), s.end());
    q.session_id = sid;
    qs.push_back(q);
  };

  // identical accuracy everywhere
  for (int i = 0; i < 30; ++i)
    add("s" + std::to_string(i), 6,
        answers("", static_cast<Usage>(i % 3), static_cast<Tenure>(i % 3), static_cast<YesNo>(i % 3),
                static_cast<YesNo>(i % 3), static_cast<YesNo>(i % 3)));
  auto flat = expertise_analysis(log, qs);
  CHECK(flat.tests.size() == 21);
  for (const auto& t : flat.tests) {
    CHECK_FALSE(t.significant);
    if (t.result.ok()) CHECK(t.result.value->t == 0.0);
  }

  // heavy players planted +0.3 above nonusers
  log.clear();
  qs.clear();
  for (int i = 0; i < 60; ++i) {
    const bool heavy = i % 2 == 0;
    const int base = 4 + static_cast<int>(rng.index(3));
    add("h" + std::to_string(i), heavy ? base + 3 : base, answers("", heavy ? Usage::Heavy : Usage::NonUser));
  }
  auto planted = expertise_analysis(log, qs);
  const ExpertiseTest* heavy_vs_non = nullptr;
  for (const auto& t : planted.tests)
    if (t.name == "usage:heavy>nonuser") heavy_vs_non = &t;
  REQUIRE(heavy_vs_non);
  REQUIRE(heavy_vs_non->result.ok());
  CHECK(heavy_vs_non->significant);
  CHECK(*heavy_vs_non->threshold == doctest::Approx(0.05 / planted.battery_size));

  // no nonuser answers at all: those baselines drop out of m
  log.clear();
  qs.clear();
  for (int i = 0; i < 20; ++i)
    add("n" + std::to_string(i), 3 + i % 5,
        answers("", i % 2 ? Usage::Heavy : Usage::Casual, i % 2 ? Tenure::OverYear : Tenure::UnderYear,
                i % 2 ? YesNo::Yes : YesNo::No, i % 2 ? YesNo::Yes : YesNo::No, i % 2 ? YesNo::Yes : YesNo::No));
  auto no_base = expertise_analysis(log, qs);
  std::size_t estimable = 0;
  for (const auto& t : no_base.tests) {
    if (t.group_b.find("nonuser") != std::string::npos) CHECK_FALSE(t.result.ok());
    estimable += t.result.ok();
  }
  CHECK(no_base.battery_size == estimable);
  CHECK(estimable > 0);
  CHECK(no_base.powerusers == 10);
  CHECK(no_base.attentive_powerusers == 10);
}

TEST_CASE("effort analysis") {
  const auto& plan = world().plan;
  std::vector<Judgment> log;
  Rng rng(6);
  for (int s = 0; s < 80; ++s) {
    auto js = session_log(plan, "e" + std::to_string(s), 5);
    for (auto& j : js) {
      const double base = 2000 + 20000 * rng.uniform();
      const double total = base + (j.prediction_correct ? 0 : 10000);
      j.pref_ms = static_cast<std::int64_t>(total / 2);
      j.pred_ms = static_cast<std::int64_t>(total / 2);
    }
    log.insert(log.end(), js.begin(), js.end());
  }
  auto slow = effort_analysis(log);
  REQUIRE(slow.test.ok());
  CHECK(slow.test.value->p < 0.01);
  std::size_t total = 0;
  for (const auto& b : slow.histogram) total += b.correct + b.incorrect;
  CHECK(total == log.size());
  CHECK(slow.histogram.size() == 31);
  CHECK(slow.histogram.back().correct + slow.histogram.back().incorrect > 0);

  // same times for both outcomes
  for (auto& j : log) j.pref_ms = j.pred_ms = 3000 + (j.session_id.size() % 2) * 500 + (j.pair_id.back() - '0') * 100;
  std::vector<Judgment> balanced;
  for (std::size_t i = 0; i < log.size(); i += 10)
    for (int k = 0; k < 10; ++k) {
      Judgment j = log[i + k];
      j.prediction_correct = k % 2 == 0;
      j.pref_ms = j.pred_ms = 1000 * (k / 2);
      balanced.push_back(j);
    }
  auto same = effort_analysis(balanced);
  REQUIRE(same.test.ok());
  CHECK(same.test.value->p == doctest::Approx(1.0));

  for (auto& j : log) j.prediction_correct = true;
  CHECK_FALSE(effort_analysis(log).test.ok());
}

TEST_CASE("report emission") {
  const auto& w = world();
  PlayerModel model;
  model.abandon_rate = 0.1;
  auto sim = simulate_players(w.plan, model, 300, 9);
  auto report = build_report(sim.log.judgments, sim.log.questionnaires, w.plan, w.subscribers);
  const auto dir = std::filesystem::temp_directory_path() / "karma_report_test";
  std::filesystem::remove_all(dir);
  emit_report(report, (dir / "a").string());
  emit_report(report, (dir / "b").string());
  for (const auto& name : report_tables()) {
    CHECK(std::filesystem::exists(dir / "a" / name));
    CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
  }
  CHECK(report_tables().size() == 10);
  CHECK(slurp(dir / "a" / "report.json") == slurp(dir / "b" / "report.json"));

  // fig4 has one row per permitted type
  std::ifstream fig4(dir / "a" / "fig4_types.csv");
  std::string line;
  int rows = -1;
  while (std::getline(fig4, line)) ++rows;
  CHECK(rows == 6);

  // groundtruth survives the csv round trip
  std::ifstream csv(dir / "a" / "pair_stats.csv");
  auto back = read_pair_stats_csv(csv);
  CHECK(back == report.pair_stats);
  const auto entries = plan_entries(w.plan);
  CHECK(groundtruth_json(analyze_groundtruth(back, w.subscribers, entries)) ==
        groundtruth_json(report.groundtruth));

  // bounds on every emitted accuracy, ci and p
  auto doc = nlohmann::json::parse(slurp(dir / "a" / "report.json"));
  std::function<void(const nlohmann::json&, const std::string&)> walk = [&](const nlohmann::json& j,
                                                                           const std::string& key) {
    if (j.is_object()) {
      if (key == "reference_values") return;
      for (auto it = j.begin(); it != j.end(); ++it) walk(it.value(), it.key());
    } else if (j.is_array()) {
      for (const auto& v : j) walk(v, key);
    } else if (j.is_number()) {
      const double v = j.get<double>();
      if (key == "accuracy" || key == "p" || key == "p_value" || key == "rate") {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
      if (key == "ci_half_width") {
        CHECK(v >= 0.0);
        CHECK(v <= 0.5);
      }
    }
  };
  walk(doc, "");

  std::filesystem::create_directories(dir);
  std::ofstream(dir / "file") << "x";
  CHECK_THROWS_AS(emit_report(report, (dir / "file" / "sub").string()), IoError);
  std::filesystem::remove_all(dir);
}
