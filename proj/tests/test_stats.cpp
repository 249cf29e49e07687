#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "karma/error.hpp"
#include "karma/stats.hpp"

using namespace karma;

namespace {

Pair make_pair(std::int64_t left_score, std::int64_t right_score, double left_pct, double right_pct,
               std::optional<std::int64_t> left_views, std::optional<std::int64_t> right_views) {
  Pair p;
  p.pair_id = "pics:000";
  p.subreddit = "pics";
  p.left.post = {"a", "pics", "A", "https://i.imgur.com/a.jpg", left_score, 0};
  p.right.post = {"b", "pics", "B", "https://i.imgur.com/b.jpg", right_score, 0};
  p.left.percentile = left_pct;
  p.right.percentile = right_pct;
  p.left.bin = assign_bin(left_pct);
  p.right.bin = assign_bin(right_pct);
  p.left.views = left_views;
  p.right.views = right_views;
  p.pair_type = classify_bins(p.left.bin, p.right.bin).value_or(PairType::VH_H);
  return p;
}

std::vector<Judgment> votes(const Pair& p, int left, int right) {
  std::vector<Judgment> out;
  for (int i = 0; i < left + right; ++i) {
    Judgment j;
    j.session_id = "s" + std::to_string(i);
    j.pair_id = p.pair_id;
    j.subreddit = p.subreddit;
    j.preference = i < left ? Side::Left : Side::Right;
    out.push_back(j);
  }
  return out;
}

PairStats stat(std::optional<bool> reddit, std::optional<bool> imgur = std::nullopt) {
  PairStats s;
  s.reddit_correct = reddit;
  s.imgur_correct = imgur;
  return s;
}

}  // namespace

TEST_CASE("kappa examples") {
  CHECK(fleiss_kappa_pair(50, 0) == 1.0);
  CHECK(fleiss_kappa_pair(25, 25) == doctest::Approx(2.0 * 1200 / 2450 - 1));
  CHECK(fleiss_kappa_pair(25, 25) == doctest::Approx(-0.02041).epsilon(1e-4));
  CHECK(fleiss_kappa_pair(40, 10) == doctest::Approx(0.34694).epsilon(1e-4));
  CHECK(fleiss_kappa_pair(25, 25) == -1.0 / 49);
  CHECK_THROWS_AS(fleiss_kappa_pair(1, 0), EstimationError);
  CHECK_THROWS_AS(fleiss_kappa_pair(0, 0), EstimationError);
}

TEST_CASE("kappa matches rater-pair enumeration") {
  for (std::size_t n = 2; n <= 40; ++n)
    for (std::size_t a = 0; a <= n; ++a) {
      const double k = fleiss_kappa_pair(a, n - a);
      CHECK(std::abs(k - oracle::kappa_by_enumeration(a, n - a)) <= 1e-12);
      CHECK(k == fleiss_kappa_pair(n - a, a));
      CHECK(k >= -1.0);
      CHECK(k <= 1.0);
      CHECK((k == 1.0) == (a == 0 || a == n));
      // monotone in the larger share
      if (2 * (a - 1) >= n && a > 0) CHECK(k > fleiss_kappa_pair(a - 1, n - a + 1));
    }
}

TEST_CASE("tally_pair") {
  auto pair = make_pair(900, 10, 0.95, 0.60, 5000, 20);
  auto s = tally_pair(votes(pair, 50, 0), pair);
  CHECK(s.n_raters == 50);
  CHECK(s.majority == Majority::Left);
  CHECK(s.reddit_winner == Winner::Left);
  CHECK(s.imgur_winner == Winner::Left);
  CHECK(s.reddit_correct == true);
  CHECK(s.imgur_correct == true);
  CHECK(s.kappa == 1.0);
  CHECK(s.delta == doctest::Approx(0.35));

  auto tie = tally_pair(votes(pair, 25, 25), pair);
  CHECK(tie.majority == Majority::Tie);
  CHECK_FALSE(tie.reddit_correct);
  CHECK_FALSE(tie.imgur_correct);

  auto noviews = make_pair(900, 10, 0.95, 0.60, std::nullopt, 20);
  auto nv = tally_pair(votes(noviews, 10, 30), noviews);
  CHECK(nv.majority == Majority::Right);
  CHECK(nv.imgur_winner == Winner::Unknown);
  CHECK_FALSE(nv.imgur_correct);
  CHECK(nv.reddit_correct == false);

  auto single = tally_pair(votes(pair, 0, 1), pair);
  CHECK(single.kappa == 1.0);
  CHECK(single.majority == Majority::Right);

  auto js = votes(pair, 3, 2);
  js[1].pair_id = "pics:001";
  CHECK_THROWS_AS(tally_pair(js, pair), IntegrityError);
  CHECK_THROWS_AS(tally_pair({}, pair), EstimationError);
}

TEST_CASE("odd rater counts never tie") {
  auto pair = make_pair(900, 10, 0.95, 0.60, 5, 20);
  for (int n = 1; n < 40; n += 2)
    for (int a = 0; a <= n; ++a) CHECK(tally_pair(votes(pair, a, n - a), pair).majority != Majority::Tie);
}

TEST_CASE("accuracy is unchanged by flipping placements") {
  Rng rng(4);
  std::vector<PairStats> original, flipped;
  for (int i = 0; i < 200; ++i) {
    const bool higher_left = rng.bernoulli(0.5);
    auto pair = make_pair(higher_left ? 900 : 10, higher_left ? 10 : 900, 0.96, 0.80, 100, 50);
    const int a = static_cast<int>(rng.index(20)), b = static_cast<int>(rng.index(20));
    if (a + b == 0) continue;
    original.push_back(tally_pair(votes(pair, a, b), pair));
    std::swap(pair.left, pair.right);
    flipped.push_back(tally_pair(votes(pair, b, a), pair));
  }
  for (Predictor p : {Predictor::Reddit, Predictor::Imgur}) {
    auto x = predictor_accuracy(original, p);
    auto y = predictor_accuracy(flipped, p);
    CHECK(x.correct == y.correct);
    CHECK(x.n == y.n);
  }
}

TEST_CASE("binomial_ci") {
  CHECK(binomial_ci(0.68, 400) == doctest::Approx(0.0457).epsilon(2e-3));
  CHECK(binomial_ci(0.647, 400) == doctest::Approx(0.0468).epsilon(2e-3));
  CHECK(binomial_ci(0.0, 10) == 0.0);
  CHECK(binomial_ci(0.5, 100) == doctest::Approx(1.959964 * 0.05));
  CHECK(std::round(binomial_ci(0.68, 400) * 1000) / 10 == 4.6);
  CHECK(std::round(binomial_ci(0.647, 400) * 1000) / 10 == 4.7);
}

TEST_CASE("t interval") {
  CHECK(t_interval_half_width(10, 11) == doctest::Approx(0.202558).epsilon(1e-5));
  CHECK(t_interval_half_width(78, 124) == doctest::Approx(0.086217).epsilon(1e-5));
  CHECK(t_interval_half_width(1, 1) == 0.0);
  CHECK(t_interval_half_width(5, 5) == 0.0);
}

TEST_CASE("predictor_accuracy") {
  std::vector<PairStats> stats;
  for (int i = 0; i < 400; ++i) stats.push_back(stat(i < 272, std::nullopt));
  stats.push_back(stat(std::nullopt));
  auto r = predictor_accuracy(stats, Predictor::Reddit);
  CHECK(r.n == 400);
  CHECK(r.correct == 272);
  CHECK(r.accuracy == doctest::Approx(0.68));
  CHECK(r.ci_half_width == doctest::Approx(0.0457).epsilon(2e-3));
  CHECK_THROWS_AS(predictor_accuracy(stats, Predictor::Imgur), EstimationError);

  std::vector<PairStats> vhl;
  for (int i = 0; i < 11; ++i) vhl.push_back(stat(i < 10));
  CHECK(predictor_accuracy(vhl, Predictor::Reddit).accuracy == doctest::Approx(0.9091).epsilon(1e-4));
}

TEST_CASE("predictor agreement") {
  auto corpus = fixtures::corpus({"pics"}, 150, 3);
  for (auto& e : corpus) e.views = 7 * std::max<std::int64_t>(e.score(), 0);
  std::vector<PairStats> stats;
  for (int i = 0; i < 20; ++i) {
    PairStats s;
    s.reddit_winner = i % 2 ? Winner::Left : Winner::Right;
    s.imgur_winner = s.reddit_winner;
    stats.push_back(s);
  }
  PairStats tie;
  tie.reddit_winner = Winner::Tie;
  tie.imgur_winner = Winner::Left;
  stats.push_back(tie);
  // fixture scores are positive so views = 7 * score exactly
  auto r = predictor_agreement(stats, corpus);
  CHECK(r.match_rate == 1.0);
  CHECK(r.matched_pairs == 20);
  CHECK(r.correlated_entries == 150);
  CHECK(r.r_squared == doctest::Approx(1.0).epsilon(1e-3));

  // a mixture with noise against a textbook Pearson
  Rng rng(5);
  std::vector<double> xs, ys;
  for (auto& e : corpus) {
    e.post.score = static_cast<std::int64_t>(rng.index(5000)) - 100;
    e.views = static_cast<std::int64_t>(std::abs(e.score()) * (1 + rng.uniform()) + rng.index(300));
    const double s = static_cast<double>(e.score());
    xs.push_back(std::copysign(std::log10(1 + std::abs(s)), s));
    ys.push_back(std::log10(1 + static_cast<double>(*e.views)));
  }
  const double r_oracle = oracle::pearson(xs, ys);
  CHECK(std::abs(predictor_agreement(stats, corpus).r_squared - r_oracle * r_oracle) <= 1e-12);

  CHECK_THROWS_AS(predictor_agreement(stats, std::span(corpus).first(2)), EstimationError);
}

TEST_CASE("pair stats csv round trip") {
  auto pair = make_pair(900, 10, 0.95, 0.60, std::nullopt, 20);
  std::vector<PairStats> stats = {tally_pair(votes(pair, 7, 3), pair), tally_pair(votes(pair, 2, 2), pair),
                                  tally_pair(votes(pair, 1, 6), pair)};
  std::stringstream buf;
  write_pair_stats_csv(buf, stats);
  CHECK(buf.str().rfind("pair_id,subreddit,pair_type,n,votes_l,votes_r,majority,kappa,delta,reddit_winner,"
                        "imgur_winner,reddit_correct,imgur_correct\n",
                        0) == 0);
  CHECK(read_pair_stats_csv(buf) == stats);
}
