#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "karma/corpus.hpp"
#include "karma/pairing.hpp"
#include "karma/rng.hpp"

namespace fixtures {

// n posts per subreddit with distinct scores (a random permutation of
// 1..n scaled), image URLs keyed by post id, views optionally attached.
inline std::vector<karma::Post> posts(const std::vector<std::string>& subreddits, int n, std::uint64_t seed) {
  karma::Rng rng(seed);
  std::vector<karma::Post> out;
  int counter = 0;
  for (const auto& sub : subreddits) {
    std::vector<std::int64_t> scores;
    for (int i = 0; i < n; ++i) scores.push_back(static_cast<std::int64_t>(i) * 7 + 1);
    for (int i = n - 1; i > 0; --i) std::swap(scores[i], scores[rng.index(i + 1)]);
    for (int i = 0; i < n; ++i) {
      const std::string id = "p" + std::to_string(counter++);
      out.push_back({id, sub, "title " + id, "https://i.imgur.com/" + id + ".jpg", scores[i], 1400000000 + counter});
    }
  }
  return out;
}

inline std::vector<karma::CorpusEntry> corpus(const std::vector<std::string>& subreddits, int n, std::uint64_t seed,
                                              bool with_views = true) {
  auto entries = karma::compute_percentiles(posts(subreddits, n, seed)).entries;
  if (with_views)
    for (auto& e : entries) e.views = e.score() * 3 + 11;
  return entries;
}

inline const std::vector<std::string>& eight_subreddits() {
  static const std::vector<std::string> subs = {"CrappyDesign", "EarthPorn", "OldSchoolCool", "aww",
                                                "funny",        "itookapicture", "photocritique", "pics"};
  return subs;
}

inline karma::PairPlan plan(const std::vector<karma::CorpusEntry>& corpus, int per_subreddit = 50,
                            std::uint64_t seed = 7) {
  karma::PlanConfig config;
  config.per_subreddit = per_subreddit;
  config.seed = seed;
  return karma::generate_plan(corpus, config);
}

}  // namespace fixtures
