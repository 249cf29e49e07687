#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "karma/corpus.hpp"
#include "karma/rng.hpp"

namespace karma {

// The six permitted bin combinations, ordered by growing score differential.
enum class PairType { VH_VH, H_H, VH_H, H_M, H_L, VH_L };

inline constexpr std::array<PairType, 6> kPairTypes = {PairType::VH_VH, PairType::H_H, PairType::VH_H,
                                                       PairType::H_M,   PairType::H_L, PairType::VH_L};

std::string_view to_string(PairType type);
PairType pair_type_from_string(std::string_view text);

// Unordered bin combination; nullopt for the ten forbidden combinations.
std::optional<PairType> classify_bins(Bin a, Bin b);
std::pair<Bin, Bin> bins_of(PairType type);

struct Pair {
  std::string pair_id;
  std::string subreddit;
  CorpusEntry left;
  CorpusEntry right;
  PairType pair_type = PairType::VH_VH;
};

using TypeMix = std::map<PairType, double>;

// Realized pairing proportions of the original deployment.
TypeMix default_type_mix();

struct PlanConfig {
  int per_subreddit = 50;
  TypeMix type_mix = default_type_mix();
  std::uint64_t seed = 0;
};

struct PairPlan {
  std::vector<Pair> pairs;
  int per_subreddit = 0;
  TypeMix type_mix;
  std::uint64_t seed = 0;

  std::vector<std::string> subreddits() const;
  const Pair* find(std::string_view pair_id) const;
};

// Per-subreddit count of each type: round(fraction * per_subreddit) for every
// type but VH-VH, which receives the remainder.
std::map<PairType, int> type_counts(const TypeMix& mix, int per_subreddit);

// Samples per_subreddit distinct unordered pairs for every subreddit in the
// corpus. Pure function of (corpus, config). Throws ValidationError when a
// required bin is empty or a type demands more pairs than exist.
PairPlan generate_plan(const std::vector<CorpusEntry>& corpus, const PlanConfig& config);

using ServeCounts = std::map<std::string, std::int64_t>;

// Uniform choice among the subreddit's pairs not yet served in this session
// whose serve count is minimal; increments that pair's count. Throws
// ValidationError when the session has seen every pair of the subreddit.
const Pair& next_pair(const PairPlan& plan, const std::set<std::string>& session_served, ServeCounts& serve_counts,
                      std::string_view subreddit, Rng& rng);

void write_plan(std::ostream& out, const PairPlan& plan);
// Pair members are resolved against the corpus by id.
PairPlan read_plan(std::istream& in, const std::vector<CorpusEntry>& corpus);

PairPlan load_plan_file(const std::string& path, const std::vector<CorpusEntry>& corpus);
void save_plan_file(const std::string& path, const PairPlan& plan);

TypeMix read_type_mix(std::istream& in);

}  // namespace karma
