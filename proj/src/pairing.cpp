#include "karma/pairing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "karma/error.hpp"
#include "karma/io.hpp"

namespace karma {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(PairType type) {
  switch (type) {
    case PairType::VH_VH: return "VH-VH";
    case PairType::H_H: return "H-H";
    case PairType::VH_H: return "VH-H";
    case PairType::H_M: return "H-M";
    case PairType::H_L: return "H-L";
    case PairType::VH_L: return "VH-L";
  }
  return "?";
}

PairType pair_type_from_string(std::string_view text) {
  for (PairType t : kPairTypes)
    if (to_string(t) == text) return t;
  throw ValidationError("unknown pair type '" + std::string(text) + "'");
}

std::pair<Bin, Bin> bins_of(PairType type) {
  switch (type) {
    case PairType::VH_VH: return {Bin::VH, Bin::VH};
    case PairType::H_H: return {Bin::H, Bin::H};
    case PairType::VH_H: return {Bin::VH, Bin::H};
    case PairType::H_M: return {Bin::H, Bin::M};
    case PairType::H_L: return {Bin::H, Bin::L};
    case PairType::VH_L: return {Bin::VH, Bin::L};
  }
  return {Bin::L, Bin::L};
}

std::optional<PairType> classify_bins(Bin a, Bin b) {
  for (PairType t : kPairTypes) {
    auto [x, y] = bins_of(t);
    if ((a == x && b == y) || (a == y && b == x)) return t;
  }
  return std::nullopt;
}

TypeMix default_type_mix() {
  return {{PairType::VH_VH, 0.33}, {PairType::H_H, 0.215}, {PairType::VH_H, 0.25},
          {PairType::H_M, 0.157},  {PairType::H_L, 0.019}, {PairType::VH_L, 0.029}};
}

std::vector<std::string> PairPlan::subreddits() const {
  std::vector<std::string> out;
  for (const auto& p : pairs)
    if (std::find(out.begin(), out.end(), p.subreddit) == out.end()) out.push_back(p.subreddit);
  std::sort(out.begin(), out.end());
  return out;
}

const Pair* PairPlan::find(std::string_view pair_id) const {
  for (const auto& p : pairs)
    if (p.pair_id == pair_id) return &p;
  return nullptr;
}

std::map<PairType, int> type_counts(const TypeMix& mix, int per_subreddit) {
  if (per_subreddit <= 0) throw ValidationError("per_subreddit must be positive");
  double total = 0.0;
  for (const auto& [type, fraction] : mix) {
    if (fraction < 0.0) throw ValidationError("negative fraction for " + std::string(to_string(type)));
    total += fraction;
  }
  if (std::abs(total - 1.0) > 1e-6) throw ValidationError("type mix must sum to 1, got " + io::format_double(total));

  std::map<PairType, int> counts;
  int assigned = 0;
  for (PairType t : kPairTypes) {
    if (t == PairType::VH_VH) continue;
    auto it = mix.find(t);
    const int c = it == mix.end() ? 0 : static_cast<int>(std::round(it->second * per_subreddit));
    counts[t] = c;
    assigned += c;
  }
  if (assigned > per_subreddit)
    throw ValidationError("type mix rounds to more than " + std::to_string(per_subreddit) + " pairs");
  counts[PairType::VH_VH] = per_subreddit - assigned;
  return counts;
}

namespace {

// Draws `demand` distinct unordered pairs from bins a and b (same bin when
// a_entries and b_entries alias).
std::vector<std::pair<const CorpusEntry*, const CorpusEntry*>> sample_pairs(
    const std::vector<const CorpusEntry*>& a_entries, const std::vector<const CorpusEntry*>& b_entries, bool same_bin,
    int demand, Rng& rng) {
  const std::uint64_t na = a_entries.size();
  const std::uint64_t nb = b_entries.size();
  const std::uint64_t capacity = same_bin ? na * (na - 1) / 2 : na * nb;
  std::vector<std::pair<const CorpusEntry*, const CorpusEntry*>> out;

  if (capacity <= 200000) {
    // Enumerate and partially shuffle.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> all;
    all.reserve(capacity);
    for (std::uint32_t i = 0; i < na; ++i)
      for (std::uint32_t j = same_bin ? i + 1 : 0; j < (same_bin ? na : nb); ++j) all.emplace_back(i, j);
    for (int k = 0; k < demand; ++k) {
      const auto pick = k + rng.index(all.size() - k);
      std::swap(all[k], all[pick]);
      out.emplace_back(a_entries[all[k].first], b_entries[all[k].second]);
    }
    return out;
  }

  std::set<std::pair<std::uint64_t, std::uint64_t>> used;
  while (static_cast<int>(out.size()) < demand) {
    std::uint64_t i = rng.index(na);
    std::uint64_t j = rng.index(nb);
    if (same_bin) {
      if (i == j) continue;
      if (i > j) std::swap(i, j);
    }
    if (!used.emplace(i, j).second) continue;
    out.emplace_back(a_entries[i], b_entries[j]);
  }
  return out;
}

}  // namespace

PairPlan generate_plan(const std::vector<CorpusEntry>& corpus, const PlanConfig& config) {
  const auto counts = type_counts(config.type_mix, config.per_subreddit);

  std::map<std::string, std::map<Bin, std::vector<const CorpusEntry*>>> bins;
  for (const auto& e : corpus) bins[e.subreddit()][e.bin].push_back(&e);

  PairPlan plan;
  plan.per_subreddit = config.per_subreddit;
  plan.type_mix = config.type_mix;
  plan.seed = config.seed;

  Rng rng(config.seed);
  for (auto& [subreddit, by_bin] : bins) {
    int index = 0;
    for (PairType type : kPairTypes) {
      const int demand = counts.at(type);
      if (demand == 0) continue;
      const auto [bin_a, bin_b] = bins_of(type);
      const bool same_bin = bin_a == bin_b;
      for (Bin needed : {bin_a, bin_b}) {
        if (by_bin[needed].empty())
          throw ValidationError("subreddit '" + subreddit + "' has no " + std::string(to_string(needed)) +
                                " entries required by " + std::string(to_string(type)));
      }
      const std::uint64_t na = by_bin[bin_a].size();
      const std::uint64_t nb = by_bin[bin_b].size();
      const std::uint64_t capacity = same_bin ? na * (na - 1) / 2 : na * nb;
      if (static_cast<std::uint64_t>(demand) > capacity)
        throw ValidationError("subreddit '" + subreddit + "': " + std::string(to_string(type)) + " needs " +
                              std::to_string(demand) + " distinct pairs but only " + std::to_string(capacity) +
                              " exist");
      for (auto [a, b] : sample_pairs(by_bin[bin_a], by_bin[bin_b], same_bin, demand, rng)) {
        if (rng.bernoulli(0.5)) std::swap(a, b);
        char id[16];
        std::snprintf(id, sizeof id, "%03d", index++);
        plan.pairs.push_back(Pair{subreddit + ":" + id, subreddit, *a, *b, type});
      }
    }
  }
  return plan;
}

const Pair& next_pair(const PairPlan& plan, const std::set<std::string>& session_served, ServeCounts& serve_counts,
                      std::string_view subreddit, Rng& rng) {
  std::vector<const Pair*> eligible;
  std::int64_t best = INT64_MAX;
  for (const auto& p : plan.pairs) {
    if (p.subreddit != subreddit || session_served.contains(p.pair_id)) continue;
    const auto it = serve_counts.find(p.pair_id);
    const std::int64_t count = it == serve_counts.end() ? 0 : it->second;
    if (count < best) {
      best = count;
      eligible.clear();
    }
    if (count == best) eligible.push_back(&p);
  }
  if (eligible.empty())
    throw ValidationError("no unserved pairs left in subreddit '" + std::string(subreddit) + "' for this session");
  const Pair& chosen = *eligible[rng.index(eligible.size())];
  ++serve_counts[chosen.pair_id];
  return chosen;
}

void write_plan(std::ostream& out, const PairPlan& plan) {
  ordered_json doc;
  doc["seed"] = plan.seed;
  ordered_json mix = ordered_json::object();
  for (PairType t : kPairTypes) {
    auto it = plan.type_mix.find(t);
    mix[std::string(to_string(t))] = it == plan.type_mix.end() ? 0.0 : it->second;
  }
  doc["config"] = {{"per_subreddit", plan.per_subreddit}, {"type_mix", mix}};
  ordered_json pairs = ordered_json::array();
  for (const auto& p : plan.pairs) {
    pairs.push_back({{"pair_id", p.pair_id},
                     {"subreddit", p.subreddit},
                     {"left", p.left.id()},
                     {"right", p.right.id()},
                     {"pair_type", std::string(to_string(p.pair_type))}});
  }
  doc["pairs"] = std::move(pairs);
  out << doc.dump(2) << "\n";
}

namespace {

TypeMix mix_from_json(const json& j) {
  TypeMix mix;
  for (const auto& [key, value] : j.items()) mix[pair_type_from_string(key)] = value.get<double>();
  return mix;
}

}  // namespace

PairPlan read_plan(std::istream& in, const std::vector<CorpusEntry>& corpus) {
  std::map<std::string, const CorpusEntry*> by_id;
  for (const auto& e : corpus) by_id[e.id()] = &e;

  PairPlan plan;
  try {
    const json doc = json::parse(in);
    plan.seed = doc.at("seed").get<std::uint64_t>();
    plan.per_subreddit = doc.at("config").at("per_subreddit").get<int>();
    plan.type_mix = mix_from_json(doc.at("config").at("type_mix"));
    std::set<std::string> seen;
    for (const auto& r : doc.at("pairs")) {
      Pair p;
      p.pair_id = r.at("pair_id").get<std::string>();
      p.subreddit = r.at("subreddit").get<std::string>();
      p.pair_type = pair_type_from_string(r.at("pair_type").get<std::string>());
      for (auto [key, slot] : {std::pair{"left", &p.left}, std::pair{"right", &p.right}}) {
        const auto id = r.at(key).get<std::string>();
        auto it = by_id.find(id);
        if (it == by_id.end()) throw IntegrityError("plan references unknown corpus entry '" + id + "'");
        *slot = *it->second;
      }
      if (!seen.insert(p.pair_id).second) throw IntegrityError("duplicate pair id '" + p.pair_id + "'");
      if (p.left.subreddit() != p.subreddit || p.right.subreddit() != p.subreddit)
        throw IntegrityError("pair '" + p.pair_id + "' mixes subreddits");
      if (classify_bins(p.left.bin, p.right.bin) != p.pair_type)
        throw IntegrityError("pair '" + p.pair_id + "' bins do not match its type");
      plan.pairs.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed plan document: ") + e.what());
  }
  return plan;
}

PairPlan load_plan_file(const std::string& path, const std::vector<CorpusEntry>& corpus) {
  auto in = io::open_input(path);
  return read_plan(in, corpus);
}

void save_plan_file(const std::string& path, const PairPlan& plan) {
  auto out = io::open_output(path);
  write_plan(out, plan);
  if (!out) throw IoError("write failed: " + path);
}

TypeMix read_type_mix(std::istream& in) {
  try {
    return mix_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed type mix: ") + e.what());
  }
}

}  // namespace karma
