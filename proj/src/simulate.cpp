#include "karma/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <istream>

#include <json.hpp>

#include "karma/error.hpp"

namespace karma {

using nlohmann::json;

PlayerModel read_player_model(std::istream& in) {
  PlayerModel m;
  try {
    const json doc = json::parse(in);
    if (!doc.is_object()) throw ValidationError("player model must be a JSON object");
    if (doc.contains("preference")) {
      const auto kind = doc["preference"].get<std::string>();
      if (kind == "higher_score")
        m.preference = PlayerModel::Preference::HigherScore;
      else if (kind == "coin")
        m.preference = PlayerModel::Preference::Coin;
      else if (kind == "latent")
        m.preference = PlayerModel::Preference::Latent;
      else
        throw ValidationError("unknown preference model '" + kind + "'");
    }
    auto number = [&](const char* key, double& slot) {
      if (doc.contains(key)) slot = doc[key].get<double>();
    };
    number("latent_bias", m.latent_bias);
    number("latent_delta_slope", m.latent_delta_slope);
    number("latent_spread", m.latent_spread);
    number("prediction_skill", m.prediction_skill);
    number("questionnaire_rate", m.questionnaire_rate);
    number("heavy_share", m.heavy_share);
    number("casual_share", m.casual_share);
    number("response_median_ms", m.response_median_ms);
    number("response_sigma", m.response_sigma);
    number("incorrect_extra_ms", m.incorrect_extra_ms);
    number("abandon_rate", m.abandon_rate);
    if (doc.contains("prediction_bonus"))
      for (const auto& [usage, bonus] : doc["prediction_bonus"].items())
        m.prediction_bonus[usage_from_string(usage)] = bonus.get<double>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed player model: ") + e.what());
  }
  for (double p : {m.prediction_skill, m.questionnaire_rate, m.heavy_share, m.casual_share, m.abandon_rate})
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("player model probabilities must lie in [0, 1]");
  if (m.heavy_share + m.casual_share > 1.0) throw ValidationError("heavy_share + casual_share exceeds 1");
  if (m.response_median_ms <= 0.0 || m.response_sigma < 0.0 || m.incorrect_extra_ms < 0.0)
    throw ValidationError("player model response times must be positive");
  return m;
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

QuestionnaireResponse draw_answers(const PlayerModel& m, Rng& rng) {
  QuestionnaireResponse q;
  const double u = rng.uniform();
  if (u < m.heavy_share)
    q.usage = Usage::Heavy;
  else if (u < m.heavy_share + m.casual_share)
    q.usage = Usage::Casual;
  else
    return q;  // nonuser everywhere
  const bool heavy = q.usage == Usage::Heavy;
  q.tenure = rng.bernoulli(heavy ? 0.95 : 0.8) ? Tenure::OverYear : Tenure::UnderYear;
  q.attention = rng.bernoulli(0.33) ? YesNo::Yes : YesNo::No;
  q.votes = rng.bernoulli(heavy ? 0.8 : 0.5) ? YesNo::Yes : YesNo::No;
  q.votes_new = rng.bernoulli(heavy ? 0.2 : 0.05) ? YesNo::Yes : YesNo::No;
  return q;
}

std::int64_t draw_ms(const PlayerModel& m, Rng& rng) {
  return static_cast<std::int64_t>(std::llround(m.response_median_ms * std::exp(m.response_sigma * rng.normal())));
}

// Side holding the higher score (Left on ties).
Side higher_side(const Pair& p) { return p.right.score() > p.left.score() ? Side::Right : Side::Left; }

Side other(Side s) { return s == Side::Left ? Side::Right : Side::Left; }

}  // namespace

SimulationResult simulate_players(const PairPlan& plan, const PlayerModel& model, std::size_t n_sessions,
                                  std::uint64_t seed) {
  SimulationResult result;

  std::map<std::string, double> prefer_higher;
  {
    Rng pair_rng(seed ^ 0x5bd1e9955bd1e995ULL);
    for (const auto& p : plan.pairs) {
      double q = 0.5;
      switch (model.preference) {
        case PlayerModel::Preference::HigherScore: q = 1.0; break;
        case PlayerModel::Preference::Coin: q = 0.5; break;
        case PlayerModel::Preference::Latent: {
          const double delta = std::abs(p.left.percentile - p.right.percentile);
          q = sigmoid(model.latent_bias + model.latent_delta_slope * delta + model.latent_spread * pair_rng.normal());
          break;
        }
      }
      prefer_higher[p.pair_id] = q;
    }
  }

  std::int64_t now = 1488326400000;  // 2017-03-01T00:00:00Z
  GameEngine engine(plan, result.log, seed, [&now] { return now; });
  Rng rng(seed + 0x9e3779b97f4a7c15ULL);
  const auto subreddits = plan.subreddits();

  for (std::size_t s = 0; s < n_sessions; ++s) {
    ++result.sessions_started;
    now += 1000 + static_cast<std::int64_t>(rng.index(60000));
    const QuestionnaireResponse traits = draw_answers(model, rng);
    double skill = model.prediction_skill;
    if (auto it = model.prediction_bonus.find(traits.usage); it != model.prediction_bonus.end()) skill += it->second;
    skill = std::clamp(skill, 0.0, 1.0);

    int abandon_at = rng.bernoulli(model.abandon_rate) ? static_cast<int>(rng.index(kRoundsPerGame)) : -1;
    const bool restart = abandon_at >= 0 && rng.bernoulli(0.5);

    StartResult started = engine.start_session(std::nullopt);
    std::string id = started.session.session_id;
    std::optional<RoundPayload> round = started.round;
    bool abandoned = false;

    for (int r = 0; r < kRoundsPerGame; ++r) {
      if (r == abandon_at) {
        ++result.sessions_abandoned;
        if (!restart) {
          abandoned = true;
          break;
        }
        StartResult fresh = engine.switch_subreddit(id, subreddits[rng.index(subreddits.size())]);
        id = fresh.session.session_id;
        round = fresh.round;
        abandon_at = -1;
        r = -1;  // the restarted game plays all ten rounds
        continue;
      }
      const Pair& pair = *plan.find(round->pair_id);
      const Side high = higher_side(pair);
      const Side preference = rng.bernoulli(prefer_higher.at(pair.pair_id)) ? high : other(high);
      const Side prediction = rng.bernoulli(skill) ? high : other(high);
      const bool correct = is_prediction_correct(pair, prediction);

      const std::int64_t pref_ms = draw_ms(model, rng);
      now += pref_ms;
      engine.submit_preference(id, round->pair_id, preference, pref_ms);
      std::int64_t pred_ms = draw_ms(model, rng);
      if (!correct) pred_ms += static_cast<std::int64_t>(std::llround(model.incorrect_extra_ms));
      now += pred_ms;
      PredictionResult outcome = engine.submit_prediction(id, round->pair_id, prediction, pred_ms);
      now += kRevealMs;
      round = outcome.next;
    }
    if (abandoned) continue;

    ++result.sessions_completed;
    std::optional<QuestionnaireResponse> answers;
    if (rng.bernoulli(model.questionnaire_rate)) {
      answers = traits;
      answers->session_id = id;
    }
    engine.submit_questionnaire(id, answers);
  }
  result.serve_counts = engine.serve_counts();
  return result;
}

}  // namespace karma
