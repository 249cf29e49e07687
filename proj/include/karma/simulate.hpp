#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>

#include "karma/game.hpp"
#include "karma/pairing.hpp"

namespace karma {

// Synthetic player population.
struct PlayerModel {
  enum class Preference {
    HigherScore,  // always prefer the higher-scoring image
    Coin,         // fair coin
    Latent,       // per-pair probability logistic(bias + slope * delta + spread * z_pair)
  };
  Preference preference = Preference::Latent;
  double latent_bias = 0.3;
  double latent_delta_slope = 3.0;
  double latent_spread = 1.0;

  // Probability of predicting the higher-scoring image; bonus keyed by the
  // player's usage answer is added before clamping to [0, 1].
  double prediction_skill = 0.6;
  std::map<Usage, double> prediction_bonus;

  double questionnaire_rate = 0.783;
  // Usage mix; nonusers answer "nonuser" everywhere.
  double heavy_share = 0.599;
  double casual_share = 0.335;

  // Per-question response time is lognormal with this median.
  double response_median_ms = 9000.0;
  double response_sigma = 0.6;
  // Added to the prediction time of incorrect predictions.
  double incorrect_extra_ms = 0.0;

  // Chance that a session is left unfinished (walked away from or restarted
  // on another subreddit) before round ten.
  double abandon_rate = 0.0;
};

// JSON object with the field names above; preference is "higher_score",
// "coin" or "latent"; prediction_bonus maps usage answers to offsets.
PlayerModel read_player_model(std::istream& in);

struct SimulationResult {
  MemoryLog log;
  std::size_t sessions_started = 0;
  std::size_t sessions_completed = 0;
  std::size_t sessions_abandoned = 0;
  ServeCounts serve_counts;
};

// Plays n_sessions games through GameEngine. Same inputs, same logs.
SimulationResult simulate_players(const PairPlan& plan, const PlayerModel& model, std::size_t n_sessions,
                                  std::uint64_t seed);

}  // namespace karma
