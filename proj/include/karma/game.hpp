#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "karma/error.hpp"
#include "karma/pairing.hpp"
#include "karma/rng.hpp"

namespace karma {

inline constexpr int kRoundsPerGame = 10;
inline constexpr int kRevealMs = 3000;

enum class Side { Left, Right };
enum class Phase { AwaitPreference, AwaitPrediction, Reveal, Questionnaire, Done };

std::string_view to_string(Side side);  // "L" / "R"
Side side_from_string(std::string_view text);
std::string_view to_string(Phase phase);

// Answer sets of the usage questionnaire.
enum class Usage { Heavy, Casual, NonUser };
enum class Tenure { OverYear, UnderYear, NonUser };
enum class YesNo { Yes, No, NonUser };

std::string_view to_string(Usage v);
std::string_view to_string(Tenure v);
std::string_view to_string(YesNo v);
Usage usage_from_string(std::string_view text);
Tenure tenure_from_string(std::string_view text);
YesNo yes_no_from_string(std::string_view text);

struct Judgment {
  std::string session_id;
  std::string pair_id;
  std::string subreddit;
  Side preference = Side::Left;
  Side prediction = Side::Left;
  std::int64_t pref_ms = 0;
  std::int64_t pred_ms = 0;
  bool prediction_correct = false;
  std::int64_t ts = 0;  // unix milliseconds

  bool operator==(const Judgment&) const = default;
};

struct QuestionnaireResponse {
  std::string session_id;
  Usage usage = Usage::NonUser;
  Tenure tenure = Tenure::NonUser;
  YesNo attention = YesNo::NonUser;
  YesNo votes = YesNo::NonUser;
  YesNo votes_new = YesNo::NonUser;

  bool operator==(const QuestionnaireResponse&) const = default;
};

// Only what a client may see before the reveal.
struct ImageCard {
  std::string title;
  std::string image_url;
  bool operator==(const ImageCard&) const = default;
};

struct RoundPayload {
  int index = 1;  // 1-based round number
  std::string pair_id;
  ImageCard left;
  ImageCard right;
  bool operator==(const RoundPayload&) const = default;
};

struct Reveal {
  std::int64_t left_score = 0;
  std::int64_t right_score = 0;
  bool correct = false;
  int reveal_ms = kRevealMs;
};

struct SessionSummary {
  int correct_predictions = 0;
  int total = kRoundsPerGame;
  double accuracy() const { return static_cast<double>(correct_predictions) / total; }
};

struct Session {
  std::string session_id;
  std::string subreddit;
  int round_index = 0;  // completed judgments
  Phase phase = Phase::AwaitPreference;
  std::vector<std::string> served;  // back() is the current pair while a round is open
  std::vector<Judgment> judgments;
  std::int64_t started_at = 0;
  std::optional<Side> pending_preference;
  std::int64_t pending_pref_ms = 0;

  const std::string& current_pair() const { return served.back(); }
  bool operator==(const Session&) const = default;
};

enum class GameErrorCode { BadPhase, UnknownSession, UnknownSubreddit, StalePair, Validation };

std::string_view to_string(GameErrorCode code);  // BAD_PHASE, ...

// Rejected game operation. The session is left exactly as it was.
class GameError : public Error {
 public:
  GameError(GameErrorCode code, const std::string& message) : Error(message), code_(code) {}
  GameErrorCode code() const { return code_; }

 private:
  GameErrorCode code_;
};

// True when `chosen` has the strictly higher score; ties are never correct.
bool is_prediction_correct(const Pair& pair, Side chosen);

RoundPayload round_payload(const Session& session, const PairPlan& plan);

// The pure state machine. Each call either applies fully or throws GameError
// without touching the session.
namespace game {

Session start_session(const PairPlan& plan, const std::optional<std::string>& requested_subreddit,
                      ServeCounts& serve_counts, Rng& rng, std::string session_id, std::int64_t now_ms);

void submit_preference(Session& session, std::string_view pair_id, Side choice, std::int64_t response_ms);

// Records the judgment. Rounds 1-9 end in Reveal; the tenth ends in
// Questionnaire, at which point the caller persists session.judgments.
Reveal submit_prediction(Session& session, const PairPlan& plan, std::string_view pair_id, Side choice,
                         std::int64_t response_ms, std::int64_t now_ms);

// Reveal -> AwaitPreference with the next pair drawn.
void advance(Session& session, const PairPlan& plan, ServeCounts& serve_counts, Rng& rng);

SessionSummary submit_questionnaire(Session& session, const std::optional<QuestionnaireResponse>& answers);

}  // namespace game

// Destination of completed sessions. Appends of one batch are atomic.
class LogSink {
 public:
  virtual ~LogSink() = default;
  virtual void append_judgments(std::span<const Judgment> batch) = 0;
  virtual void append_questionnaire(const QuestionnaireResponse& response) = 0;
};

class MemoryLog final : public LogSink {
 public:
  void append_judgments(std::span<const Judgment> batch) override;
  void append_questionnaire(const QuestionnaireResponse& response) override;

  std::vector<Judgment> judgments;
  std::vector<QuestionnaireResponse> questionnaires;
};

// Appends to judgments.jsonl / questionnaires.jsonl; each batch goes out in a
// single write(2) followed by fsync.
class FileLog final : public LogSink {
 public:
  FileLog(std::string judgment_path, std::string questionnaire_path);
  void append_judgments(std::span<const Judgment> batch) override;
  void append_questionnaire(const QuestionnaireResponse& response) override;

 private:
  void append(const std::string& path, const std::string& text);
  std::string judgment_path_;
  std::string questionnaire_path_;
  std::mutex mutex_;
};

std::string judgment_to_line(const Judgment& j);
std::string questionnaire_to_line(const QuestionnaireResponse& q);
std::vector<Judgment> read_judgment_log(std::istream& in);
std::vector<QuestionnaireResponse> read_questionnaire_log(std::istream& in);
std::vector<Judgment> load_judgment_log(const std::string& path);
std::vector<QuestionnaireResponse> load_questionnaire_log(const std::string& path);

struct StartResult {
  Session session;
  RoundPayload round;
};

struct PredictionResult {
  Reveal reveal;
  std::optional<RoundPayload> next;  // nullopt after the tenth round
};

// Owns live sessions and the serve counts for one plan. All public members
// are safe to call concurrently; operations on one session are applied in
// arrival order under the engine lock.
class GameEngine {
 public:
  using Clock = std::function<std::int64_t()>;

  GameEngine(PairPlan plan, LogSink& sink, std::uint64_t seed, Clock clock);

  const PairPlan& plan() const { return plan_; }

  StartResult start_session(const std::optional<std::string>& subreddit);
  void submit_preference(const std::string& session_id, std::string_view pair_id, Side choice,
                         std::int64_t response_ms);
  // Submits the prediction and, for rounds 1-9, moves on to the next pair.
  PredictionResult submit_prediction(const std::string& session_id, std::string_view pair_id, Side choice,
                                     std::int64_t response_ms);
  StartResult switch_subreddit(const std::string& session_id, const std::string& subreddit);
  SessionSummary submit_questionnaire(const std::string& session_id,
                                      const std::optional<QuestionnaireResponse>& answers);

  std::optional<Session> session(const std::string& session_id) const;
  ServeCounts serve_counts() const;

  // In-memory state as a JSON document, and its inverse.
  std::string snapshot() const;
  void restore(const std::string& snapshot_text);

 private:
  Session& find_locked(const std::string& session_id);
  std::string new_session_id_locked();

  PairPlan plan_;
  LogSink& sink_;
  Rng rng_;
  Clock clock_;
  ServeCounts serve_counts_;
  std::map<std::string, Session> sessions_;
  mutable std::mutex mutex_;
};

}  // namespace karma
