#include "karma/game.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <istream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "karma/io.hpp"

namespace karma {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Side side) { return side == Side::Left ? "L" : "R"; }

Side side_from_string(std::string_view text) {
  if (text == "L") return Side::Left;
  if (text == "R") return Side::Right;
  throw ValidationError("side must be L or R, got '" + std::string(text) + "'");
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::AwaitPreference: return "preference";
    case Phase::AwaitPrediction: return "prediction";
    case Phase::Reveal: return "reveal";
    case Phase::Questionnaire: return "questionnaire";
    case Phase::Done: return "done";
  }
  return "?";
}

std::string_view to_string(Usage v) {
  switch (v) {
    case Usage::Heavy: return "heavy";
    case Usage::Casual: return "casual";
    case Usage::NonUser: return "nonuser";
  }
  return "?";
}

std::string_view to_string(Tenure v) {
  switch (v) {
    case Tenure::OverYear: return "over_year";
    case Tenure::UnderYear: return "under_year";
    case Tenure::NonUser: return "nonuser";
  }
  return "?";
}

std::string_view to_string(YesNo v) {
  switch (v) {
    case YesNo::Yes: return "yes";
    case YesNo::No: return "no";
    case YesNo::NonUser: return "nonuser";
  }
  return "?";
}

namespace {

template <typename E, std::size_t N>
E enum_from_string(std::string_view text, const E (&values)[N], const char* what) {
  for (E v : values)
    if (to_string(v) == text) return v;
  throw ValidationError(std::string("invalid ") + what + " answer '" + std::string(text) + "'");
}

}  // namespace

Usage usage_from_string(std::string_view text) {
  static constexpr Usage values[] = {Usage::Heavy, Usage::Casual, Usage::NonUser};
  return enum_from_string(text, values, "usage");
}

Tenure tenure_from_string(std::string_view text) {
  static constexpr Tenure values[] = {Tenure::OverYear, Tenure::UnderYear, Tenure::NonUser};
  return enum_from_string(text, values, "tenure");
}

YesNo yes_no_from_string(std::string_view text) {
  static constexpr YesNo values[] = {YesNo::Yes, YesNo::No, YesNo::NonUser};
  return enum_from_string(text, values, "yes/no");
}

std::string_view to_string(GameErrorCode code) {
  switch (code) {
    case GameErrorCode::BadPhase: return "BAD_PHASE";
    case GameErrorCode::UnknownSession: return "UNKNOWN_SESSION";
    case GameErrorCode::UnknownSubreddit: return "UNKNOWN_SUBREDDIT";
    case GameErrorCode::StalePair: return "STALE_PAIR";
    case GameErrorCode::Validation: return "VALIDATION";
  }
  return "?";
}

bool is_prediction_correct(const Pair& pair, Side chosen) {
  const auto& mine = chosen == Side::Left ? pair.left : pair.right;
  const auto& other = chosen == Side::Left ? pair.right : pair.left;
  return mine.score() > other.score();
}

RoundPayload round_payload(const Session& session, const PairPlan& plan) {
  const Pair* pair = plan.find(session.current_pair());
  if (!pair) throw IntegrityError("session references unknown pair '" + session.current_pair() + "'");
  return RoundPayload{session.round_index + 1, pair->pair_id,
                      ImageCard{pair->left.post.title, pair->left.post.image_url},
                      ImageCard{pair->right.post.title, pair->right.post.image_url}};
}

namespace game {

namespace {

void require_subreddit(const PairPlan& plan, const std::string& subreddit) {
  const auto subs = plan.subreddits();
  if (std::find(subs.begin(), subs.end(), subreddit) != subs.end()) return;
  std::string options;
  for (const auto& s : subs) options += (options.empty() ? "" : ", ") + s;
  throw GameError(GameErrorCode::UnknownSubreddit,
                  "unknown subreddit '" + subreddit + "'; valid options: " + options);
}

void require_open_round(const Session& session, Phase expected, std::string_view pair_id) {
  if (session.phase != expected)
    throw GameError(GameErrorCode::BadPhase, "session is awaiting " + std::string(to_string(session.phase)) +
                                                 ", not " + std::string(to_string(expected)));
  if (pair_id != session.current_pair())
    throw GameError(GameErrorCode::StalePair, "pair '" + std::string(pair_id) + "' is not the current pair");
}

void require_nonnegative(std::int64_t response_ms) {
  if (response_ms < 0) throw GameError(GameErrorCode::Validation, "response_ms must be nonnegative");
}

}  // namespace

Session start_session(const PairPlan& plan, const std::optional<std::string>& requested_subreddit,
                      ServeCounts& serve_counts, Rng& rng, std::string session_id, std::int64_t now_ms) {
  const auto subs = plan.subreddits();
  if (subs.empty()) throw GameError(GameErrorCode::Validation, "plan has no pairs");
  Session session;
  session.session_id = std::move(session_id);
  if (requested_subreddit) {
    require_subreddit(plan, *requested_subreddit);
    session.subreddit = *requested_subreddit;
  } else {
    session.subreddit = subs[rng.index(subs.size())];
  }
  session.started_at = now_ms;
  const std::set<std::string> none;
  session.served.push_back(next_pair(plan, none, serve_counts, session.subreddit, rng).pair_id);
  return session;
}

void submit_preference(Session& session, std::string_view pair_id, Side choice, std::int64_t response_ms) {
  require_open_round(session, Phase::AwaitPreference, pair_id);
  require_nonnegative(response_ms);
  session.pending_preference = choice;
  session.pending_pref_ms = response_ms;
  session.phase = Phase::AwaitPrediction;
}

Reveal submit_prediction(Session& session, const PairPlan& plan, std::string_view pair_id, Side choice,
                         std::int64_t response_ms, std::int64_t now_ms) {
  require_open_round(session, Phase::AwaitPrediction, pair_id);
  require_nonnegative(response_ms);
  const Pair* pair = plan.find(pair_id);
  if (!pair) throw IntegrityError("session references unknown pair '" + std::string(pair_id) + "'");

  Judgment j;
  j.session_id = session.session_id;
  j.pair_id = pair->pair_id;
  j.subreddit = session.subreddit;
  j.preference = *session.pending_preference;
  j.prediction = choice;
  j.pref_ms = session.pending_pref_ms;
  j.pred_ms = response_ms;
  j.prediction_correct = is_prediction_correct(*pair, choice);
  j.ts = now_ms;

  session.judgments.push_back(j);
  session.pending_preference.reset();
  session.pending_pref_ms = 0;
  ++session.round_index;
  session.phase = session.round_index == kRoundsPerGame ? Phase::Questionnaire : Phase::Reveal;
  return Reveal{pair->left.score(), pair->right.score(), j.prediction_correct, kRevealMs};
}

void advance(Session& session, const PairPlan& plan, ServeCounts& serve_counts, Rng& rng) {
  if (session.phase != Phase::Reveal)
    throw GameError(GameErrorCode::BadPhase,
                    "session is awaiting " + std::string(to_string(session.phase)) + ", not reveal");
  const std::set<std::string> seen(session.served.begin(), session.served.end());
  const Pair& next = next_pair(plan, seen, serve_counts, session.subreddit, rng);
  session.served.push_back(next.pair_id);
  session.phase = Phase::AwaitPreference;
}

SessionSummary submit_questionnaire(Session& session, const std::optional<QuestionnaireResponse>& answers) {
  if (session.phase != Phase::Questionnaire)
    throw GameError(GameErrorCode::BadPhase,
                    "session is awaiting " + std::string(to_string(session.phase)) + ", not questionnaire");
  if (answers && answers->session_id != session.session_id)
    throw GameError(GameErrorCode::Validation, "questionnaire belongs to a different session");
  SessionSummary summary;
  summary.correct_predictions = static_cast<int>(
      std::count_if(session.judgments.begin(), session.judgments.end(), [](const Judgment& j) {
        return j.prediction_correct;
      }));
  session.phase = Phase::Done;
  return summary;
}

}  // namespace game

// ---------------------------------------------------------------------------
// Logs

void MemoryLog::append_judgments(std::span<const Judgment> batch) {
  judgments.insert(judgments.end(), batch.begin(), batch.end());
}

void MemoryLog::append_questionnaire(const QuestionnaireResponse& response) { questionnaires.push_back(response); }

FileLog::FileLog(std::string judgment_path, std::string questionnaire_path)
    : judgment_path_(std::move(judgment_path)), questionnaire_path_(std::move(questionnaire_path)) {}

void FileLog::append(const std::string& path, const std::string& text) {
  std::lock_guard lock(mutex_);
  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw IoError("cannot open log " + path + ": " + std::strerror(errno));
  std::size_t written = 0;
  while (written < text.size()) {
    const ssize_t n = ::write(fd, text.data() + written, text.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      throw IoError("write to " + path + " failed: " + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
}

void FileLog::append_judgments(std::span<const Judgment> batch) {
  std::string text;
  for (const auto& j : batch) text += judgment_to_line(j) + "\n";
  append(judgment_path_, text);
}

void FileLog::append_questionnaire(const QuestionnaireResponse& response) {
  append(questionnaire_path_, questionnaire_to_line(response) + "\n");
}

std::string judgment_to_line(const Judgment& j) {
  ordered_json r;
  r["session_id"] = j.session_id;
  r["pair_id"] = j.pair_id;
  r["subreddit"] = j.subreddit;
  r["preference"] = to_string(j.preference);
  r["prediction"] = to_string(j.prediction);
  r["pref_ms"] = j.pref_ms;
  r["pred_ms"] = j.pred_ms;
  r["prediction_correct"] = j.prediction_correct;
  r["ts"] = j.ts;
  return r.dump();
}

std::string questionnaire_to_line(const QuestionnaireResponse& q) {
  ordered_json r;
  r["session_id"] = q.session_id;
  r["q_usage"] = to_string(q.usage);
  r["q_tenure"] = to_string(q.tenure);
  r["q_attention"] = to_string(q.attention);
  r["q_votes"] = to_string(q.votes);
  r["q_votes_new"] = to_string(q.votes_new);
  return r.dump();
}

namespace {

template <typename T, typename F>
std::vector<T> read_lines(std::istream& in, const char* what, F parse_record) {
  if (!in) throw IoError(std::string(what) + " stream is not readable");
  std::vector<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (io::trim(line).empty()) continue;
    try {
      out.push_back(parse_record(json::parse(line)));
    } catch (const std::exception& e) {
      throw ValidationError(std::string(what) + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (in.bad()) throw IoError(std::string("error while reading ") + what);
  return out;
}

}  // namespace

std::vector<Judgment> read_judgment_log(std::istream& in) {
  return read_lines<Judgment>(in, "judgment log", [](const json& r) {
    Judgment j;
    j.session_id = r.at("session_id").get<std::string>();
    j.pair_id = r.at("pair_id").get<std::string>();
    j.subreddit = r.at("subreddit").get<std::string>();
    j.preference = side_from_string(r.at("preference").get<std::string>());
    j.prediction = side_from_string(r.at("prediction").get<std::string>());
    j.pref_ms = r.at("pref_ms").get<std::int64_t>();
    j.pred_ms = r.at("pred_ms").get<std::int64_t>();
    j.prediction_correct = r.at("prediction_correct").get<bool>();
    j.ts = r.at("ts").get<std::int64_t>();
    if (j.pref_ms < 0 || j.pred_ms < 0) throw ValidationError("negative response time");
    return j;
  });
}

std::vector<QuestionnaireResponse> read_questionnaire_log(std::istream& in) {
  return read_lines<QuestionnaireResponse>(in, "questionnaire log", [](const json& r) {
    QuestionnaireResponse q;
    q.session_id = r.at("session_id").get<std::string>();
    q.usage = usage_from_string(r.at("q_usage").get<std::string>());
    q.tenure = tenure_from_string(r.at("q_tenure").get<std::string>());
    q.attention = yes_no_from_string(r.at("q_attention").get<std::string>());
    q.votes = yes_no_from_string(r.at("q_votes").get<std::string>());
    q.votes_new = yes_no_from_string(r.at("q_votes_new").get<std::string>());
    return q;
  });
}

std::vector<Judgment> load_judgment_log(const std::string& path) {
  auto in = io::open_input(path);
  return read_judgment_log(in);
}

std::vector<QuestionnaireResponse> load_questionnaire_log(const std::string& path) {
  auto in = io::open_input(path);
  return read_questionnaire_log(in);
}

// ---------------------------------------------------------------------------
// Engine

GameEngine::GameEngine(PairPlan plan, LogSink& sink, std::uint64_t seed, Clock clock)
    : plan_(std::move(plan)), sink_(sink), rng_(seed), clock_(std::move(clock)) {}

Session& GameEngine::find_locked(const std::string& session_id) {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw GameError(GameErrorCode::UnknownSession, "unknown session '" + session_id + "'");
  return it->second;
}

std::string GameEngine::new_session_id_locked() {
  while (true) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng_.next()));
    if (!sessions_.contains(buf)) return buf;
  }
}

StartResult GameEngine::start_session(const std::optional<std::string>& subreddit) {
  std::lock_guard lock(mutex_);
  // Work on copies so a rejected request leaves the engine untouched.
  ServeCounts counts = serve_counts_;
  Rng rng = rng_;
  std::string id = new_session_id_locked();
  Session s = game::start_session(plan_, subreddit, counts, rng, id, clock_());
  serve_counts_ = std::move(counts);
  rng_ = rng;
  RoundPayload round = round_payload(s, plan_);
  sessions_[s.session_id] = s;
  return {std::move(s), std::move(round)};
}

void GameEngine::submit_preference(const std::string& session_id, std::string_view pair_id, Side choice,
                                   std::int64_t response_ms) {
  std::lock_guard lock(mutex_);
  game::submit_preference(find_locked(session_id), pair_id, choice, response_ms);
}

PredictionResult GameEngine::submit_prediction(const std::string& session_id, std::string_view pair_id,
                                               Side choice, std::int64_t response_ms) {
  std::lock_guard lock(mutex_);
  Session& live = find_locked(session_id);
  Session s = live;
  PredictionResult result;
  result.reveal = game::submit_prediction(s, plan_, pair_id, choice, response_ms, clock_());
  if (s.phase == Phase::Questionnaire) {
    sink_.append_judgments(s.judgments);
  } else {
    game::advance(s, plan_, serve_counts_, rng_);
    result.next = round_payload(s, plan_);
  }
  live = std::move(s);
  return result;
}

StartResult GameEngine::switch_subreddit(const std::string& session_id, const std::string& subreddit) {
  std::lock_guard lock(mutex_);
  Session& old = find_locked(session_id);
  if (old.phase == Phase::Done) throw GameError(GameErrorCode::BadPhase, "session is already complete");
  ServeCounts counts = serve_counts_;
  Rng rng = rng_;
  std::string id = new_session_id_locked();
  Session fresh = game::start_session(plan_, subreddit, counts, rng, id, clock_());
  serve_counts_ = std::move(counts);
  rng_ = rng;
  sessions_.erase(session_id);
  RoundPayload round = round_payload(fresh, plan_);
  sessions_[fresh.session_id] = fresh;
  return {std::move(fresh), std::move(round)};
}

SessionSummary GameEngine::submit_questionnaire(const std::string& session_id,
                                                const std::optional<QuestionnaireResponse>& answers) {
  std::lock_guard lock(mutex_);
  Session& live = find_locked(session_id);
  Session s = live;
  const SessionSummary summary = game::submit_questionnaire(s, answers);
  if (answers) sink_.append_questionnaire(*answers);
  live = std::move(s);
  return summary;
}

std::optional<Session> GameEngine::session(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) return std::nullopt;
  return it->second;
}

ServeCounts GameEngine::serve_counts() const {
  std::lock_guard lock(mutex_);
  return serve_counts_;
}

namespace {

Phase phase_from_string(std::string_view text) {
  for (Phase p : {Phase::AwaitPreference, Phase::AwaitPrediction, Phase::Reveal, Phase::Questionnaire, Phase::Done})
    if (to_string(p) == text) return p;
  throw ValidationError("unknown phase '" + std::string(text) + "'");
}

}  // namespace

std::string GameEngine::snapshot() const {
  std::lock_guard lock(mutex_);
  ordered_json doc;
  doc["serve_counts"] = serve_counts_;
  ordered_json sessions = ordered_json::array();
  for (const auto& [id, s] : sessions_) {
    ordered_json js;
    js["session_id"] = s.session_id;
    js["subreddit"] = s.subreddit;
    js["round_index"] = s.round_index;
    js["phase"] = to_string(s.phase);
    js["served"] = s.served;
    ordered_json judgments = ordered_json::array();
    for (const auto& j : s.judgments) judgments.push_back(ordered_json::parse(judgment_to_line(j)));
    js["judgments"] = std::move(judgments);
    js["started_at"] = s.started_at;
    js["pending_preference"] =
        s.pending_preference ? ordered_json(to_string(*s.pending_preference)) : ordered_json(nullptr);
    js["pending_pref_ms"] = s.pending_pref_ms;
    sessions.push_back(std::move(js));
  }
  doc["sessions"] = std::move(sessions);
  return doc.dump();
}

void GameEngine::restore(const std::string& snapshot_text) {
  std::map<std::string, Session> sessions;
  ServeCounts counts;
  try {
    const json doc = json::parse(snapshot_text);
    counts = doc.at("serve_counts").get<ServeCounts>();
    for (const auto& js : doc.at("sessions")) {
      Session s;
      s.session_id = js.at("session_id").get<std::string>();
      s.subreddit = js.at("subreddit").get<std::string>();
      s.round_index = js.at("round_index").get<int>();
      s.phase = phase_from_string(js.at("phase").get<std::string>());
      s.served = js.at("served").get<std::vector<std::string>>();
      std::string lines;
      for (const auto& j : js.at("judgments")) lines += j.dump() + "\n";
      std::istringstream in(lines);
      s.judgments = read_judgment_log(in);
      s.started_at = js.at("started_at").get<std::int64_t>();
      if (!js.at("pending_preference").is_null())
        s.pending_preference = side_from_string(js.at("pending_preference").get<std::string>());
      s.pending_pref_ms = js.at("pending_pref_ms").get<std::int64_t>();
      for (const auto& pid : s.served)
        if (!plan_.find(pid)) throw IntegrityError("snapshot references unknown pair '" + pid + "'");
      sessions[s.session_id] = std::move(s);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed snapshot: ") + e.what());
  }
  std::lock_guard lock(mutex_);
  sessions_ = std::move(sessions);
  serve_counts_ = std::move(counts);
}

}  // namespace karma
