#include "karma/api.hpp"

#include <json.hpp>

#include "karma/error.hpp"

namespace karma {

using nlohmann::json;
using nlohmann::ordered_json;

int http_status(GameErrorCode code) {
  switch (code) {
    case GameErrorCode::BadPhase: return 409;
    case GameErrorCode::StalePair: return 409;
    case GameErrorCode::UnknownSession: return 404;
    case GameErrorCode::UnknownSubreddit: return 400;
    case GameErrorCode::Validation: return 400;
  }
  return 500;
}

namespace {

ApiResponse ok(ordered_json data) {
  ordered_json env;
  env["ok"] = true;
  env["data"] = std::move(data);
  return {200, env.dump()};
}

ApiResponse fail(GameErrorCode code, const std::string& message, int status) {
  ordered_json env;
  env["ok"] = false;
  env["error"] = {{"code", std::string(to_string(code))}, {"message", message}};
  return {status, env.dump()};
}

ordered_json card_json(const ImageCard& c) { return {{"title", c.title}, {"image_url", c.image_url}}; }

ordered_json round_json(const RoundPayload& r) {
  return {{"index", r.index}, {"pair_id", r.pair_id}, {"left", card_json(r.left)}, {"right", card_json(r.right)}};
}

ordered_json session_json(const StartResult& s) {
  return {{"session_id", s.session.session_id},
          {"subreddit", s.session.subreddit},
          {"round", round_json(s.round)},
          {"question", "preference"}};
}

json parse_body(std::string_view body) {
  if (body.empty()) return json::object();
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw GameError(GameErrorCode::Validation, "request body must be a JSON object");
  return j;
}

std::string required_string(const json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || !it->is_string())
    throw GameError(GameErrorCode::Validation, std::string("missing string field '") + key + "'");
  return it->get<std::string>();
}

std::int64_t required_ms(const json& body) {
  auto it = body.find("response_ms");
  if (it == body.end() || !it->is_number_integer())
    throw GameError(GameErrorCode::Validation, "missing integer field 'response_ms'");
  return it->get<std::int64_t>();
}

Side required_side(const json& body) {
  const std::string choice = required_string(body, "choice");
  if (choice == "L") return Side::Left;
  if (choice == "R") return Side::Right;
  throw GameError(GameErrorCode::Validation, "choice must be \"L\" or \"R\"");
}

std::optional<QuestionnaireResponse> parse_answers(const json& body, const std::string& session_id) {
  auto it = body.find("answers");
  if (it == body.end() || it->is_null()) return std::nullopt;
  if (!it->is_object()) throw GameError(GameErrorCode::Validation, "answers must be an object");
  const json& a = *it;
  try {
    QuestionnaireResponse q;
    q.session_id = session_id;
    q.usage = usage_from_string(required_string(a, "q_usage"));
    q.tenure = tenure_from_string(required_string(a, "q_tenure"));
    q.attention = yes_no_from_string(required_string(a, "q_attention"));
    q.votes = yes_no_from_string(required_string(a, "q_votes"));
    q.votes_new = yes_no_from_string(required_string(a, "q_votes_new"));
    return q;
  } catch (const ValidationError& e) {
    throw GameError(GameErrorCode::Validation, e.what());
  }
}

}  // namespace

ApiResponse Api::route(std::string_view method, std::string_view path, std::string_view body) {
  try {
    if (method == "GET" && path == "/api/subreddits") {
      ordered_json list = ordered_json::array();
      for (const auto& s : engine_.plan().subreddits()) list.push_back({{"name", s}, {"display_name", "/r/" + s}});
      return ok({{"subreddits", list}});
    }
    if (method != "POST") return fail(GameErrorCode::Validation, "no route for " + std::string(method) + " " + std::string(path), 404);

    const json request = parse_body(body);
    if (path == "/api/session") {
      std::optional<std::string> subreddit;
      if (auto it = request.find("subreddit"); it != request.end() && !it->is_null()) {
        if (!it->is_string()) throw GameError(GameErrorCode::Validation, "subreddit must be a string");
        subreddit = it->get<std::string>();
      }
      return ok(session_json(engine_.start_session(subreddit)));
    }

    constexpr std::string_view prefix = "/api/session/";
    if (!path.starts_with(prefix)) return fail(GameErrorCode::Validation, "no route for " + std::string(path), 404);
    const std::string_view rest = path.substr(prefix.size());
    const auto slash = rest.find('/');
    if (slash == std::string_view::npos) return fail(GameErrorCode::Validation, "no route for " + std::string(path), 404);
    const std::string id(rest.substr(0, slash));
    const std::string_view action = rest.substr(slash + 1);
    if (!engine_.session(id)) throw GameError(GameErrorCode::UnknownSession, "unknown session " + id);

    if (action == "preference") {
      const auto pair_id = required_string(request, "pair_id");
      const Side choice = required_side(request);
      const auto ms = required_ms(request);
      engine_.submit_preference(id, pair_id, choice, ms);
      return ok({{"question", "prediction"}});
    }
    if (action == "prediction") {
      const auto pair_id = required_string(request, "pair_id");
      const Side choice = required_side(request);
      const auto ms = required_ms(request);
      const PredictionResult r = engine_.submit_prediction(id, pair_id, choice, ms);
      ordered_json data;
      data["reveal"] = {
          {"left_score", r.reveal.left_score}, {"right_score", r.reveal.right_score}, {"correct", r.reveal.correct}};
      data["advance_after_ms"] = r.reveal.reveal_ms;
      data["next"] = r.next ? round_json(*r.next) : ordered_json("questionnaire");
      return ok(std::move(data));
    }
    if (action == "subreddit") {
      return ok(session_json(engine_.switch_subreddit(id, required_string(request, "subreddit"))));
    }
    if (action == "questionnaire") {
      const SessionSummary s = engine_.submit_questionnaire(id, parse_answers(request, id));
      return ok({{"summary", {{"correct_predictions", s.correct_predictions}, {"total", s.total}}}});
    }
    return fail(GameErrorCode::Validation, "no route for " + std::string(path), 404);
  } catch (const GameError& e) {
    return fail(e.code(), e.what(), http_status(e.code()));
  } catch (const ValidationError& e) {
    return fail(GameErrorCode::Validation, e.what(), 400);
  } catch (const std::exception& e) {
    return fail(GameErrorCode::Validation, e.what(), 500);
  }
}

}  // namespace karma
