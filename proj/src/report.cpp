#include "karma/report.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "karma/error.hpp"
#include "karma/io.hpp"

namespace karma {

using nlohmann::ordered_json;

namespace {

// Half widths above 0.5 carry no information for a proportion.
double clamp_ci(double half_width) { return std::min(half_width, 0.5); }

ordered_json opt_bool(const std::optional<bool>& b) { return b ? ordered_json(*b) : ordered_json(nullptr); }

template <typename T>
ordered_json opt_number(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

template <typename T, typename F>
ordered_json estimate_json(const Estimate<T>& e, F&& to_json) {
  if (!e.ok()) return {{"estimable", false}, {"reason", e.reason}};
  ordered_json j = {{"estimable", true}};
  const ordered_json body = to_json(*e.value);
  for (const auto& [k, v] : body.items()) j[k] = v;
  return j;
}

ordered_json to_json(const AccuracyEstimate& a) {
  return {{"correct", a.correct},
          {"n", a.n},
          {"accuracy", a.accuracy},
          {"ci_half_width", clamp_ci(a.ci_half_width)}};
}

ordered_json to_json(const LogisticResult& r) {
  return {{"intercept", r.intercept},
          {"slope", r.slope},
          {"slope_se", r.slope_se},
          {"pseudo_r2_mcfadden", r.pseudo_r2},
          {"p_value_lr", r.p_value},
          {"log_likelihood", r.log_likelihood},
          {"null_log_likelihood", r.null_log_likelihood},
          {"n", r.n},
          {"converged", r.converged},
          {"iterations", r.iterations}};
}

ordered_json to_json(const OlsResult& r) {
  return {{"intercept", r.intercept}, {"slope", r.slope}, {"slope_se", r.slope_se}, {"r2", r.r2},
          {"p_value", r.p_value},     {"n", r.n},         {"df", r.df},             {"saturated", r.saturated}};
}

ordered_json to_json(const TestResult& t) {
  return {{"t", t.t},
          {"df", t.df},
          {"p", t.p},
          {"tails", t.tails == Tails::One ? "one" : "two"},
          {"mean_a", t.mean_a},
          {"mean_b", t.mean_b},
          {"n_a", t.n_a},
          {"n_b", t.n_b}};
}

ordered_json to_json(const PredictorAgreement& a) {
  return {{"match_rate", a.match_rate},
          {"matched_pairs", a.matched_pairs},
          {"r_squared_log_scale", a.r_squared},
          {"correlated_entries", a.correlated_entries}};
}

template <typename T>
ordered_json logistic_pair(const PerPredictor<Estimate<T>>& per) {
  ordered_json j;
  for (Predictor p : kPredictors)
    j[std::string(to_string(p))] = estimate_json(per[p], [](const T& v) { return to_json(v); });
  return j;
}

ordered_json reference_values() {
  // Outcomes of the original deployment with human players.
  ordered_json subreddit_judgments = {{"funny", 3090},          {"OldSchoolCool", 3460}, {"aww", 3334},
                                      {"pics", 3280},           {"photocritique", 1130}, {"CrappyDesign", 1726},
                                      {"itookapicture", 3170}, {"EarthPorn", 1484}};
  return {{"note", "observed with the original human players; listed for comparison only, never asserted"},
          {"players", 2660},
          {"judgments", 20674},
          {"questionnaires_completed", 2083},
          {"judgments_per_subreddit", subreddit_judgments},
          {"reddit_accuracy", 0.680},
          {"reddit_ci_half_width", 0.046},
          {"imgur_accuracy", 0.647},
          {"imgur_ci_half_width", 0.047},
          {"score_views_r2", 0.80},
          {"score_views_match_rate", 0.863},
          {"player_preference_accuracy", 0.540},
          {"player_preference_ci_half_width", 0.008},
          {"player_prediction_accuracy", 0.606},
          {"player_prediction_ci_half_width", 0.006},
          {"effort_p_value", 0.419},
          {"effort_mean_seconds_correct", 22},
          {"effort_mean_seconds_incorrect", 26},
          {"powerusers", 174},
          {"attentive_powerusers", 60}};
}

ordered_json groundtruth_to_json(const GroundtruthAnalysis& g) {
  ordered_json j;
  ordered_json overall;
  for (Predictor p : kPredictors)
    overall[std::string(to_string(p))] =
        estimate_json(g.overall[p], [](const AccuracyEstimate& a) { return to_json(a); });
  j["overall_accuracy"] = overall;
  j["predictor_agreement"] =
      estimate_json(g.predictor_agreement, [](const PredictorAgreement& a) { return to_json(a); });
  j["agreement_effect"] = logistic_pair(g.agreement);

  ordered_json sub;
  for (Predictor p : kPredictors) {
    ordered_json points = ordered_json::array();
    for (const auto& pt : g.subreddit[p].points)
      points.push_back({{"subreddit", pt.subreddit},
                        {"subscribers_millions", pt.subscribers_millions},
                        {"correct", pt.correct},
                        {"n", pt.n},
                        {"accuracy", opt_number(pt.accuracy)},
                        {"ci_half_width", clamp_ci(pt.ci_half_width)},
                        {"pairs", pt.pairs},
                        {"rate", opt_number(pt.rate)}});
    sub[std::string(to_string(p))] = {
        {"points", points}, {"fit", estimate_json(g.subreddit[p].fit, [](const OlsResult& r) { return to_json(r); })}};
  }
  j["subreddit_effect"] = sub;

  ordered_json types = ordered_json::array();
  for (const auto& row : g.balance.types) {
    ordered_json t = {{"pair_type", std::string(to_string(row.pair_type))},
                      {"pairs", row.pairs},
                      {"tie_pairs", row.tie_pairs},
                      {"share_percent", row.share_percent}};
    for (Predictor p : kPredictors) {
      const auto& a = row.accuracy[p];
      t[std::string(to_string(p))] = {{"correct", a.correct},
                                      {"n", a.n},
                                      {"accuracy", opt_number(a.accuracy)},
                                      {"ci_half_width", a.ci_half_width ? ordered_json(clamp_ci(*a.ci_half_width))
                                                                        : ordered_json(nullptr)}};
    }
    types.push_back(std::move(t));
  }
  j["balance_effect"] = {{"total_pairs", g.balance.total_pairs},
                         {"tie_pairs_excluded", g.balance.tie_pairs},
                         {"types", types},
                         {"delta_fit", logistic_pair(g.balance.delta_fit)}};
  return j;
}

std::string optional_cell(const std::optional<bool>& b) {
  if (!b) return "";
  return *b ? "1" : "0";
}

std::string optional_cell(const std::optional<double>& v) { return v ? io::format_double(*v) : ""; }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string fit_table(std::span<const PairStats> stats, Predictor predictor, const Estimate<LogisticResult>& fit,
                      bool use_delta) {
  std::ostringstream out;
  out << "pair_id," << (use_delta ? "delta" : "kappa") << ",correct,fitted_probability\n";
  for (const auto& s : stats) {
    const auto c = s.correct(predictor);
    if (!c) continue;
    const double x = use_delta ? s.delta : s.kappa;
    out << s.pair_id << ',' << io::format_double(x) << ',' << (*c ? 1 : 0) << ','
        << (fit.ok() ? io::format_double(fit.value->predict(x)) : "") << "\n";
  }
  return out.str();
}

}  // namespace

GroundtruthAnalysis analyze_groundtruth(std::span<const PairStats> stats, const Subscribers& subscribers,
                                        std::span<const CorpusEntry> plan_corpus) {
  GroundtruthAnalysis g;
  for (Predictor p : kPredictors) {
    try {
      g.overall[p] = {predictor_accuracy(stats, p), ""};
    } catch (const EstimationError& e) {
      g.overall[p] = {std::nullopt, e.what()};
    }
  }
  try {
    g.predictor_agreement = {predictor_agreement(stats, plan_corpus), ""};
  } catch (const EstimationError& e) {
    g.predictor_agreement = {std::nullopt, e.what()};
  }
  g.agreement = agreement_effect(stats);
  g.subreddit = subreddit_effect(stats, subscribers);
  g.balance = balance_effect(stats);
  return g;
}

Report build_report(std::span<const Judgment> judgments, std::span<const QuestionnaireResponse> questionnaires,
                    const PairPlan& plan, const Subscribers& subscribers) {
  Report r;
  r.pair_stats = build_groundtruth(judgments, plan);
  r.dataset = dataset_summary(judgments, plan);
  std::set<std::string> sessions;
  for (const auto& j : judgments) sessions.insert(j.session_id);
  r.questionnaire = questionnaire_summary(questionnaires, sessions.size());
  const auto entries = plan_entries(plan);
  r.groundtruth = analyze_groundtruth(r.pair_stats, subscribers, entries);
  try {
    r.players = {player_accuracy(judgments, plan), ""};
  } catch (const EstimationError& e) {
    r.players = {std::nullopt, e.what()};
  }
  r.expertise = expertise_analysis(judgments, questionnaires);
  r.effort = effort_analysis(judgments);
  return r;
}

std::string groundtruth_json(const GroundtruthAnalysis& analysis) { return groundtruth_to_json(analysis).dump(2); }

std::string report_json(const Report& r) {
  ordered_json j;
  ordered_json dataset = ordered_json::array();
  std::size_t total_judgments = 0, total_pairs = 0, total_images = 0;
  for (const auto& row : r.dataset) {
    dataset.push_back({{"subreddit", row.subreddit},
                       {"judgments", row.judgments},
                       {"image_pairs", row.image_pairs},
                       {"images", row.images}});
    total_judgments += row.judgments;
    total_pairs += row.image_pairs;
    total_images += row.images;
  }
  j["dataset_summary"] = {{"rows", dataset},
                          {"total", {{"judgments", total_judgments}, {"image_pairs", total_pairs}, {"images", total_images}}}};

  ordered_json answers = ordered_json::array();
  for (const auto& a : r.questionnaire.rows)
    answers.push_back({{"question", a.question}, {"answer", a.answer}, {"count", a.count}, {"percent", a.percent}});
  j["questionnaire_summary"] = {{"responses", r.questionnaire.responses},
                                {"completed_sessions", r.questionnaire.sessions},
                                {"answers", answers}};

  const ordered_json groundtruth = groundtruth_to_json(r.groundtruth);
  for (const auto& [k, v] : groundtruth.items()) j[k] = v;

  ordered_json dk = ordered_json::array();
  for (const auto& row : r.groundtruth.balance.delta_vs_kappa)
    dk.push_back({{"pair_id", row.pair_id},
                  {"delta", row.delta},
                  {"kappa", row.kappa},
                  {"reddit_correct", opt_bool(row.reddit_correct)},
                  {"imgur_correct", opt_bool(row.imgur_correct)}});
  j["delta_vs_kappa"] = dk;

  j["player_accuracy"] = estimate_json(r.players, [](const PlayerAccuracy& p) {
    return ordered_json{{"preference", to_json(p.preference)}, {"prediction", to_json(p.prediction)}};
  });

  ordered_json tests = ordered_json::array();
  for (const auto& t : r.expertise.tests) {
    tests.push_back({{"name", t.name},
                     {"group_a", t.group_a},
                     {"group_b", t.group_b},
                     {"alternative", "group_a greater"},
                     {"result", estimate_json(t.result, [](const TestResult& v) { return to_json(v); })},
                     {"bonferroni_threshold", opt_number(t.threshold)},
                     {"significant", t.significant}});
  }
  j["expertise_tests"] = {{"alpha", r.expertise.alpha},
                          {"battery_size", r.expertise.battery_size},
                          {"respondents", r.expertise.respondents},
                          {"powerusers", r.expertise.powerusers},
                          {"attentive_powerusers", r.expertise.attentive_powerusers},
                          {"tests", tests}};

  ordered_json hist = ordered_json::array();
  for (const auto& b : r.effort.histogram)
    hist.push_back({{"second", b.second}, {"correct", b.correct}, {"incorrect", b.incorrect}});
  j["effort_test"] = {{"judgments", r.effort.judgments},
                      {"response_time", "pref_ms + pred_ms"},
                      {"test", estimate_json(r.effort.test, [](const TestResult& v) { return to_json(v); })},
                      {"accuracy_trend", estimate_json(r.effort.accuracy_trend, [](const OlsResult& v) { return to_json(v); })},
                      {"histogram", hist}};

  j["reference_values"] = reference_values();
  return j.dump(2) + "\n";
}

const std::vector<std::string>& report_tables() {
  static const std::vector<std::string> names = {
      "table1.csv",      "table2.csv",      "fig2_reddit.csv", "fig2_imgur.csv", "fig3_points.csv",
      "fig4_types.csv",  "fig5_reddit.csv", "fig5_imgur.csv",  "fig6_hist.csv",  "fig7_delta_kappa.csv"};
  return names;
}

void emit_report(const Report& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + out_dir);

  write_file(dir / "report.json", report_json(report));

  {
    std::ostringstream out;
    write_pair_stats_csv(out, report.pair_stats);
    write_file(dir / "pair_stats.csv", out.str());
  }
  {
    std::ostringstream out;
    out << "subreddit,judgments,image_pairs,images\n";
    std::size_t tj = 0, tp = 0, ti = 0;
    for (const auto& row : report.dataset) {
      out << row.subreddit << ',' << row.judgments << ',' << row.image_pairs << ',' << row.images << "\n";
      tj += row.judgments;
      tp += row.image_pairs;
      ti += row.images;
    }
    out << "Total," << tj << ',' << tp << ',' << ti << "\n";
    write_file(dir / "table1.csv", out.str());
  }
  {
    std::ostringstream out;
    out << "question,answer,count,percent,responses\n";
    for (const auto& a : report.questionnaire.rows)
      out << a.question << ',' << a.answer << ',' << a.count << ',' << io::format_double(a.percent) << ','
          << report.questionnaire.responses << "\n";
    write_file(dir / "table2.csv", out.str());
  }
  const auto& g = report.groundtruth;
  for (Predictor p : kPredictors) {
    const std::string name(to_string(p));
    write_file(dir / ("fig2_" + name + ".csv"), fit_table(report.pair_stats, p, g.agreement[p], false));
    write_file(dir / ("fig5_" + name + ".csv"), fit_table(report.pair_stats, p, g.balance.delta_fit[p], true));
  }
  {
    std::ostringstream out;
    out << "predictor,subreddit,subscribers_millions,correct,n,accuracy,ci_half_width,pairs,rate\n";
    for (Predictor p : kPredictors)
      for (const auto& pt : g.subreddit[p].points)
        out << to_string(p) << ',' << pt.subreddit << ',' << io::format_double(pt.subscribers_millions) << ','
            << pt.correct << ',' << pt.n << ',' << optional_cell(pt.accuracy) << ','
            << io::format_double(clamp_ci(pt.ci_half_width)) << ',' << pt.pairs << ',' << optional_cell(pt.rate)
            << "\n";
    write_file(dir / "fig3_points.csv", out.str());
  }
  {
    std::ostringstream out;
    out << "pair_type,pairs,tie_pairs,share_percent,reddit_correct,reddit_n,reddit_accuracy,reddit_ci_half_width,"
           "imgur_correct,imgur_n,imgur_accuracy,imgur_ci_half_width\n";
    for (const auto& row : g.balance.types) {
      out << to_string(row.pair_type) << ',' << row.pairs << ',' << row.tie_pairs << ','
          << io::format_double(row.share_percent);
      for (Predictor p : kPredictors) {
        const auto& a = row.accuracy[p];
        const std::optional<double> ci =
            a.ci_half_width ? std::optional<double>(clamp_ci(*a.ci_half_width)) : std::nullopt;
        out << ',' << a.correct << ',' << a.n << ',' << optional_cell(a.accuracy) << ',' << optional_cell(ci);
      }
      out << "\n";
    }
    write_file(dir / "fig4_types.csv", out.str());
  }
  {
    std::ostringstream out;
    out << "second,correct,incorrect,total,accuracy\n";
    for (const auto& b : report.effort.histogram) {
      const std::size_t total = b.correct + b.incorrect;
      out << b.second << ',' << b.correct << ',' << b.incorrect << ',' << total << ','
          << (total ? io::format_double(static_cast<double>(b.correct) / total) : "") << "\n";
    }
    write_file(dir / "fig6_hist.csv", out.str());
  }
  {
    std::ostringstream out;
    out << "pair_id,delta,kappa,reddit_correct,imgur_correct\n";
    for (const auto& row : g.balance.delta_vs_kappa)
      out << row.pair_id << ',' << io::format_double(row.delta) << ',' << io::format_double(row.kappa) << ','
          << optional_cell(row.reddit_correct) << ',' << optional_cell(row.imgur_correct) << "\n";
    write_file(dir / "fig7_delta_kappa.csv", out.str());
  }
}

}  // namespace karma
