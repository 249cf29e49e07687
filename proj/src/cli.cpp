#include "karma/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "karma/api.hpp"
#include "karma/corpus.hpp"
#include "karma/error.hpp"
#include "karma/io.hpp"
#include "karma/pairing.hpp"
#include "karma/report.hpp"
#include "karma/simulate.hpp"

namespace karma {

namespace {

struct IngestArgs {
  std::string posts, views, out;
  std::size_t min_posts = kDefaultMinSubredditPosts;
};

struct PairgenArgs {
  std::string corpus, mix, out;
  int per_subreddit = 50;
  std::uint64_t seed = 0;
};

struct ServeArgs {
  std::string plan, corpus, data_dir, host = "0.0.0.0", static_dir;
  int port = 8080;
  std::uint64_t seed = 0;
};

struct SimulateArgs {
  std::string plan, corpus, model, data_dir;
  std::size_t sessions = 1000;
  std::uint64_t seed = 0;
};

struct AnalyzeArgs {
  std::string judgments, questionnaires, plan, corpus, subscribers, out_dir;
};

int ingest(const IngestArgs& a, std::ostream& out, std::ostream& err) {
  auto posts_in = io::open_input(a.posts);
  const ParseResult parsed = parse_posts(posts_in);
  if (parsed.skipped) err << "warning: skipped " << parsed.skipped << " malformed line(s)\n";
  const auto unique = dedupe_reposts(parsed.posts);
  auto result = compute_percentiles(unique, a.min_posts);
  for (const auto& s : result.rejected_subreddits)
    err << "warning: subreddit '" << s << "' has fewer than " << a.min_posts << " posts; excluded\n";
  ViewCounts views;
  if (!a.views.empty()) {
    auto views_in = io::open_input(a.views);
    views = read_views(views_in);
  }
  auto entries = join_views(std::move(result.entries), views);
  save_corpus_file(a.out, entries);
  std::size_t with_views = 0;
  for (const auto& e : entries) with_views += e.views ? 1 : 0;
  out << "posts read: " << parsed.posts.size() << ", reposts removed: " << parsed.posts.size() - unique.size()
      << ", non-image: " << parsed.non_image << ", entries written: " << entries.size()
      << " (with views: " << with_views << ")\n";
  return 0;
}

int pairgen(const PairgenArgs& a, std::ostream& out) {
  const auto corpus = load_corpus_file(a.corpus);
  PlanConfig config;
  config.per_subreddit = a.per_subreddit;
  config.seed = a.seed;
  if (!a.mix.empty()) {
    auto in = io::open_input(a.mix);
    config.type_mix = read_type_mix(in);
  }
  const PairPlan plan = generate_plan(corpus, config);
  save_plan_file(a.out, plan);
  out << "pairs: " << plan.pairs.size() << " over " << plan.subreddits().size() << " subreddits\n";
  return 0;
}

std::filesystem::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create directory " + dir);
  return dir;
}

int serve_cmd(const ServeArgs& a, std::ostream& out) {
  const auto corpus = load_corpus_file(a.corpus);
  PairPlan plan = load_plan_file(a.plan, corpus);
  const auto dir = ensure_dir(a.data_dir);
  FileLog log((dir / "judgments.jsonl").string(), (dir / "questionnaires.jsonl").string());
  const std::uint64_t seed = a.seed ? a.seed : std::random_device{}();
  GameEngine engine(std::move(plan), log, seed, [] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
  });
  ServeOptions options;
  options.host = a.host;
  options.port = a.port;
  options.static_dir = a.static_dir;
  options.snapshot_path = (dir / "sessions.snapshot.json").string();
  out << "serving on " << a.host << ":" << a.port << "\n" << std::flush;
  serve(engine, options);
  return 0;
}

int simulate_cmd(const SimulateArgs& a, std::ostream& out) {
  const auto corpus = load_corpus_file(a.corpus);
  const PairPlan plan = load_plan_file(a.plan, corpus);
  auto model_in = io::open_input(a.model);
  const PlayerModel model = read_player_model(model_in);
  const SimulationResult sim = simulate_players(plan, model, a.sessions, a.seed);
  const auto dir = ensure_dir(a.data_dir);
  {
    auto j = io::open_output((dir / "judgments.jsonl").string());
    for (const auto& r : sim.log.judgments) j << judgment_to_line(r) << "\n";
    if (!j) throw IoError("write failed: judgments.jsonl");
  }
  {
    auto q = io::open_output((dir / "questionnaires.jsonl").string());
    for (const auto& r : sim.log.questionnaires) q << questionnaire_to_line(r) << "\n";
    if (!q) throw IoError("write failed: questionnaires.jsonl");
  }
  out << "sessions: " << sim.sessions_started << " started, " << sim.sessions_completed << " completed, "
      << sim.sessions_abandoned << " abandoned; judgments: " << sim.log.judgments.size()
      << "; questionnaires: " << sim.log.questionnaires.size() << "\n";
  return 0;
}

int analyze(const AnalyzeArgs& a, std::ostream& out) {
  const auto corpus = load_corpus_file(a.corpus);
  const PairPlan plan = load_plan_file(a.plan, corpus);
  const auto judgments = load_judgment_log(a.judgments);
  const auto questionnaires = load_questionnaire_log(a.questionnaires);
  auto subs_in = io::open_input(a.subscribers);
  const Subscribers subscribers = read_subscribers(subs_in);
  const Report report = build_report(judgments, questionnaires, plan, subscribers);
  emit_report(report, a.out_dir);
  out << "pairs with judgments: " << report.pair_stats.size() << "; report written to " << a.out_dir << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pairwise preference game and popularity-predictor analysis", "karma"};
  app.require_subcommand(1);

  IngestArgs ia;
  auto* ingest_cmd = app.add_subcommand("ingest", "Build a binned corpus from a post dump");
  ingest_cmd->add_option("--posts", ia.posts, "Line-delimited post records")->required();
  ingest_cmd->add_option("--views", ia.views, "image_id,views table");
  ingest_cmd->add_option("--min-posts", ia.min_posts, "Minimum posts per subreddit")->capture_default_str();
  ingest_cmd->add_option("--out", ia.out, "Corpus document to write")->required();

  PairgenArgs pa;
  auto* pairgen_cmd = app.add_subcommand("pairgen", "Generate the pair plan");
  pairgen_cmd->add_option("--corpus", pa.corpus)->required();
  pairgen_cmd->add_option("--per-subreddit", pa.per_subreddit)->capture_default_str();
  pairgen_cmd->add_option("--seed", pa.seed)->capture_default_str();
  pairgen_cmd->add_option("--mix", pa.mix, "Pair-type mix (JSON object of fractions)");
  pairgen_cmd->add_option("--out", pa.out)->required();

  ServeArgs sa;
  auto* serve_sub = app.add_subcommand("serve", "Run the game service");
  serve_sub->add_option("--plan", sa.plan)->required();
  serve_sub->add_option("--corpus", sa.corpus)->required();
  serve_sub->add_option("--data-dir", sa.data_dir)->required();
  serve_sub->add_option("--port", sa.port)->capture_default_str();
  serve_sub->add_option("--host", sa.host)->capture_default_str();
  serve_sub->add_option("--static-dir", sa.static_dir, "UI bundle to serve at /");
  serve_sub->add_option("--seed", sa.seed, "Engine seed (0 = random)");

  SimulateArgs ma;
  auto* simulate_sub = app.add_subcommand("simulate", "Play synthetic sessions through the game engine");
  simulate_sub->add_option("--plan", ma.plan)->required();
  simulate_sub->add_option("--corpus", ma.corpus)->required();
  simulate_sub->add_option("--sessions", ma.sessions)->capture_default_str();
  simulate_sub->add_option("--model", ma.model)->required();
  simulate_sub->add_option("--seed", ma.seed)->capture_default_str();
  simulate_sub->add_option("--data-dir", ma.data_dir)->required();

  AnalyzeArgs aa;
  auto* analyze_sub = app.add_subcommand("analyze", "Build groundtruth and emit the report tables");
  analyze_sub->add_option("--judgments", aa.judgments)->required();
  analyze_sub->add_option("--questionnaires", aa.questionnaires)->required();
  analyze_sub->add_option("--plan", aa.plan)->required();
  analyze_sub->add_option("--corpus", aa.corpus)->required();
  analyze_sub->add_option("--subscribers", aa.subscribers)->required();
  analyze_sub->add_option("--out-dir", aa.out_dir)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return 1;
  }

  try {
    if (*ingest_cmd) return ingest(ia, out, err);
    if (*pairgen_cmd) return pairgen(pa, out);
    if (*serve_sub) return serve_cmd(sa, out);
    if (*simulate_sub) return simulate_cmd(ma, out);
    if (*analyze_sub) return analyze(aa, out);
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace karma
