#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "karma/cli.hpp"
#include "karma/corpus.hpp"
#include "karma/pairing.hpp"
#include "karma/report.hpp"

using namespace karma;
namespace fs = std::filesystem;

namespace {

const fs::path demo = KARMA_DEMO_DIR;

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("karma_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("no subcommand or a missing flag is a usage error") {
  auto r = cli({});
  CHECK(r.code == 1);
  CHECK(r.err.find("Usage") != std::string::npos);

  r = cli({"ingest", "--out", "x.json"});
  CHECK(r.code == 1);
  CHECK(r.err.find("--posts") != std::string::npos);
  CHECK(r.err.find("Usage") != std::string::npos);

  r = cli({"frobnicate"});
  CHECK(r.code == 1);
}

TEST_CASE("help goes to stdout") {
  auto r = cli({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("pairgen") != std::string::npos);
}

TEST_CASE("ingest then pairgen on the demo posts") {
  const auto dir = scratch("ingest");
  auto r = cli({"ingest", "--posts", (demo / "posts.jsonl").string(), "--views", (demo / "views.csv").string(),
                "--out", (dir / "corpus.json").string()});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("skipped 2") != std::string::npos);
  CHECK(slurp(dir / "corpus.json") == slurp(demo / "corpus.json"));

  r = cli({"pairgen", "--corpus", (dir / "corpus.json").string(), "--per-subreddit", "50", "--seed", "2017", "--out",
           (dir / "plan.json").string()});
  REQUIRE(r.code == 0);
  const auto corpus = load_corpus_file((dir / "corpus.json").string());
  const auto plan = load_plan_file((dir / "plan.json").string(), corpus);
  CHECK(plan.pairs.size() == 400);
  CHECK(plan.subreddits().size() == 8);
}

TEST_CASE("analyze on the bundled demo") {
  const auto dir = scratch("analyze");
  auto r = cli({"analyze", "--judgments", (demo / "judgments.jsonl").string(), "--questionnaires",
                (demo / "questionnaires.jsonl").string(), "--plan", (demo / "plan.json").string(), "--corpus",
                (demo / "corpus.json").string(), "--subscribers", (demo / "subscribers.csv").string(), "--out-dir",
                dir.string()});
  REQUIRE(r.code == 0);
  for (const char* f : {"table1.csv", "table2.csv", "fig2_reddit.csv", "fig2_imgur.csv", "fig3_points.csv",
                        "fig4_types.csv", "fig5_reddit.csv", "fig5_imgur.csv", "fig6_hist.csv",
                        "fig7_delta_kappa.csv", "report.json"})
    CHECK_MESSAGE(fs::file_size(dir / f) > 0, f);
}

TEST_CASE("simulate regenerates the demo log") {
  const auto dir = scratch("simulate");
  auto r = cli({"simulate", "--plan", (demo / "plan.json").string(), "--corpus", (demo / "corpus.json").string(),
                "--model", (demo / "model.json").string(), "--sessions", "1000", "--seed", "2017", "--data-dir",
                dir.string()});
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "judgments.jsonl") == slurp(demo / "judgments.jsonl"));
  CHECK(slurp(dir / "questionnaires.jsonl") == slurp(demo / "questionnaires.jsonl"));
}

TEST_CASE("exit codes") {
  const auto dir = scratch("codes");
  auto r = cli({"ingest", "--posts", (dir / "absent.jsonl").string(), "--out", (dir / "c.json").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("I/O error") != std::string::npos);

  std::ofstream(dir / "mix.json") << R"({"VH-VH": 0.9, "H-H": 0.9})";
  r = cli({"pairgen", "--corpus", (demo / "corpus.json").string(), "--mix", (dir / "mix.json").string(), "--out",
           (dir / "plan.json").string()});
  CHECK(r.code == 1);

  r = cli({"pairgen", "--corpus", (demo / "corpus.json").string(), "--out", "/proc/nope/plan.json"});
  CHECK(r.code == 2);

  std::ofstream(dir / "blocker") << "x";
  r = cli({"analyze", "--judgments", (demo / "judgments.jsonl").string(), "--questionnaires",
           (demo / "questionnaires.jsonl").string(), "--plan", (demo / "plan.json").string(), "--corpus",
           (demo / "corpus.json").string(), "--subscribers", (demo / "subscribers.csv").string(), "--out-dir",
           (dir / "blocker" / "out").string()});
  CHECK(r.code == 2);
}
