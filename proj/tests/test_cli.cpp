#include <catch2/catch_amalgamated.hpp>

#include <iostream>
#include <sstream>

#include "robdict/cli.hpp"
#include "support.hpp"

using namespace robdict;
using testsupport::slurp;
using testsupport::TempDir;

namespace {

int run_cli(std::initializer_list<std::string> args) { return cli::run(std::vector<std::string>(args)); }

class CaptureStream {
 public:
  explicit CaptureStream(std::ostream& stream) : stream_(stream), old_(stream.rdbuf(buffer_.rdbuf())) {}
  ~CaptureStream() { stream_.rdbuf(old_); }
  std::string str() const { return buffer_.str(); }

 private:
  std::ostream& stream_;
  std::ostringstream buffer_;
  std::streambuf* old_;
};

nlohmann::json pipeline_config() {
  return {
      {"seed", 7},
      {"problem",
       {{"kind", "heat1d"}, {"n_samples", 40}, {"n_nodes", 61}, {"test_fraction", 0.25}}},
      {"dissimilarity", {{"measure", "sine"}, {"n", 1}}},
      {"clustering", {{"k", 3}, {"restarts", 5}}},
      {"selection", {{"n_s", 2}}},
      {"dictionary", {{"n_modes", 2}}},
      {"admissible",
       {{"k_values", {2, 3}}, {"n_values", {1, 2}}, {"restarts", 3}, {"budget", 20}}},
      {"compare", {{"k", 2}, {"n", 1}, {"n_s", 1}, {"restarts", 3}}},
      {"mds", {{"dim", 2}}},
  };
}

}  // namespace

TEST_CASE("cli rejects broken invocations with exit code 2", "[cli]") {
  TempDir dir("cli_errors");
  CaptureStream err(std::cerr);

  SECTION("missing config file") {
    REQUIRE(run_cli({"generate", "--config", dir.path("absent.json"), "--out", dir.str()}) == 2);
  }

  SECTION("malformed config JSON") {
    std::ofstream(dir.path("bad.json")) << "{ not json";
    REQUIRE(run_cli({"generate", "--config", dir.path("bad.json"), "--out", dir.str()}) == 2);
  }

  SECTION("unknown command") {
    write_json_file(pipeline_config(), dir.path("config.json"));
    CaptureStream out(std::cout);
    REQUIRE(run_cli({"frobnicate", "--config", dir.path("config.json")}) == 2);
  }

  SECTION("missing problem section") {
    write_json_file({{"seed", 1}}, dir.path("config.json"));
    REQUIRE(run_cli({"generate", "--config", dir.path("config.json"), "--out", dir.str()}) == 2);
  }

  SECTION("unknown problem kind") {
    write_json_file({{"problem", {{"kind", "heat3d"}}}}, dir.path("config.json"));
    REQUIRE(run_cli({"generate", "--config", dir.path("config.json"), "--out", dir.str()}) == 2);
  }

  SECTION("upstream artifacts are named when missing") {
    write_json_file(pipeline_config(), dir.path("config.json"));
    REQUIRE(run_cli({"cluster", "--config", dir.path("config.json"), "--out", dir.str()}) == 2);
    REQUIRE(err.str().find("robdict dissim") != std::string::npos);
  }
}

TEST_CASE("cli pipeline end to end", "[cli]") {
  TempDir dir("cli_pipeline");
  const std::string cfg = dir.path("config.json");
  write_json_file(pipeline_config(), cfg);
  auto step = [&](const char* cmd) { return run_cli({cmd, "--config", cfg, "--out", dir.str()}); };

  REQUIRE(step("generate") == 0);
  SnapshotSet train = import_snapshots(dir.path("train.snap"));
  SnapshotSet test = import_snapshots(dir.path("test.snap"));
  REQUIRE(train.n_dof() == 61);
  REQUIRE(train.n_trajectories() == 30);
  REQUIRE(test.n_trajectories() == 10);
  REQUIRE(train.params.size() == 30);

  REQUIRE(step("dissim") == 0);
  DissimilarityMatrix dm = load_dissimilarity_matrix(dir.path("dissim_train.csv"));
  REQUIRE(dm.d.rows() == 30);
  REQUIRE(dm.measure.kind == Measure::sine);

  REQUIRE(step("cluster") == 0);
  nlohmann::json clustering = read_json_file(dir.path("clustering.json"));
  REQUIRE(clustering["K"] == 3);
  REQUIRE(clustering["labels"].size() == 30);
  REQUIRE(clustering["provenance"]["config_hash"].get<std::string>().size() == 16);
  REQUIRE(clustering["provenance"]["seed"] == 7);

  REQUIRE(step("select") == 0);
  nlohmann::json selection = read_json_file(dir.path("selection.json"));
  REQUIRE(selection["groups"].size() == 3);
  for (const auto& g : selection["groups"]) REQUIRE(g.size() == 2);
  REQUIRE(selection["flat"].size() == 6);

  REQUIRE(step("build") == 0);
  RomDictionary dict = load_dictionary(dir.path("dictionary"));
  REQUIRE(dict.k == 3);
  REQUIRE(dict.n_modes == 2);
  REQUIRE(std::filesystem::exists(dir.path("global_basis.snap")));

  REQUIRE(step("evaluate") == 0);
  nlohmann::json evaluation = read_json_file(dir.path("evaluation.json"));
  REQUIRE(evaluation["eta"].size() == 10);
  REQUIRE(evaluation["assigned"].size() == 10);
  REQUIRE_FALSE(evaluation["gains"].is_null());
  REQUIRE(evaluation["gains"]["values"].size() == 10);
  const double mean_eta = evaluation["eta_stats"]["mean"].get<double>();
  REQUIRE(mean_eta > 0.0);
  REQUIRE(mean_eta <= 1.0);

  {
    CaptureStream out(std::cout);
    REQUIRE(step("admissible") == 0);
    REQUIRE(out.str().find("admissible set") != std::string::npos);
  }
  nlohmann::json admissible = read_json_file(dir.path("admissible.json"));
  REQUIRE(admissible["cells"].size() == 4);
  REQUIRE(admissible["n_limit"] == 3);
  REQUIRE(std::filesystem::exists(dir.path("admissible.csv")));

  REQUIRE(step("compare") == 0);
  nlohmann::json compare = read_json_file(dir.path("compare.json"));
  REQUIRE(compare["strategies"].size() == 6);
  REQUIRE(compare["correlations"].size() == 3);
  for (const auto& s : compare["strategies"]) REQUIRE(s["eta"].size() == 10);

  REQUIRE(step("mds") == 0);
  nlohmann::json mds = read_json_file(dir.path("mds.json"));
  REQUIRE(mds["coordinates"].size() == 30);
  REQUIRE(mds["dim_used"].get<int>() >= 1);
  REQUIRE(mds["dim_used"].get<int>() <= 2);

  SECTION("artifact bytes are reproducible") {
    const std::string dissim_bytes = slurp(dir.path("dissim_train.csv"));
    const std::string clustering_bytes = slurp(dir.path("clustering.json"));
    const std::string evaluation_bytes = slurp(dir.path("evaluation.json"));
    const std::string admissible_bytes = slurp(dir.path("admissible.json"));
    REQUIRE(step("dissim") == 0);
    REQUIRE(step("cluster") == 0);
    REQUIRE(step("evaluate") == 0);
    {
      CaptureStream out(std::cout);
      REQUIRE(step("admissible") == 0);
    }
    REQUIRE(slurp(dir.path("dissim_train.csv")) == dissim_bytes);
    REQUIRE(slurp(dir.path("clustering.json")) == clustering_bytes);
    REQUIRE(slurp(dir.path("evaluation.json")) == evaluation_bytes);
    REQUIRE(slurp(dir.path("admissible.json")) == admissible_bytes);
  }

  SECTION("a seed override reaches the artifacts") {
    REQUIRE(run_cli({"cluster", "--config", cfg, "--out", dir.str(), "--seed", "99"}) == 0);
    nlohmann::json reclustered = read_json_file(dir.path("clustering.json"));
    REQUIRE(reclustered["provenance"]["seed"] == 99);
    REQUIRE(reclustered["seed"] == 99);
  }

  SECTION("thread count does not change results") {
    const std::string bytes = slurp(dir.path("dissim_train.csv"));
    REQUIRE(run_cli({"dissim", "--config", cfg, "--out", dir.str(), "--threads", "2"}) == 0);
    REQUIRE(slurp(dir.path("dissim_train.csv")) == bytes);
    REQUIRE(run_cli({"dissim", "--config", cfg, "--out", dir.str(), "--threads", "1"}) == 0);
    REQUIRE(slurp(dir.path("dissim_train.csv")) == bytes);
  }

  SECTION("an oversized basis reports a numerical failure") {
    nlohmann::json big = pipeline_config();
    big["dictionary"]["n_modes"] = 50;
    write_json_file(big, dir.path("big.json"));
    CaptureStream err(std::cerr);
    REQUIRE(run_cli({"build", "--config", dir.path("big.json"), "--out", dir.str()}) == 3);
  }
}

TEST_CASE("generate without a test fraction clears stale test artifacts", "[cli]") {
  TempDir dir("cli_trainonly");
  nlohmann::json cfg = pipeline_config();
  cfg["problem"]["n_samples"] = 10;
  cfg["problem"]["n_nodes"] = 31;
  write_json_file(cfg, dir.path("split.json"));
  REQUIRE(run_cli({"generate", "--config", dir.path("split.json"), "--out", dir.str()}) == 0);
  REQUIRE(std::filesystem::exists(dir.path("test.snap")));

  cfg["problem"]["test_fraction"] = 0.0;
  write_json_file(cfg, dir.path("all.json"));
  REQUIRE(run_cli({"generate", "--config", dir.path("all.json"), "--out", dir.str()}) == 0);
  REQUIRE(std::filesystem::exists(dir.path("train.snap")));
  REQUIRE_FALSE(std::filesystem::exists(dir.path("test.snap")));

  SnapshotSet all = import_snapshots(dir.path("train.snap"));
  REQUIRE(all.n_trajectories() == 10);
}
