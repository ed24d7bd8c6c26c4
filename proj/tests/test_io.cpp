#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <fstream>

#include "robdict/dissimilarity.hpp"
#include "robdict/heat1d.hpp"
#include "robdict/snapshot_io.hpp"
#include "support.hpp"

using namespace robdict;
using testsupport::TempDir;

namespace {

SnapshotSet small_heat_set() {
  Heat1dDatasetConfig cfg;
  cfg.n_samples = 8;
  cfg.n_nodes = 31;
  cfg.seed = 11;
  return generate_heat1d_dataset(cfg);
}

}  // namespace

TEST_CASE("snapshot file round-trip is bit-exact", "[io]") {
  TempDir dir("io_roundtrip");
  SnapshotSet set = small_heat_set();
  export_snapshots(set, dir.path("set.snap"), {{"note", "roundtrip"}});

  nlohmann::json meta;
  SnapshotSet back = import_snapshots(dir.path("set.snap"), &meta);
  REQUIRE(back.values == set.values);
  REQUIRE(back.weights == set.weights);
  REQUIRE(back.trajectories.size() == set.trajectories.size());
  for (std::size_t t = 0; t < set.trajectories.size(); ++t) {
    REQUIRE(back.trajectories[t].begin == set.trajectories[t].begin);
    REQUIRE(back.trajectories[t].end == set.trajectories[t].end);
  }
  REQUIRE(back.params.size() == set.params.size());
  for (std::size_t t = 0; t < set.params.size(); ++t) {
    REQUIRE(back.params[t].size() == set.params[t].size());
    for (std::size_t e = 0; e < set.params[t].size(); ++e) {
      REQUIRE(back.params[t][e].name == set.params[t][e].name);
      REQUIRE(back.params[t][e].values == set.params[t][e].values);
    }
  }
  REQUIRE(back.mesh_coords == set.mesh_coords);
  REQUIRE(meta.at("note") == "roundtrip");
}

TEST_CASE("snapshot import preserves multi-column trajectories", "[io]") {
  TempDir dir("io_traj");
  std::mt19937_64 rng = make_rng(3);
  SnapshotSet set;
  set.values = testsupport::random_matrix(rng, 10, 7);
  set.weights = Eigen::VectorXd::Ones(10);
  set.trajectories = {{0, 3}, {3, 4}, {4, 7}};
  export_snapshots(set, dir.path("t.snap"));
  SnapshotSet back = import_snapshots(dir.path("t.snap"));
  REQUIRE(back.n_trajectories() == 3);
  REQUIRE(back.trajectory(2).cols() == 3);
  REQUIRE(back.values == set.values);
}

TEST_CASE("truncated snapshot file is rejected", "[io]") {
  TempDir dir("io_trunc");
  SnapshotSet set = small_heat_set();
  export_snapshots(set, dir.path("set.snap"));
  const std::string full = testsupport::slurp(dir.path("set.snap"));
  {
    std::ofstream out(dir.path("cut.snap"), std::ios::binary);
    out.write(full.data(), static_cast<std::streamsize>(full.size() / 2));
  }
  REQUIRE_THROWS_AS(import_snapshots(dir.path("cut.snap")), ConfigError);
}

TEST_CASE("snapshot file with a bad magic is rejected", "[io]") {
  TempDir dir("io_magic");
  SnapshotSet set = small_heat_set();
  export_snapshots(set, dir.path("set.snap"));
  std::string bytes = testsupport::slurp(dir.path("set.snap"));
  bytes[0] = 'X';
  {
    std::ofstream out(dir.path("bad.snap"), std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  try {
    import_snapshots(dir.path("bad.snap"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    REQUIRE(std::string(e.what()).find("magic") != std::string::npos);
  }
}

TEST_CASE("snapshot file with a zero weight is rejected with its index", "[io]") {
  TempDir dir("io_weight");
  SnapshotSet set = small_heat_set();
  export_snapshots(set, dir.path("set.snap"));
  std::string bytes = testsupport::slurp(dir.path("set.snap"));
  // Layout: 8-byte magic, three u64 dims, then weights as float64.
  const double zero = 0.0;
  std::memcpy(bytes.data() + 8 + 3 * 8, &zero, sizeof zero);
  {
    std::ofstream out(dir.path("bad.snap"), std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  try {
    import_snapshots(dir.path("bad.snap"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    REQUIRE(msg.find("weight") != std::string::npos);
    REQUIRE(msg.find('0') != std::string::npos);
  }
}

TEST_CASE("csv export guards the entry budget", "[io]") {
  TempDir dir("io_csv");
  Eigen::MatrixXd small = Eigen::MatrixXd::Identity(3, 3);
  export_matrix_csv(small, dir.path("small.csv"));
  REQUIRE(std::filesystem::exists(dir.path("small.csv")));

  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(1001, 1001);
  REQUIRE_THROWS_AS(export_matrix_csv(big, dir.path("big.csv")), ConfigError);
}

TEST_CASE("dissimilarity matrix file reloads bit-exactly", "[io]") {
  TempDir dir("io_dissim");
  std::mt19937_64 rng = make_rng(17);
  SnapshotSet set = testsupport::random_set(rng, 12, 6);
  DissimilarityMatrix dm = dissimilarity_matrix(set, {Measure::sine, 1});
  save_dissimilarity_matrix(dm, dir.path("d.csv"), {{"tag", "unit"}});

  nlohmann::json header;
  DissimilarityMatrix back = load_dissimilarity_matrix(dir.path("d.csv"), &header);
  REQUIRE(back.d == dm.d);
  REQUIRE(back.measure.kind == Measure::sine);
  REQUIRE(back.measure.n == 1);
  REQUIRE(header.at("tag") == "unit");
  REQUIRE(header.at("m") == 6);
}

TEST_CASE("asymmetric dissimilarity file is rejected", "[io]") {
  TempDir dir("io_asym");
  std::ofstream out(dir.path("bad.csv"), std::ios::binary);
  out << "# {\"kind\":\"dissimilarity_matrix\",\"measure\":\"sine\",\"n\":1,\"m\":2}\n";
  out << "0,0.5\n0.25,0\n";
  out.close();
  REQUIRE_THROWS_AS(load_dissimilarity_matrix(dir.path("bad.csv")), ConfigError);
}
