#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "robdict/advection2d.hpp"
#include "robdict/dissimilarity.hpp"
#include "robdict/pod.hpp"
#include "support.hpp"

using namespace robdict;
using testsupport::random_matrix;
using testsupport::random_weights;

namespace {

// W-orthogonal projection of the columns of x onto the span of basis.modes.
Eigen::MatrixXd project(const Eigen::MatrixXd& x, const ReducedBasis& basis) {
  return basis.modes * (basis.modes.transpose() * (basis.weights.asDiagonal() * x));
}

}  // namespace

TEST_CASE("weighted dot product", "[geometry]") {
  Eigen::VectorXd e1 = Eigen::VectorXd::Unit(3, 0);
  Eigen::VectorXd w = Eigen::VectorXd::Ones(3);
  REQUIRE(weighted_dot(e1, e1, w) == 1.0);

  Eigen::VectorXd u(2), v(2), w2(2);
  u << 1, 0;
  v << 0, 1;
  REQUIRE(weighted_dot(u, v, Eigen::VectorXd::Ones(2)) == 0.0);

  u << 1, 2;
  v << 3, 4;
  w2 << 2, 1;
  REQUIRE(weighted_dot(u, v, w2) == 14.0);

  REQUIRE_THROWS_AS(weighted_dot(u, e1, w), ConfigError);
}

TEST_CASE("pod: single snapshot normalizes", "[geometry]") {
  std::mt19937_64 rng = make_rng(1);
  Eigen::VectorXd w = random_weights(rng, 8);
  Eigen::MatrixXd u = random_matrix(rng, 8, 1);
  ReducedBasis basis = pod_basis(u, w, Truncation::fixed(1));
  REQUIRE(basis.modes.cols() == 1);
  Eigen::VectorXd expected = u.col(0) / weighted_norm(u.col(0), w);
  Eigen::Index imax;
  expected.cwiseAbs().maxCoeff(&imax);
  if (expected[imax] < 0.0) expected = -expected;
  REQUIRE((basis.modes.col(0) - expected).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("pod: duplicated column has rank one", "[geometry]") {
  std::mt19937_64 rng = make_rng(2);
  Eigen::MatrixXd u = random_matrix(rng, 6, 1);
  Eigen::MatrixXd two(6, 2);
  two << u, u;
  Eigen::VectorXd w = Eigen::VectorXd::Ones(6);
  ReducedBasis basis = pod_basis(two, w, Truncation::tolerance(1e-13));
  REQUIRE(basis.modes.cols() == 1);
  REQUIRE_THROWS_AS(pod_basis(two, w, Truncation::fixed(2)), NumericalError);
  try {
    pod_basis(two, w, Truncation::fixed(2));
  } catch (const NumericalError& e) {
    REQUIRE(std::string(e.what()).find('1') != std::string::npos);
  }
}

TEST_CASE("pod: identity snapshots retain 2/3 of the energy at N = 2", "[geometry]") {
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(3, 3);
  Eigen::VectorXd w = Eigen::VectorXd::Ones(3);
  ReducedBasis basis = pod_basis(eye, w, Truncation::fixed(2));
  Eigen::VectorXd full = pod_spectrum(eye, w);
  const double kept = basis.singular_values.squaredNorm() / full.squaredNorm();
  REQUIRE(kept == Catch::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("pod: weighted orthonormality and decreasing spectrum", "[geometry]") {
  std::mt19937_64 rng = make_rng(3);
  Eigen::MatrixXd x = random_matrix(rng, 20, 6);
  Eigen::VectorXd w = random_weights(rng, 20);
  ReducedBasis basis = pod_basis(x, w, Truncation::fixed(4));
  Eigen::MatrixXd gram = basis.modes.transpose() * w.asDiagonal() * basis.modes;
  REQUIRE((gram - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-10);
  for (Eigen::Index k = 1; k < basis.singular_values.size(); ++k) {
    REQUIRE(basis.singular_values[k] <= basis.singular_values[k - 1]);
    REQUIRE(basis.singular_values[k] >= 0.0);
  }
}

TEST_CASE("pod: sign convention is stable under column sign flips", "[geometry]") {
  std::mt19937_64 rng = make_rng(4);
  Eigen::MatrixXd x = random_matrix(rng, 12, 5);
  Eigen::VectorXd w = random_weights(rng, 12);
  Eigen::MatrixXd flipped = x;
  for (Eigen::Index j = 0; j < flipped.cols(); j += 2) flipped.col(j) *= -1.0;
  ReducedBasis a = pod_basis(x, w, Truncation::fixed(3));
  ReducedBasis b = pod_basis(flipped, w, Truncation::fixed(3));
  // Same column space and singular values; canonical signs align the modes.
  REQUIRE((a.modes - b.modes).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("pod: tolerance selects the smallest adequate rank", "[geometry]") {
  Eigen::MatrixXd x = Eigen::Vector3d(3.0, 2.0, 1.0).asDiagonal();
  Eigen::VectorXd w = Eigen::VectorXd::Ones(3);
  // Energies: tail after 1 mode = sqrt(5/14), after 2 = sqrt(1/14).
  REQUIRE(pod_basis(x, w, Truncation::tolerance(0.65)).modes.cols() == 1);
  REQUIRE(pod_basis(x, w, Truncation::tolerance(0.30)).modes.cols() == 2);
  REQUIRE(pod_basis(x, w, Truncation::tolerance(0.26)).modes.cols() == 3);
  REQUIRE(pod_basis(x, w, Truncation::tolerance(1e-12)).modes.cols() == 3);
  REQUIRE_THROWS_AS(pod_basis(x, w, Truncation::tolerance(0.0)), ConfigError);
}

TEST_CASE("pod: all-zero input is rejected", "[geometry]") {
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(4, 2);
  REQUIRE_THROWS_AS(pod_basis(zero, Eigen::VectorXd::Ones(4), Truncation::fixed(1)), NumericalError);
}

TEST_CASE("principal angles: identical, orthogonal, and oblique planes", "[geometry]") {
  Eigen::VectorXd w = Eigen::VectorXd::Ones(4);
  auto basis_from = [&](const Eigen::MatrixXd& cols) { return pod_basis(cols, w, Truncation::fixed(cols.cols())); };

  std::mt19937_64 rng = make_rng(5);
  Eigen::MatrixXd x = random_matrix(rng, 4, 2);
  ReducedBasis b = basis_from(x);
  Eigen::VectorXd self = principal_angles(b, b);
  REQUIRE(self.cwiseAbs().maxCoeff() <= 1e-7);

  Eigen::MatrixXd p12(4, 2), p13(4, 2);
  p12 << Eigen::VectorXd::Unit(4, 0), Eigen::VectorXd::Unit(4, 1);
  p13 << Eigen::VectorXd::Unit(4, 0), Eigen::VectorXd::Unit(4, 2);
  Eigen::VectorXd angles = principal_angles(basis_from(p12), basis_from(p13));
  REQUIRE(angles.size() == 2);
  REQUIRE(angles[0] <= 1e-9);
  REQUIRE(angles[1] == Catch::Approx(M_PI / 2).epsilon(1e-12));

  Eigen::MatrixXd l1(4, 1), l2(4, 1);
  l1 << 1, 0, 0, 0;
  l2 << 1, 1, 0, 0;
  Eigen::VectorXd oblique = principal_angles(basis_from(l1), basis_from(l2));
  REQUIRE(oblique[0] == Catch::Approx(M_PI / 4).epsilon(1e-12));

  ReducedBasis other = b;
  other.weights[0] += 1.0;
  REQUIRE_THROWS_AS(principal_angles(b, other), ConfigError);
}

TEST_CASE("sine dissimilarity: hand values", "[geometry]") {
  Eigen::VectorXd w = Eigen::VectorXd::Ones(3);
  Eigen::MatrixXd e1 = Eigen::VectorXd::Unit(3, 0);
  Eigen::MatrixXd e2 = Eigen::VectorXd::Unit(3, 1);
  Eigen::MatrixXd diag = (Eigen::VectorXd::Unit(3, 0) + Eigen::VectorXd::Unit(3, 1)) / std::sqrt(2.0);

  REQUIRE(sine_dissimilarity(e1, e1, w) <= 1e-10);
  REQUIRE(sine_dissimilarity(e1, Eigen::MatrixXd(1000.0 * e1), w) <= 1e-10);
  REQUIRE(sine_dissimilarity(e1, e2, w) == Catch::Approx(1.0).epsilon(1e-12));
  REQUIRE(sine_dissimilarity(e1, diag, w) == Catch::Approx(std::sqrt(0.5)).margin(1e-9));

  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(3, 1);
  REQUIRE_THROWS_AS(sine_dissimilarity(e1, zero, w), NumericalError);
}

TEST_CASE("grassmann dissimilarity: values and small-angle agreement", "[geometry]") {
  Eigen::VectorXd w = Eigen::VectorXd::Ones(3);
  Eigen::MatrixXd e1 = Eigen::VectorXd::Unit(3, 0);
  Eigen::MatrixXd e2 = Eigen::VectorXd::Unit(3, 1);
  REQUIRE(grassmann_dissimilarity(e1, e1, w) <= 1e-9);
  REQUIRE(grassmann_dissimilarity(e1, e2, w) == Catch::Approx(M_PI / 2).epsilon(1e-9));

  Eigen::MatrixXd v = e1 + 1e-4 * e2;
  const double sine = sine_dissimilarity(e1, v, w);
  const double grassmann = grassmann_dissimilarity(e1, v, w);
  REQUIRE(sine > 0.0);
  REQUIRE(std::abs(grassmann - sine) / sine <= 1e-6);
}

TEST_CASE("euclidean solution dissimilarity", "[geometry]") {
  Eigen::VectorXd w = Eigen::VectorXd::Ones(3);
  Eigen::MatrixXd e1 = Eigen::VectorXd::Unit(3, 0);
  REQUIRE(euclid_solution_dissimilarity(e1, e1, w) == 0.0);
  REQUIRE(euclid_solution_dissimilarity(Eigen::MatrixXd::Zero(3, 1), e1, w) == Catch::Approx(1.0));
  REQUIRE(euclid_solution_dissimilarity(e1, Eigen::MatrixXd(3.0 * e1), w) == Catch::Approx(2.0));
  // The collinear-but-distant case the sine measure scores as zero.
  REQUIRE(sine_dissimilarity(e1, Eigen::MatrixXd(3.0 * e1), w) <= 1e-10);

  Eigen::MatrixXd two(3, 2);
  two << e1, e1;
  REQUIRE_THROWS_AS(euclid_solution_dissimilarity(e1, two, w), ConfigError);
}

TEST_CASE("parameter standardization and euclidean parameter distance", "[geometry]") {
  REQUIRE(euclid_parameter_dissimilarity(Eigen::Vector2d(1, 2), Eigen::Vector2d(1, 2)) == 0.0);

  std::vector<ParamRecord> records = {{{"a", {0.0}}}, {{"a", {2.0}}}};
  ParameterStandardizer st = ParameterStandardizer::fit(records);
  Eigen::VectorXd x0 = st.standardized(records[0]);
  Eigen::VectorXd x1 = st.standardized(records[1]);
  REQUIRE(x0[0] == Catch::Approx(-1.0));
  REQUIRE(x1[0] == Catch::Approx(1.0));
  REQUIRE(euclid_parameter_dissimilarity(x0, x1) == Catch::Approx(2.0));

  SECTION("zero-variance coordinate is excluded with a warning") {
    std::vector<ParamRecord> recs = {{{"a", {0.0}}, {"b", {5.0}}},
                                     {{"a", {2.0}}, {"b", {5.0}}},
                                     {{"a", {4.0}}, {"b", {5.0}}}};
    ParameterStandardizer s2 = ParameterStandardizer::fit(recs);
    REQUIRE_FALSE(s2.warnings.empty());
    REQUIRE(s2.kept.size() == 1);
    REQUIRE(s2.standardized(recs[0]).size() == 1);
  }

  SECTION("five-sample distances match a brute-force recomputation") {
    std::mt19937_64 rng = make_rng(6);
    std::vector<ParamRecord> recs;
    Eigen::MatrixXd raw = random_matrix(rng, 4, 5);
    for (int i = 0; i < 5; ++i) {
      recs.push_back({{"s", {raw(0, i), raw(1, i), raw(2, i)}}, {"z", {raw(3, i)}}});
    }
    ParameterStandardizer st5 = ParameterStandardizer::fit(recs);

    Eigen::VectorXd mean = raw.rowwise().mean();
    Eigen::MatrixXd centered = raw.colwise() - mean;
    Eigen::VectorXd sd = (centered.array().square().rowwise().mean()).sqrt();
    Eigen::MatrixXd z = centered.array().colwise() / sd.array();
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        const double expected = (z.col(i) - z.col(j)).norm();
        const double got =
            euclid_parameter_dissimilarity(st5.standardized(recs[i]), st5.standardized(recs[j]));
        REQUIRE(got == Catch::Approx(expected).margin(1e-12));
      }
    }
  }

  SECTION("all-constant records are rejected") {
    std::vector<ParamRecord> recs = {{{"a", {1.0}}}, {{"a", {1.0}}}};
    REQUIRE_THROWS_AS(ParameterStandardizer::fit(recs), ConfigError);
  }
}

TEST_CASE("dissimilarity matrix: identical trajectories give the zero matrix", "[geometry]") {
  std::mt19937_64 rng = make_rng(7);
  SnapshotSet set;
  Eigen::VectorXd u = random_matrix(rng, 9, 1);
  set.values.resize(9, 3);
  set.values << u, u, u;
  set.weights = Eigen::VectorXd::Ones(9);
  set.trajectories = {{0, 1}, {1, 2}, {2, 3}};
  for (Measure m : {Measure::sine, Measure::euclid_solution, Measure::grassmann}) {
    DissimilarityMatrix dm = dissimilarity_matrix(set, {m, 1});
    REQUIRE(dm.d.cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("dissimilarity matrix: agrees with pairwise recomputation", "[geometry]") {
  std::mt19937_64 rng = make_rng(8);
  SnapshotSet set;
  const Eigen::Index dim = 14;
  const std::size_t m = 10;
  set.values = random_matrix(rng, dim, 3 * static_cast<Eigen::Index>(m));
  set.weights = random_weights(rng, dim);
  for (std::size_t t = 0; t < m; ++t) set.trajectories.push_back({3 * t, 3 * t + 3});

  DissimilarityMatrix dm = dissimilarity_matrix(set, {Measure::sine, 2});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double expected =
          i == j ? 0.0 : sine_dissimilarity(set.trajectory(i), set.trajectory(j), set.weights, 2);
      REQUIRE(dm.d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) ==
              Catch::Approx(expected).margin(1e-12));
    }
  }
  // Mirrored exactly, zero diagonal, chordal bound.
  REQUIRE(dm.d == dm.d.transpose().eval());
  REQUIRE(dm.d.diagonal().cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(dm.d.maxCoeff() <= std::sqrt(2.0) + 1e-12);
}

TEST_CASE("dissimilarity matrix: advection amplitude pairs vanish", "[geometry]") {
  Advection2dDatasetConfig cfg;
  cfg.grid_n = 13;
  cfg.n_timesteps = 3;
  SnapshotSet per_column = flatten_trajectories(generate_advection2d_dataset(cfg));
  DissimilarityMatrix dm = dissimilarity_matrix(per_column, {Measure::sine, 1});
  for (Eigen::Index c = 0; c < 3; ++c)
    for (Eigen::Index j = 0; j < 3; ++j)
      REQUIRE(dm.d(3 * c + j, 9 + 3 * c + j) <= 1e-12);
}

TEST_CASE("relative projection error: hand values", "[geometry]") {
  Eigen::VectorXd w = Eigen::VectorXd::Ones(3);
  Eigen::MatrixXd e1 = Eigen::VectorXd::Unit(3, 0);
  ReducedBasis basis = pod_basis(e1, w, Truncation::fixed(1));

  REQUIRE(relative_projection_error(e1.col(0), basis) <= 1e-10);
  REQUIRE(relative_projection_error(Eigen::VectorXd::Unit(3, 1), basis) >= 1.0 - 1e-10);
  Eigen::VectorXd mix = Eigen::VectorXd::Unit(3, 0) + Eigen::VectorXd::Unit(3, 1);
  REQUIRE(relative_projection_error(mix, basis) == Catch::Approx(std::sqrt(0.5)).epsilon(1e-12));
  REQUIRE_THROWS_AS(relative_projection_error(Eigen::VectorXd::Zero(3), basis), NumericalError);
}

TEST_CASE("sine dissimilarity is a pseudometric", "[geometry]") {
  std::mt19937_64 rng = make_rng(9);
  const Eigen::Index dim = 20;
  Eigen::VectorXd w = random_weights(rng, dim);
  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::Index n = 1 + rep % 2;
    Eigen::MatrixXd u = random_matrix(rng, dim, 4);
    Eigen::MatrixXd v = random_matrix(rng, dim, 4);
    Eigen::MatrixXd z = random_matrix(rng, dim, 4);
    const double duv = sine_dissimilarity(u, v, w, n);
    const double dvu = sine_dissimilarity(v, u, w, n);
    const double duz = sine_dissimilarity(u, z, w, n);
    const double dzv = sine_dissimilarity(z, v, w, n);
    REQUIRE(duv == dvu);
    REQUIRE(sine_dissimilarity(u, u, w, n) <= 1e-10);
    REQUIRE(duv <= duz + dzv + 1e-9);
  }
}

TEST_CASE("sine dissimilarity equals the projection-error aggregate", "[geometry]") {
  std::mt19937_64 rng = make_rng(10);
  const Eigen::Index dim = 15;
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::Index n = 1 + rep % 3;
    Eigen::VectorXd w = random_weights(rng, dim);
    Eigen::MatrixXd u = random_matrix(rng, dim, 6);
    Eigen::MatrixXd v = random_matrix(rng, dim, 6);
    ReducedBasis bu = pod_basis(u, w, Truncation::fixed(n));
    ReducedBasis bv = pod_basis(v, w, Truncation::fixed(n));
    Eigen::MatrixXd residual = bu.modes - project(bu.modes, bv);
    double sum = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double r = weighted_norm(residual.col(k), w);
      sum += r * r;
    }
    REQUIRE(sine_dissimilarity(u, v, w, n) == Catch::Approx(std::sqrt(sum)).margin(1e-8));
  }
}

TEST_CASE("sine dissimilarity equals the Hilbert-Schmidt distance", "[geometry]") {
  std::mt19937_64 rng = make_rng(11);
  const Eigen::Index dim = 30;
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::Index n = 1 + rep % 3;
    Eigen::VectorXd w = rep % 2 == 0 ? Eigen::VectorXd::Ones(dim).eval() : random_weights(rng, dim);
    Eigen::MatrixXd u = random_matrix(rng, dim, 5);
    Eigen::MatrixXd v = random_matrix(rng, dim, 5);
    ReducedBasis bu = pod_basis(u, w, Truncation::fixed(n));
    ReducedBasis bv = pod_basis(v, w, Truncation::fixed(n));
    Eigen::VectorXd root_w = w.array().sqrt();
    Eigen::MatrixXd zu = root_w.asDiagonal() * bu.modes;
    Eigen::MatrixXd zv = root_w.asDiagonal() * bv.modes;
    const double hs = (zu * zu.transpose() - zv * zv.transpose()).norm() / std::sqrt(2.0);
    REQUIRE(sine_dissimilarity(u, v, w, n) == Catch::Approx(hs).margin(1e-8));
  }
}

TEST_CASE("single-column sine dissimilarity equals the projection error", "[geometry]") {
  std::mt19937_64 rng = make_rng(12);
  const Eigen::Index dim = 25;
  for (int rep = 0; rep < 50; ++rep) {
    Eigen::VectorXd w = random_weights(rng, dim);
    Eigen::MatrixXd u = random_matrix(rng, dim, 1);
    Eigen::MatrixXd v = random_matrix(rng, dim, 1);
    ReducedBasis bv = pod_basis(v, w, Truncation::fixed(1));
    const double eta = relative_projection_error(u.col(0), bv);
    REQUIRE(std::abs(sine_dissimilarity(u, v, w) - eta) <= 1e-10);
  }
}

TEST_CASE("sine dissimilarity is scale invariant", "[geometry]") {
  std::mt19937_64 rng = make_rng(13);
  const Eigen::Index dim = 18;
  Eigen::VectorXd w = random_weights(rng, dim);
  for (int rep = 0; rep < 25; ++rep) {
    const Eigen::Index n = 1 + rep % 2;
    Eigen::MatrixXd u = random_matrix(rng, dim, 3);
    Eigen::MatrixXd v = random_matrix(rng, dim, 3);
    const double base = sine_dissimilarity(u, v, w, n);
    const double scaled = sine_dissimilarity(Eigen::MatrixXd(-2.5 * u), Eigen::MatrixXd(1e3 * v), w, n);
    REQUIRE(std::abs(base - scaled) <= 1e-10);
  }
}

TEST_CASE("projection error is non-increasing in the basis size", "[geometry]") {
  std::mt19937_64 rng = make_rng(14);
  const Eigen::Index dim = 20;
  Eigen::VectorXd w = random_weights(rng, dim);
  Eigen::MatrixXd snapshots = random_matrix(rng, dim, 8);
  Eigen::VectorXd u = random_matrix(rng, dim, 1);
  double previous = 2.0;
  for (Eigen::Index n = 1; n <= 5; ++n) {
    ReducedBasis basis = pod_basis(snapshots, w, Truncation::fixed(n));
    const double eta = relative_projection_error(u, basis);
    REQUIRE(eta <= previous + 1e-12);
    previous = eta;
  }
}

TEST_CASE("normalized width inequality on random samples", "[geometry]") {
  std::mt19937_64 rng = make_rng(15);
  const Eigen::Index dim = 16;
  Eigen::VectorXd w = random_weights(rng, dim);
  Eigen::MatrixXd snapshots = random_matrix(rng, dim, 6);
  ReducedBasis basis = pod_basis(snapshots, w, Truncation::fixed(3));
  Eigen::MatrixXd sample = random_matrix(rng, dim, 40);
  double worst_residual = 0.0, worst_norm = 0.0, worst_eta = 0.0;
  for (Eigen::Index c = 0; c < sample.cols(); ++c) {
    Eigen::VectorXd r = sample.col(c) - project(sample.col(c), basis);
    worst_residual = std::max(worst_residual, weighted_norm(r, w));
    worst_norm = std::max(worst_norm, weighted_norm(sample.col(c), w));
    worst_eta = std::max(worst_eta, relative_projection_error(sample.col(c), basis));
  }
  REQUIRE(worst_residual <= worst_norm * worst_eta + 1e-9);
}
