#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "robdict/common.hpp"
#include "robdict/snapshot_set.hpp"

namespace testsupport {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> law(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = law(rng);
  return m;
}

inline Eigen::VectorXd random_weights(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> law(0.5, 2.0);
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) w[i] = law(rng);
  return w;
}

// Snapshot set of m single-column trajectories with random values.
inline robdict::SnapshotSet random_set(std::mt19937_64& rng, Eigen::Index dim, std::size_t m,
                                       bool unit_weights = false) {
  robdict::SnapshotSet set;
  set.values = random_matrix(rng, dim, static_cast<Eigen::Index>(m));
  set.weights = unit_weights ? Eigen::VectorXd::Ones(dim).eval() : random_weights(rng, dim);
  for (std::size_t c = 0; c < m; ++c) set.trajectories.push_back({c, c + 1});
  return set;
}

// Symmetric nonnegative matrix with zero diagonal, usable as a dissimilarity.
inline Eigen::MatrixXd random_dissimilarity(std::mt19937_64& rng, Eigen::Index m) {
  std::uniform_real_distribution<double> law(0.1, 2.0);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j) d(i, j) = d(j, i) = law(rng);
  return d;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    base_ = std::filesystem::temp_directory_path() / ("robdict_test_" + tag);
    std::filesystem::remove_all(base_);
    std::filesystem::create_directories(base_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(base_, ec);
  }
  std::string path(const std::string& name) const { return (base_ / name).string(); }
  std::string str() const { return base_.string(); }

 private:
  std::filesystem::path base_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace testsupport
