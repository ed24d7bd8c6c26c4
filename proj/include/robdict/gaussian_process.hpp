#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <random>

#include "robdict/common.hpp"

namespace robdict {

/// Zero-mean Gaussian process with exponential covariance
/// k(x, y) = sigma^2 exp(-|x - y| / corr_len), sampled on a fixed set of
/// nodes through a Cholesky factor of the covariance matrix. A small
/// diagonal jitter is escalated until the factorization succeeds.
class GpSampler {
 public:
  GpSampler(Eigen::VectorXd nodes, double sigma, double corr_len) {
    if (nodes.size() < 1) throw ConfigError("gp: at least one node is required");
    if (!(sigma > 0.0)) throw ConfigError("gp: sigma must be positive");
    if (!(corr_len > 0.0)) throw ConfigError("gp: corr_len must be positive");
    const Eigen::Index n = nodes.size();
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) {
        const double v = sigma * sigma * std::exp(-std::abs(nodes[i] - nodes[j]) / corr_len);
        cov(i, j) = v;
        cov(j, i) = v;
      }
    double jitter = 1e-12 * sigma * sigma;
    for (int attempt = 0; attempt < 9; ++attempt) {
      Eigen::LLT<Eigen::MatrixXd> llt(cov);
      if (llt.info() == Eigen::Success) {
        factor_ = llt.matrixL();
        return;
      }
      cov.diagonal().array() += jitter;
      jitter *= 10.0;
    }
    throw NumericalError("gp: covariance factorization failed even with diagonal jitter");
  }

  Eigen::Index n_nodes() const { return factor_.rows(); }
  const Eigen::MatrixXd& cholesky_factor() const { return factor_; }

  /// One realization; consumes n_nodes() normal variates from rng in order.
  Eigen::VectorXd draw(std::mt19937_64& rng) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(factor_.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
    return factor_ * z;
  }

 private:
  Eigen::MatrixXd factor_;  // lower triangular
};

/// Single GP realization on n_nodes uniform nodes over [0, L].
inline Eigen::VectorXd sample_gp_source(Eigen::Index n_nodes, double L, double sigma, double corr_len,
                                        std::uint64_t seed) {
  if (n_nodes < 2) throw ConfigError("gp: n_nodes must be >= 2");
  if (!(L > 0.0)) throw ConfigError("gp: L must be positive");
  Eigen::VectorXd nodes = Eigen::VectorXd::LinSpaced(n_nodes, 0.0, L);
  GpSampler sampler(std::move(nodes), sigma, corr_len);
  std::mt19937_64 rng = make_rng(seed);
  return sampler.draw(rng);
}

}  // namespace robdict
