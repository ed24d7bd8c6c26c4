#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <string>

#include "robdict/common.hpp"

namespace robdict {

inline double weighted_dot(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const Eigen::VectorXd& w) {
  if (u.size() != v.size() || u.size() != w.size())
    throw ConfigError("weighted_dot: length mismatch (" + std::to_string(u.size()) + ", " +
                      std::to_string(v.size()) + ", " + std::to_string(w.size()) + ")");
  return (u.array() * w.array() * v.array()).sum();
}

inline double weighted_norm(const Eigen::VectorXd& u, const Eigen::VectorXd& w) {
  return std::sqrt(std::max(0.0, weighted_dot(u, u, w)));
}

/// Truncation rule for pod_basis: either keep exactly n modes, or keep the
/// smallest count whose relative tail energy sqrt(sum_{k>N} s_k^2 / sum s_k^2)
/// does not exceed tol.
struct Truncation {
  enum class Kind { fixed, tolerance };
  Kind kind = Kind::fixed;
  Eigen::Index n = 1;
  double tol = 0.0;

  static Truncation fixed(Eigen::Index n) {
    if (n < 1) throw ConfigError("pod truncation: mode count must be >= 1");
    Truncation t;
    t.kind = Kind::fixed;
    t.n = n;
    return t;
  }
  static Truncation tolerance(double tol) {
    if (!(tol > 0.0)) throw ConfigError("pod truncation: tolerance must be positive");
    Truncation t;
    t.kind = Kind::tolerance;
    t.tol = tol;
    return t;
  }
};

/// Orthonormal reduced basis in the weighted inner product:
/// modes^T diag(weights) modes = I. singular_values holds the retained
/// singular values of diag(weights)^(1/2) * snapshots, decreasing.
struct ReducedBasis {
  Eigen::MatrixXd modes;            // n_dof x n
  Eigen::VectorXd singular_values;  // n, decreasing
  Eigen::VectorXd weights;          // n_dof

  Eigen::Index n_modes() const { return modes.cols(); }
  Eigen::Index n_dof() const { return modes.rows(); }
};

namespace detail {

// Ratio of singular values below which trailing directions are treated as
// numerical noise rather than usable modes.
inline constexpr double kRankCutoff = 1e-12;

inline Eigen::Index numerical_rank(const Eigen::VectorXd& sv) {
  if (sv.size() == 0 || !(sv[0] > 0.0)) return 0;
  Eigen::Index r = 0;
  while (r < sv.size() && sv[r] >= sv[0] * kRankCutoff) ++r;
  return r;
}

// Flips each column so its entry of largest magnitude (first such index on
// ties) is positive. Makes mode signs independent of the SVD backend.
inline void canonicalize_mode_signs(Eigen::MatrixXd& modes) {
  for (Eigen::Index j = 0; j < modes.cols(); ++j) {
    Eigen::Index at = 0;
    modes.col(j).cwiseAbs().maxCoeff(&at);
    if (modes(at, j) < 0.0) modes.col(j) = -modes.col(j);
  }
}

}  // namespace detail

/// Smallest mode count whose relative tail energy is within tol. sv must be
/// the full (untruncated) singular value sequence.
inline Eigen::Index truncation_rank_for_tolerance(const Eigen::VectorXd& sv, double tol) {
  if (!(tol > 0.0)) throw ConfigError("pod truncation: tolerance must be positive");
  const Eigen::Index rank = detail::numerical_rank(sv);
  if (rank == 0) throw NumericalError("pod: snapshots have no nonzero column");
  const double total = sv.squaredNorm();
  double tail = total;
  for (Eigen::Index n = 1; n <= rank; ++n) {
    tail -= sv[n - 1] * sv[n - 1];
    if (std::sqrt(std::max(0.0, tail) / total) <= tol) return n;
  }
  return rank;
}

/// Proper orthogonal decomposition of the given snapshot columns in the
/// weighted inner product. Modes are diag(w)^(-1/2) times the leading left
/// singular vectors of diag(w)^(1/2) * snapshots.
inline ReducedBasis pod_basis(const Eigen::MatrixXd& snapshots, const Eigen::VectorXd& weights,
                              const Truncation& truncation) {
  if (snapshots.rows() == 0 || snapshots.cols() == 0) throw ConfigError("pod: empty snapshot matrix");
  if (weights.size() != snapshots.rows()) throw ConfigError("pod: weights length does not match n_dof");
  if (!(weights.minCoeff() > 0.0)) throw ConfigError("pod: weights must be positive");

  const Eigen::ArrayXd root_w = weights.array().sqrt();
  Eigen::MatrixXd scaled = root_w.matrix().asDiagonal() * snapshots;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeThinU);
  const Eigen::VectorXd& sv = svd.singularValues();
  const Eigen::Index rank = detail::numerical_rank(sv);
  if (rank == 0) throw NumericalError("pod: snapshots have no nonzero column");

  Eigen::Index n = 0;
  if (truncation.kind == Truncation::Kind::fixed) {
    n = truncation.n;
    if (n > rank)
      throw NumericalError("pod: requested " + std::to_string(n) + " modes but the snapshots have rank " +
                           std::to_string(rank));
  } else {
    n = truncation_rank_for_tolerance(sv, truncation.tol);
  }

  ReducedBasis basis;
  basis.weights = weights;
  basis.singular_values = sv.head(n);
  basis.modes = root_w.inverse().matrix().asDiagonal() * svd.matrixU().leftCols(n);
  detail::canonicalize_mode_signs(basis.modes);
  return basis;
}

/// Full singular value sequence of diag(w)^(1/2) * snapshots, computed from
/// the snapshot Gram matrix. Intended for basis-size studies where the modes
/// themselves are not needed; much cheaper than pod_basis for tall matrices.
inline Eigen::VectorXd pod_spectrum(const Eigen::MatrixXd& snapshots, const Eigen::VectorXd& weights) {
  if (snapshots.rows() == 0 || snapshots.cols() == 0) throw ConfigError("pod: empty snapshot matrix");
  if (weights.size() != snapshots.rows()) throw ConfigError("pod: weights length does not match n_dof");
  Eigen::MatrixXd scaled = weights.array().sqrt().matrix().asDiagonal() * snapshots;
  Eigen::MatrixXd gram = scaled.transpose() * scaled;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("pod: Gram eigendecomposition failed");
  Eigen::VectorXd sv = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return sv.reverse();
}

/// Relative projection error || u - P u ||_W / || u ||_W of a single field
/// onto the basis span, clamped to [0, 1].
inline double relative_projection_error(const Eigen::VectorXd& u, const ReducedBasis& basis) {
  if (u.size() != basis.n_dof()) throw ConfigError("projection error: field length does not match basis");
  const double norm_u = weighted_norm(u, basis.weights);
  if (!(norm_u > 0.0)) throw NumericalError("projection error: field has zero norm");
  Eigen::VectorXd coeffs = basis.modes.transpose() * (basis.weights.asDiagonal() * u);
  Eigen::VectorXd residual = u - basis.modes * coeffs;
  const double eta = weighted_norm(residual, basis.weights) / norm_u;
  return std::min(1.0, std::max(0.0, eta));
}

}  // namespace robdict
