#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "robdict/common.hpp"
#include "robdict/pod.hpp"
#include "robdict/snapshot_set.hpp"

namespace robdict {

enum class Measure { sine, euclid_solution, euclid_parameter, grassmann };

inline std::string measure_name(Measure m) {
  switch (m) {
    case Measure::sine: return "sine";
    case Measure::euclid_solution: return "euclid_solution";
    case Measure::euclid_parameter: return "euclid_parameter";
    case Measure::grassmann: return "grassmann";
  }
  throw ConfigError("unknown measure");
}

inline Measure parse_measure(const std::string& name) {
  if (name == "sine") return Measure::sine;
  if (name == "euclid_solution") return Measure::euclid_solution;
  if (name == "euclid_parameter") return Measure::euclid_parameter;
  if (name == "grassmann") return Measure::grassmann;
  throw ConfigError("unknown measure '" + name + "'");
}

/// Measure plus the elementary-basis size n used by the subspace measures.
struct MeasureSpec {
  Measure kind = Measure::sine;
  Eigen::Index n = 1;
};

namespace detail {

// Near-collinearity threshold on sin^2; below it the closed form loses
// digits to cancellation and the residual form is used instead.
inline constexpr double kCollinearRefine = 1e-4;

inline bool lex_less(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) return a.cols() < b.cols();
  if (a.rows() != b.rows()) return a.rows() < b.rows();
  const double* pa = a.data();
  const double* pb = b.data();
  for (Eigen::Index k = 0; k < a.size(); ++k)
    if (pa[k] != pb[k]) return pa[k] < pb[k];
  return false;
}

inline double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

// Sine of the angle between unit vectors zu, zv with cos = c, evaluated via
// the orthogonal complement; accurate for nearly collinear pairs.
inline double residual_sine(const Eigen::VectorXd& zu, const Eigen::VectorXd& zv, double c) {
  return clamp01((zv - zu * c).norm());
}

// Weighted, normalized copy of a single column; throws on zero norm.
inline Eigen::VectorXd unit_weighted_column(const Eigen::VectorXd& u, const Eigen::ArrayXd& root_w,
                                            const char* which) {
  Eigen::VectorXd z = (u.array() * root_w).matrix();
  const double norm = z.norm();
  if (!(norm > 0.0)) throw NumericalError(std::string("dissimilarity: ") + which + " column has zero norm");
  z /= norm;
  return z;
}

}  // namespace detail

/// Principal angles between the spans of two bases sharing the same weights,
/// returned increasing in [0, pi/2]. Cosines come from the SVD of the
/// cross-Gram matrix, sines from its orthogonal complement; each angle uses
/// whichever is better conditioned.
inline Eigen::VectorXd principal_angles(const ReducedBasis& b1, const ReducedBasis& b2) {
  if (b1.n_dof() != b2.n_dof() || b1.weights != b2.weights)
    throw ConfigError("principal_angles: bases use different inner products");
  const Eigen::ArrayXd root_w = b1.weights.array().sqrt();
  Eigen::MatrixXd q1 = root_w.matrix().asDiagonal() * b1.modes;
  Eigen::MatrixXd q2 = root_w.matrix().asDiagonal() * b2.modes;
  Eigen::MatrixXd c = q1.transpose() * q2;

  Eigen::BDCSVD<Eigen::MatrixXd> cos_svd(c);
  const Eigen::Index p = std::min(q1.cols(), q2.cols());
  Eigen::VectorXd cosines = cos_svd.singularValues().head(p);  // decreasing

  Eigen::MatrixXd r;
  if (q2.cols() <= q1.cols())
    r = q2 - q1 * c;
  else
    r = q1 - q2 * c.transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> sin_svd(r);
  Eigen::VectorXd sines = sin_svd.singularValues().head(p).reverse();  // increasing

  Eigen::VectorXd angles(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    const double s = detail::clamp01(sines[k]);
    const double cth = detail::clamp01(cosines[k]);
    angles[k] = (s * s <= 0.5) ? std::asin(s) : std::acos(cth);
  }
  return angles;
}

/// Sine dissimilarity between two trajectories: the chordal distance
/// sqrt(sum_k sin^2 theta_k) between their n-mode elementary bases.
/// Symmetric, zero on collinear pairs, bounded by sqrt(n).
inline double sine_dissimilarity(const Eigen::MatrixXd& traj_u, const Eigen::MatrixXd& traj_v,
                                 const Eigen::VectorXd& weights, Eigen::Index n = 1) {
  if (n < 1) throw ConfigError("sine_dissimilarity: n must be >= 1");
  if (traj_u.rows() != weights.size() || traj_v.rows() != weights.size())
    throw ConfigError("sine_dissimilarity: trajectory rows do not match weights");
  const Eigen::ArrayXd root_w = weights.array().sqrt();

  if (n == 1 && traj_u.cols() == 1 && traj_v.cols() == 1) {
    Eigen::VectorXd zu = detail::unit_weighted_column(traj_u.col(0), root_w, "first");
    Eigen::VectorXd zv = detail::unit_weighted_column(traj_v.col(0), root_w, "second");
    const double c = zu.dot(zv);
    const double s2 = 1.0 - std::min(1.0, c * c);
    if (s2 >= detail::kCollinearRefine) return std::sqrt(s2);
    // Keep the evaluation symmetric in its arguments even on the refined path.
    if (detail::lex_less(traj_v, traj_u)) zu.swap(zv);
    return detail::residual_sine(zu, zv, zu.dot(zv));
  }

  const Eigen::MatrixXd* a = &traj_u;
  const Eigen::MatrixXd* b = &traj_v;
  if (detail::lex_less(*b, *a)) std::swap(a, b);
  ReducedBasis ba = pod_basis(*a, weights, Truncation::fixed(n));
  ReducedBasis bb = pod_basis(*b, weights, Truncation::fixed(n));
  Eigen::MatrixXd qa = root_w.matrix().asDiagonal() * ba.modes;
  Eigen::MatrixXd qb = root_w.matrix().asDiagonal() * bb.modes;
  Eigen::MatrixXd r = qb - qa * (qa.transpose() * qb);
  return std::min(r.norm(), std::sqrt(static_cast<double>(n)));
}

/// Grassmann dissimilarity: Euclidean norm of the principal-angle vector
/// between the two n-mode elementary bases.
inline double grassmann_dissimilarity(const Eigen::MatrixXd& traj_u, const Eigen::MatrixXd& traj_v,
                                      const Eigen::VectorXd& weights, Eigen::Index n = 1) {
  if (n < 1) throw ConfigError("grassmann_dissimilarity: n must be >= 1");
  const Eigen::MatrixXd* a = &traj_u;
  const Eigen::MatrixXd* b = &traj_v;
  if (detail::lex_less(*b, *a)) std::swap(a, b);
  ReducedBasis ba = pod_basis(*a, weights, Truncation::fixed(n));
  ReducedBasis bb = pod_basis(*b, weights, Truncation::fixed(n));
  return principal_angles(ba, bb).norm();
}

/// Euclidean-in-solution dissimilarity: root-sum-square over the trajectory
/// of the weighted norms of column differences. Requires equal lengths.
inline double euclid_solution_dissimilarity(const Eigen::MatrixXd& traj_u, const Eigen::MatrixXd& traj_v,
                                            const Eigen::VectorXd& weights) {
  if (traj_u.cols() != traj_v.cols())
    throw ConfigError("euclid_solution: trajectories have " + std::to_string(traj_u.cols()) + " and " +
                      std::to_string(traj_v.cols()) + " columns");
  if (traj_u.rows() != weights.size() || traj_v.rows() != weights.size())
    throw ConfigError("euclid_solution: trajectory rows do not match weights");
  double acc = 0.0;
  for (Eigen::Index c = 0; c < traj_u.cols(); ++c) {
    Eigen::VectorXd diff = traj_u.col(c) - traj_v.col(c);
    acc += weighted_dot(diff, diff, weights);
  }
  return std::sqrt(std::max(0.0, acc));
}

/// Plain Euclidean distance between (already standardized) parameter vectors.
inline double euclid_parameter_dissimilarity(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) throw ConfigError("euclid_parameter: vectors have different dimensions");
  return (x - y).norm();
}

/// Centers and scales parameter vectors to unit variance per coordinate,
/// using statistics of the set it was fitted on. Zero-variance coordinates
/// are dropped and reported in `warnings`.
struct ParameterStandardizer {
  Eigen::VectorXd mean;               // raw dimension
  Eigen::VectorXd inv_std;            // kept coordinates
  std::vector<Eigen::Index> kept;     // indices into the raw vector
  std::vector<std::string> warnings;

  static Eigen::VectorXd concat(const ParamRecord& rec) {
    std::size_t dim = 0;
    for (const ParamEntry& e : rec) dim += e.values.size();
    Eigen::VectorXd x(static_cast<Eigen::Index>(dim));
    Eigen::Index at = 0;
    for (const ParamEntry& e : rec)
      for (double v : e.values) x[at++] = v;
    return x;
  }

  static ParameterStandardizer fit(const std::vector<ParamRecord>& records) {
    if (records.empty()) throw ConfigError("euclid_parameter: parameter records are required");
    for (std::size_t i = 1; i < records.size(); ++i) {
      if (records[i].size() != records[0].size())
        throw ConfigError("euclid_parameter: parameter record " + std::to_string(i) + " has a different layout");
      for (std::size_t e = 0; e < records[i].size(); ++e)
        if (records[i][e].name != records[0][e].name || records[i][e].values.size() != records[0][e].values.size())
          throw ConfigError("euclid_parameter: parameter record " + std::to_string(i) +
                            " does not match entry '" + records[0][e].name + "'");
    }
    const auto m = static_cast<Eigen::Index>(records.size());
    Eigen::VectorXd x0 = concat(records[0]);
    const Eigen::Index dim = x0.size();
    Eigen::MatrixXd all(dim, m);
    all.col(0) = x0;
    for (Eigen::Index i = 1; i < m; ++i) all.col(i) = concat(records[static_cast<std::size_t>(i)]);

    ParameterStandardizer s;
    s.mean = all.rowwise().mean();
    Eigen::VectorXd var = (all.colwise() - s.mean).array().square().rowwise().mean();
    std::vector<double> inv;
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double sd = std::sqrt(std::max(0.0, var[j]));
      if (sd <= 1e-13 * std::max(1.0, std::abs(s.mean[j]))) {
        s.warnings.push_back("parameter coordinate " + coordinate_name(records[0], j) +
                             " has zero variance; excluded from euclid_parameter");
      } else {
        s.kept.push_back(j);
        inv.push_back(1.0 / sd);
      }
    }
    if (s.kept.empty()) throw ConfigError("euclid_parameter: every parameter coordinate has zero variance");
    s.inv_std = Eigen::Map<const Eigen::VectorXd>(inv.data(), static_cast<Eigen::Index>(inv.size()));
    return s;
  }

  Eigen::VectorXd standardized(const ParamRecord& rec) const {
    Eigen::VectorXd x = concat(rec);
    if (x.size() != mean.size()) throw ConfigError("euclid_parameter: record dimension does not match the fit");
    Eigen::VectorXd out(static_cast<Eigen::Index>(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k)
      out[static_cast<Eigen::Index>(k)] = (x[kept[k]] - mean[kept[k]]) * inv_std[static_cast<Eigen::Index>(k)];
    return out;
  }

 private:
  static std::string coordinate_name(const ParamRecord& rec, Eigen::Index flat) {
    Eigen::Index at = flat;
    for (const ParamEntry& e : rec) {
      if (at < static_cast<Eigen::Index>(e.values.size()))
        return "'" + e.name + "'[" + std::to_string(at) + "]";
      at -= static_cast<Eigen::Index>(e.values.size());
    }
    return "#" + std::to_string(flat);
  }
};

/// Symmetric pairwise dissimilarities over the trajectories of one set.
struct DissimilarityMatrix {
  Eigen::MatrixXd d;
  MeasureSpec measure;

  Eigen::Index size() const { return d.rows(); }
};

namespace detail {

// Pairwise fill of a symmetric matrix with an exact mirror and zero diagonal.
template <typename PairFn>
inline Eigen::MatrixXd symmetric_fill(Eigen::Index m, PairFn&& pair) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m, m);
  parallel_for(0, m, [&](std::ptrdiff_t i) {
    for (Eigen::Index j = i + 1; j < m; ++j) d(i, j) = pair(static_cast<Eigen::Index>(i), j);
  });
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j) d(j, i) = d(i, j);
  return d;
}

// Weighted, column-normalized copy of every column. Throws on zero norms.
inline Eigen::MatrixXd unit_weighted_columns(const Eigen::MatrixXd& values, const Eigen::VectorXd& weights,
                                             const char* context) {
  Eigen::MatrixXd z = weights.array().sqrt().matrix().asDiagonal() * values;
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    const double norm = z.col(c).norm();
    if (!(norm > 0.0))
      throw NumericalError(std::string(context) + ": column " + std::to_string(c) + " has zero norm");
    z.col(c) /= norm;
  }
  return z;
}

inline bool all_single_column(const SnapshotSet& set) {
  for (const TrajectoryRange& r : set.trajectories)
    if (r.size() != 1) return false;
  return true;
}

inline double sine_from_gram(const Eigen::MatrixXd& zn_a, const Eigen::MatrixXd& zn_b, Eigen::Index i,
                             Eigen::Index j, double c) {
  const double s2 = 1.0 - std::min(1.0, c * c);
  if (s2 >= kCollinearRefine) return std::sqrt(s2);
  return residual_sine(zn_a.col(i), zn_b.col(j), c);
}

inline double grassmann_from_gram(const Eigen::MatrixXd& zn_a, const Eigen::MatrixXd& zn_b, Eigen::Index i,
                                  Eigen::Index j, double c) {
  const double ca = std::min(1.0, std::abs(c));
  const double s2 = 1.0 - ca * ca;
  if (s2 > 0.5) return std::acos(ca);
  const double s = (s2 >= kCollinearRefine) ? std::sqrt(s2) : residual_sine(zn_a.col(i), zn_b.col(j), c);
  return std::asin(clamp01(s));
}

// Elementary bases of every trajectory, weighted-orthonormal columns.
inline std::vector<Eigen::MatrixXd> elementary_q(const SnapshotSet& set, Eigen::Index n) {
  const Eigen::ArrayXd root_w = set.weights.array().sqrt();
  std::vector<Eigen::MatrixXd> q(set.n_trajectories());
  std::vector<std::string> failure(set.n_trajectories());
  parallel_for(0, static_cast<std::ptrdiff_t>(set.n_trajectories()), [&](std::ptrdiff_t t) {
    try {
      ReducedBasis b = pod_basis(set.trajectory(static_cast<std::size_t>(t)), set.weights, Truncation::fixed(n));
      q[static_cast<std::size_t>(t)] = root_w.matrix().asDiagonal() * b.modes;
    } catch (const std::exception& e) {
      failure[static_cast<std::size_t>(t)] = e.what();
    }
  });
  for (std::size_t t = 0; t < failure.size(); ++t)
    if (!failure[t].empty())
      throw NumericalError("trajectory " + std::to_string(t) + ": " + failure[t]);
  return q;
}

inline std::vector<Eigen::VectorXd> standardized_vectors(const SnapshotSet& set,
                                                         const ParameterStandardizer& std_) {
  if (set.params.empty()) throw ConfigError("euclid_parameter: snapshot set carries no parameter records");
  std::vector<Eigen::VectorXd> x;
  x.reserve(set.params.size());
  for (const ParamRecord& rec : set.params) x.push_back(std_.standardized(rec));
  return x;
}

}  // namespace detail

/// All pairwise dissimilarities over the set's trajectories. Elementary
/// bases (or normalized columns) are computed once per trajectory and the
/// result is mirrored exactly, so the matrix is symmetric with a zero
/// diagonal by construction.
inline DissimilarityMatrix dissimilarity_matrix(const SnapshotSet& set, const MeasureSpec& spec,
                                                const ParameterStandardizer* standardizer = nullptr) {
  set.validate();
  const auto m = static_cast<Eigen::Index>(set.n_trajectories());
  DissimilarityMatrix out;
  out.measure = spec;

  switch (spec.kind) {
    case Measure::sine:
    case Measure::grassmann: {
      if (spec.n == 1 && detail::all_single_column(set)) {
        Eigen::MatrixXd zn = detail::unit_weighted_columns(set.values, set.weights, "dissimilarity_matrix");
        Eigen::MatrixXd gram = zn.transpose() * zn;
        out.d = detail::symmetric_fill(m, [&](Eigen::Index i, Eigen::Index j) {
          return spec.kind == Measure::sine ? detail::sine_from_gram(zn, zn, i, j, gram(i, j))
                                            : detail::grassmann_from_gram(zn, zn, i, j, gram(i, j));
        });
      } else {
        std::vector<Eigen::MatrixXd> q = detail::elementary_q(set, spec.n);
        out.d = detail::symmetric_fill(m, [&](Eigen::Index i, Eigen::Index j) {
          const Eigen::MatrixXd& qa = q[static_cast<std::size_t>(i)];
          const Eigen::MatrixXd& qb = q[static_cast<std::size_t>(j)];
          Eigen::MatrixXd c = qa.transpose() * qb;
          Eigen::MatrixXd r = qb - qa * c;
          if (spec.kind == Measure::sine)
            return std::min(r.norm(), std::sqrt(static_cast<double>(spec.n)));
          Eigen::BDCSVD<Eigen::MatrixXd> cos_svd(c);
          Eigen::BDCSVD<Eigen::MatrixXd> sin_svd(r);
          Eigen::VectorXd cosines = cos_svd.singularValues();
          Eigen::VectorXd sines = sin_svd.singularValues().reverse();
          double acc = 0.0;
          for (Eigen::Index k = 0; k < spec.n; ++k) {
            const double s = detail::clamp01(sines[k]);
            const double theta = (s * s <= 0.5) ? std::asin(s) : std::acos(detail::clamp01(cosines[k]));
            acc += theta * theta;
          }
          return std::sqrt(acc);
        });
      }
      break;
    }
    case Measure::euclid_solution: {
      for (std::size_t t = 1; t < set.trajectories.size(); ++t)
        if (set.trajectories[t].size() != set.trajectories[0].size())
          throw ConfigError("euclid_solution: trajectories 0 and " + std::to_string(t) + " have " +
                            std::to_string(set.trajectories[0].size()) + " and " +
                            std::to_string(set.trajectories[t].size()) + " columns");
      Eigen::MatrixXd z = set.weights.array().sqrt().matrix().asDiagonal() * set.values;
      Eigen::MatrixXd gram = z.transpose() * z;
      const auto len = static_cast<Eigen::Index>(set.trajectories[0].size());
      out.d = detail::symmetric_fill(m, [&](Eigen::Index i, Eigen::Index j) {
        const auto bi = static_cast<Eigen::Index>(set.trajectories[static_cast<std::size_t>(i)].begin);
        const auto bj = static_cast<Eigen::Index>(set.trajectories[static_cast<std::size_t>(j)].begin);
        double acc = 0.0;
        for (Eigen::Index c = 0; c < len; ++c)
          acc += std::max(0.0, gram(bi + c, bi + c) + gram(bj + c, bj + c) - 2.0 * gram(bi + c, bj + c));
        return std::sqrt(acc);
      });
      break;
    }
    case Measure::euclid_parameter: {
      ParameterStandardizer local;
      const ParameterStandardizer* std_ = standardizer;
      if (std_ == nullptr) {
        local = ParameterStandardizer::fit(set.params);
        std_ = &local;
      }
      std::vector<Eigen::VectorXd> x = detail::standardized_vectors(set, *std_);
      out.d = detail::symmetric_fill(m, [&](Eigen::Index i, Eigen::Index j) {
        return euclid_parameter_dissimilarity(x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)]);
      });
      break;
    }
  }
  return out;
}

/// Rectangular dissimilarities from every trajectory of `rows` to every
/// trajectory of `cols`, under the same measure semantics as
/// dissimilarity_matrix. euclid_parameter requires the standardizer fitted
/// on the training set.
inline Eigen::MatrixXd cross_dissimilarity(const SnapshotSet& rows, const SnapshotSet& cols,
                                           const MeasureSpec& spec,
                                           const ParameterStandardizer* standardizer = nullptr) {
  if (rows.n_dof() != cols.n_dof() || rows.weights != cols.weights)
    throw ConfigError("cross_dissimilarity: sets use different inner products");
  const auto mr = static_cast<Eigen::Index>(rows.n_trajectories());
  const auto mc = static_cast<Eigen::Index>(cols.n_trajectories());
  Eigen::MatrixXd d(mr, mc);

  switch (spec.kind) {
    case Measure::sine:
    case Measure::grassmann: {
      if (spec.n == 1 && detail::all_single_column(rows) && detail::all_single_column(cols)) {
        Eigen::MatrixXd za = detail::unit_weighted_columns(rows.values, rows.weights, "cross_dissimilarity rows");
        Eigen::MatrixXd zb = detail::unit_weighted_columns(cols.values, cols.weights, "cross_dissimilarity cols");
        Eigen::MatrixXd gram = za.transpose() * zb;
        parallel_for(0, mr, [&](std::ptrdiff_t i) {
          for (Eigen::Index j = 0; j < mc; ++j)
            d(i, j) = spec.kind == Measure::sine
                          ? detail::sine_from_gram(za, zb, static_cast<Eigen::Index>(i), j, gram(i, j))
                          : detail::grassmann_from_gram(za, zb, static_cast<Eigen::Index>(i), j, gram(i, j));
        });
      } else {
        std::vector<Eigen::MatrixXd> qa = detail::elementary_q(rows, spec.n);
        std::vector<Eigen::MatrixXd> qb = detail::elementary_q(cols, spec.n);
        parallel_for(0, mr, [&](std::ptrdiff_t i) {
          for (Eigen::Index j = 0; j < mc; ++j) {
            Eigen::MatrixXd c = qa[static_cast<std::size_t>(i)].transpose() * qb[static_cast<std::size_t>(j)];
            Eigen::MatrixXd r = qb[static_cast<std::size_t>(j)] - qa[static_cast<std::size_t>(i)] * c;
            if (spec.kind == Measure::sine) {
              d(i, j) = std::min(r.norm(), std::sqrt(static_cast<double>(spec.n)));
            } else {
              Eigen::BDCSVD<Eigen::MatrixXd> cos_svd(c);
              Eigen::BDCSVD<Eigen::MatrixXd> sin_svd(r);
              Eigen::VectorXd cosines = cos_svd.singularValues();
              Eigen::VectorXd sines = sin_svd.singularValues().reverse();
              double acc = 0.0;
              for (Eigen::Index k = 0; k < spec.n; ++k) {
                const double s = detail::clamp01(sines[k]);
                const double theta = (s * s <= 0.5) ? std::asin(s) : std::acos(detail::clamp01(cosines[k]));
                acc += theta * theta;
              }
              d(i, j) = std::sqrt(acc);
            }
          }
        });
      }
      break;
    }
    case Measure::euclid_solution: {
      parallel_for(0, mr, [&](std::ptrdiff_t i) {
        for (Eigen::Index j = 0; j < mc; ++j)
          d(i, j) = euclid_solution_dissimilarity(rows.trajectory(static_cast<std::size_t>(i)),
                                                  cols.trajectory(static_cast<std::size_t>(j)), rows.weights);
      });
      break;
    }
    case Measure::euclid_parameter: {
      if (standardizer == nullptr)
        throw ConfigError("cross_dissimilarity: euclid_parameter requires a standardizer fitted on training data");
      std::vector<Eigen::VectorXd> xa = detail::standardized_vectors(rows, *standardizer);
      std::vector<Eigen::VectorXd> xb = detail::standardized_vectors(cols, *standardizer);
      parallel_for(0, mr, [&](std::ptrdiff_t i) {
        for (Eigen::Index j = 0; j < mc; ++j)
          d(i, j) = euclid_parameter_dissimilarity(xa[static_cast<std::size_t>(i)], xb[static_cast<std::size_t>(j)]);
      });
      break;
    }
  }
  return d;
}

/// CSV with a one-line JSON comment header carrying the measure, n, m and
/// any extra provenance. Values are printed with 17 significant digits so
/// the file reloads bit-exactly.
inline void save_dissimilarity_matrix(const DissimilarityMatrix& dm, const std::string& path,
                                      const nlohmann::json& extra = nlohmann::json::object()) {
  nlohmann::json header = extra;
  header["kind"] = "dissimilarity_matrix";
  header["measure"] = measure_name(dm.measure.kind);
  header["n"] = dm.measure.n;
  header["m"] = dm.d.rows();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << "# " << header.dump() << "\n";
  char buf[32];
  for (Eigen::Index i = 0; i < dm.d.rows(); ++i) {
    for (Eigen::Index j = 0; j < dm.d.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", dm.d(i, j));
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

inline DissimilarityMatrix load_dissimilarity_matrix(const std::string& path,
                                                     nlohmann::json* header_out = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open dissimilarity matrix '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw ConfigError("'" + path + "': missing JSON comment header");
  nlohmann::json header = nlohmann::json::parse(line.substr(2), nullptr, false);
  if (header.is_discarded() || !header.contains("measure") || !header.contains("m"))
    throw ConfigError("'" + path + "': malformed header");
  DissimilarityMatrix dm;
  dm.measure.kind = parse_measure(header.at("measure").get<std::string>());
  dm.measure.n = header.value("n", 1);
  const auto m = header.at("m").get<Eigen::Index>();
  dm.d.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!std::getline(in, line)) throw ConfigError("'" + path + "': truncated at row " + std::to_string(i));
    std::stringstream row(line);
    std::string cell;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (!std::getline(row, cell, ','))
        throw ConfigError("'" + path + "': row " + std::to_string(i) + " has too few columns");
      dm.d(i, j) = std::strtod(cell.c_str(), nullptr);
    }
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (dm.d(i, i) != 0.0) throw ConfigError("'" + path + "': nonzero diagonal at " + std::to_string(i));
    for (Eigen::Index j = 0; j < m; ++j) {
      if (dm.d(i, j) < 0.0 || dm.d(i, j) != dm.d(j, i))
        throw ConfigError("'" + path + "': not a symmetric nonnegative matrix at (" + std::to_string(i) + ", " +
                          std::to_string(j) + ")");
    }
  }
  if (header_out) *header_out = header;
  return dm;
}

}  // namespace robdict
