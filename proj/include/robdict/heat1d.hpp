#pragma once

#include <Eigen/Dense>
#include <random>
#include <utility>

#include "robdict/common.hpp"
#include "robdict/gaussian_process.hpp"
#include "robdict/snapshot_set.hpp"

namespace robdict {

/// Steady 1D heat problem -(lambda u')' = s on [0, L] with u(0) = u(L) = u0.
/// Conductivity is lambda1 on the inclusion [eps*L, (eps+zeta)*L] and
/// 1000*lambda1 outside. `source` holds nodal values of s on the uniform
/// mesh the problem is solved on.
struct Heat1dParams {
  double zeta = 0.0;
  double eps = 0.0;
  Eigen::VectorXd source;
  double lambda1 = 1.0;
  double L = 1.0;
  double u0 = 0.0;
};

inline constexpr double kConductivityContrast = 1000.0;

inline double conductivity_at(const Heat1dParams& p, double xi) {
  const double lo = p.eps * p.L;
  const double hi = (p.eps + p.zeta) * p.L;
  return (xi >= lo && xi <= hi) ? p.lambda1 : kConductivityContrast * p.lambda1;
}

namespace detail {

struct Tridiagonal {
  Eigen::VectorXd diag;  // n
  Eigen::VectorXd off;   // n - 1, symmetric
};

// Interior P1 stiffness (element conductivity at element midpoints) and the
// trapezoidal load vector for the homogeneous part of the solution.
inline std::pair<Tridiagonal, Eigen::VectorXd> assemble_heat1d(const Heat1dParams& p, Eigen::Index n_nodes) {
  if (n_nodes < 3) throw ConfigError("heat1d: n_nodes must be >= 3");
  if (p.source.size() != n_nodes)
    throw ConfigError("heat1d: source has " + std::to_string(p.source.size()) + " values for " +
                      std::to_string(n_nodes) + " nodes");
  if (!(p.lambda1 > 0.0)) throw ConfigError("heat1d: lambda1 must be positive");
  if (!(p.L > 0.0)) throw ConfigError("heat1d: L must be positive");
  if (!(p.zeta >= 0.0 && p.zeta <= 1.0 && p.eps >= 0.0 && p.eps + p.zeta <= 1.0 + 1e-12))
    throw ConfigError("heat1d: inclusion [eps, eps+zeta] must lie inside [0, 1]");

  const double h = p.L / static_cast<double>(n_nodes - 1);
  Eigen::VectorXd lambda_e(n_nodes - 1);
  for (Eigen::Index e = 0; e < n_nodes - 1; ++e)
    lambda_e[e] = conductivity_at(p, (static_cast<double>(e) + 0.5) * h);

  const Eigen::Index n_int = n_nodes - 2;
  Tridiagonal k;
  k.diag.resize(n_int);
  k.off.resize(n_int - 1);
  Eigen::VectorXd f(n_int);
  for (Eigen::Index i = 0; i < n_int; ++i) {
    k.diag[i] = (lambda_e[i] + lambda_e[i + 1]) / h;
    if (i + 1 < n_int) k.off[i] = -lambda_e[i + 1] / h;
    f[i] = h * p.source[i + 1];
  }
  return {std::move(k), std::move(f)};
}

inline Eigen::VectorXd solve_tridiagonal(const Tridiagonal& t, Eigen::VectorXd rhs) {
  const Eigen::Index n = t.diag.size();
  Eigen::VectorXd c(n), x(n);
  double pivot = t.diag[0];
  if (pivot == 0.0) throw NumericalError("heat1d: singular tridiagonal system");
  c.setZero();
  if (n > 1) c[0] = t.off[0] / pivot;
  rhs[0] /= pivot;
  for (Eigen::Index i = 1; i < n; ++i) {
    pivot = t.diag[i] - t.off[i - 1] * c[i - 1];
    if (pivot == 0.0) throw NumericalError("heat1d: singular tridiagonal system");
    if (i < n - 1) c[i] = t.off[i] / pivot;
    rhs[i] = (rhs[i] - t.off[i - 1] * rhs[i - 1]) / pivot;
  }
  x[n - 1] = rhs[n - 1];
  for (Eigen::Index i = n - 2; i >= 0; --i) x[i] = rhs[i] - c[i] * x[i + 1];
  return x;
}

}  // namespace detail

/// P1 finite element solution on n_nodes uniform nodes. The constant
/// Dirichlet value u0 lifts out of the operator, so the interior system is
/// solved for u - u0 and the boundary rows are exact.
inline Eigen::VectorXd solve_heat1d(const Heat1dParams& p, Eigen::Index n_nodes) {
  auto [k, f] = detail::assemble_heat1d(p, n_nodes);
  Eigen::VectorXd interior = detail::solve_tridiagonal(k, std::move(f));
  Eigen::VectorXd u(n_nodes);
  u[0] = p.u0;
  u[n_nodes - 1] = p.u0;
  u.segment(1, n_nodes - 2) = interior.array() + p.u0;
  return u;
}

/// Trapezoidal (lumped mass) quadrature weights on the uniform mesh.
inline Eigen::VectorXd trapezoidal_weights(Eigen::Index n_nodes, double L) {
  const double h = L / static_cast<double>(n_nodes - 1);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n_nodes, h);
  w[0] = 0.5 * h;
  w[n_nodes - 1] = 0.5 * h;
  return w;
}

struct Heat1dDatasetConfig {
  Eigen::Index n_samples = 1000;
  Eigen::Index n_nodes = 2000;
  double L = 1.0;
  double lambda1 = 1.0;
  double u0 = 0.0;
  double gp_sigma = 1.0;
  double gp_corr_len = 0.1;  // absolute length; defaults pair with L = 1
  std::uint64_t seed = 0;
};

/// Random family of heat solutions: per sample, zeta ~ U(0.1, 0.5),
/// eps ~ U(0, 1 - zeta), and a GP source realization; one single-column
/// trajectory per sample, with (source, zeta, eps) as its parameter record.
inline SnapshotSet generate_heat1d_dataset(const Heat1dDatasetConfig& cfg) {
  if (cfg.n_samples < 1) throw ConfigError("heat1d dataset: n_samples must be >= 1");
  if (cfg.n_nodes < 3) throw ConfigError("heat1d dataset: n_nodes must be >= 3");
  Eigen::VectorXd nodes = Eigen::VectorXd::LinSpaced(cfg.n_nodes, 0.0, cfg.L);
  GpSampler gp(nodes, cfg.gp_sigma, cfg.gp_corr_len);
  std::mt19937_64 rng = make_rng(cfg.seed);
  std::uniform_real_distribution<double> zeta_law(0.1, 0.5);
  std::normal_distribution<double> normal(0.0, 1.0);

  SnapshotSet set;
  set.values.resize(cfg.n_nodes, cfg.n_samples);
  set.weights = trapezoidal_weights(cfg.n_nodes, cfg.L);
  set.mesh_coords = nodes;
  set.trajectories.reserve(static_cast<std::size_t>(cfg.n_samples));
  set.params.reserve(static_cast<std::size_t>(cfg.n_samples));

  Eigen::MatrixXd z(cfg.n_nodes, cfg.n_samples);
  std::vector<std::pair<double, double>> geometry(static_cast<std::size_t>(cfg.n_samples));
  for (Eigen::Index s = 0; s < cfg.n_samples; ++s) {
    const double zeta = zeta_law(rng);
    std::uniform_real_distribution<double> eps_law(0.0, 1.0 - zeta);
    const double eps = eps_law(rng);
    geometry[static_cast<std::size_t>(s)] = {zeta, eps};
    for (Eigen::Index i = 0; i < cfg.n_nodes; ++i) z(i, s) = normal(rng);
  }
  Eigen::MatrixXd sources = gp.cholesky_factor() * z;

  for (Eigen::Index s = 0; s < cfg.n_samples; ++s) {
    const auto [zeta, eps] = geometry[static_cast<std::size_t>(s)];
    Heat1dParams p;
    p.zeta = zeta;
    p.eps = eps;
    p.source = sources.col(s);
    p.lambda1 = cfg.lambda1;
    p.L = cfg.L;
    p.u0 = cfg.u0;
    set.values.col(s) = solve_heat1d(p, cfg.n_nodes);
    set.trajectories.push_back({static_cast<std::size_t>(s), static_cast<std::size_t>(s) + 1});
    ParamRecord rec;
    rec.push_back({"source", std::vector<double>(p.source.data(), p.source.data() + p.source.size())});
    rec.push_back({"zeta", {zeta}});
    rec.push_back({"eps", {eps}});
    set.params.push_back(std::move(rec));
  }
  set.validate();
  return set;
}

inline SnapshotSet generate_heat1d_dataset(Eigen::Index n_samples, Eigen::Index n_nodes, std::uint64_t seed) {
  Heat1dDatasetConfig cfg;
  cfg.n_samples = n_samples;
  cfg.n_nodes = n_nodes;
  cfg.seed = seed;
  return generate_heat1d_dataset(cfg);
}

}  // namespace robdict
