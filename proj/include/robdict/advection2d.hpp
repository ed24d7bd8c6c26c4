#pragma once

#include <Eigen/Dense>
#include <vector>

#include "robdict/common.hpp"
#include "robdict/snapshot_set.hpp"

namespace robdict {

/// Analytic advected Gaussian on the unit square:
/// u(x1, x2, t) = U0 exp(-((x1 - c t)^2 + (x2 - x2_0)^2) / l^2).
struct Advection2dParams {
  double U0 = 1.0;
  double xi2_0 = 0.5;
  double l = 0.1;
  double c = 1.0;
  double t = 0.0;
};

inline double advection_value(const Advection2dParams& p, double x1, double x2) {
  const double dx1 = x1 - p.c * p.t;
  const double dx2 = x2 - p.xi2_0;
  return p.U0 * std::exp(-(dx1 * dx1 + dx2 * dx2) / (p.l * p.l));
}

/// Nodal field on a grid_n x grid_n uniform grid over [0, 1]^2. Node k sits
/// at (x1, x2) = ((k mod grid_n) h, (k div grid_n) h) with h = 1/(grid_n-1).
inline Eigen::VectorXd advection_field(const Advection2dParams& p, Eigen::Index grid_n) {
  if (grid_n < 2) throw ConfigError("advection2d: grid_n must be >= 2");
  if (!(p.l > 0.0)) throw ConfigError("advection2d: l must be positive");
  if (!(p.t >= 0.0)) throw ConfigError("advection2d: t must be nonnegative");
  const double h = 1.0 / static_cast<double>(grid_n - 1);
  Eigen::VectorXd u(grid_n * grid_n);
  for (Eigen::Index iy = 0; iy < grid_n; ++iy)
    for (Eigen::Index ix = 0; ix < grid_n; ++ix)
      u[iy * grid_n + ix] = advection_value(p, static_cast<double>(ix) * h, static_cast<double>(iy) * h);
  return u;
}

struct Advection2dDatasetConfig {
  std::vector<double> amplitudes = {0.1, 1.0};
  std::vector<double> centers = {0.0, 0.5, 1.0};
  Eigen::Index n_timesteps = 100;
  double t_end = 1.0;
  Eigen::Index grid_n = 101;
  double l = 0.1;
  double c = 1.0;
};

/// One trajectory per (U0, xi2_0) pair, sampled at t_j = j t_end / n_timesteps
/// for j = 1..n_timesteps. Weights are the uniform cell area h^2. Each
/// trajectory's record stores U0, xi2_0 and the sampling times.
inline SnapshotSet generate_advection2d_dataset(const Advection2dDatasetConfig& cfg) {
  if (cfg.amplitudes.empty() || cfg.centers.empty())
    throw ConfigError("advection2d dataset: amplitudes and centers must be nonempty");
  if (cfg.n_timesteps < 1) throw ConfigError("advection2d dataset: n_timesteps must be >= 1");
  if (!(cfg.t_end > 0.0)) throw ConfigError("advection2d dataset: t_end must be positive");
  if (cfg.grid_n < 2) throw ConfigError("advection2d dataset: grid_n must be >= 2");

  const Eigen::Index n_dof = cfg.grid_n * cfg.grid_n;
  const auto n_traj = static_cast<Eigen::Index>(cfg.amplitudes.size() * cfg.centers.size());
  const Eigen::Index m_total = n_traj * cfg.n_timesteps;
  const double h = 1.0 / static_cast<double>(cfg.grid_n - 1);

  std::vector<double> times(static_cast<std::size_t>(cfg.n_timesteps));
  for (Eigen::Index j = 0; j < cfg.n_timesteps; ++j)
    times[static_cast<std::size_t>(j)] =
        static_cast<double>(j + 1) * cfg.t_end / static_cast<double>(cfg.n_timesteps);

  SnapshotSet set;
  set.values.resize(n_dof, m_total);
  set.weights = Eigen::VectorXd::Constant(n_dof, h * h);
  set.mesh_coords.resize(n_dof, 2);
  for (Eigen::Index iy = 0; iy < cfg.grid_n; ++iy)
    for (Eigen::Index ix = 0; ix < cfg.grid_n; ++ix) {
      set.mesh_coords(iy * cfg.grid_n + ix, 0) = static_cast<double>(ix) * h;
      set.mesh_coords(iy * cfg.grid_n + ix, 1) = static_cast<double>(iy) * h;
    }

  Eigen::Index col = 0;
  for (double amplitude : cfg.amplitudes) {
    for (double center : cfg.centers) {
      const auto begin = static_cast<std::size_t>(col);
      for (double t : times) {
        Advection2dParams p{amplitude, center, cfg.l, cfg.c, t};
        set.values.col(col++) = advection_field(p, cfg.grid_n);
      }
      set.trajectories.push_back({begin, static_cast<std::size_t>(col)});
      ParamRecord rec;
      rec.push_back({"U0", {amplitude}});
      rec.push_back({"xi2_0", {center}});
      rec.push_back({"times", times});
      set.params.push_back(std::move(rec));
    }
  }
  set.validate();
  return set;
}

}  // namespace robdict
