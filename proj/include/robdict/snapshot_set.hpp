#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "robdict/common.hpp"

namespace robdict {

/// One named block of a trajectory's parameter record, e.g. ("zeta", [0.3])
/// or ("source", nodal values). Records keep insertion order; concatenating
/// the values of all entries yields the trajectory's parameter vector.
struct ParamEntry {
  std::string name;
  std::vector<double> values;
};

using ParamRecord = std::vector<ParamEntry>;

/// Half-open column range [begin, end) of one trajectory.
struct TrajectoryRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
};

/// Collection of solution snapshots over a fixed mesh. Columns are solution
/// fields, grouped into trajectories; weights define the discrete inner
/// product <u, v> = sum_i w_i u_i v_i.
struct SnapshotSet {
  Eigen::MatrixXd values;                    // n_dof x m_total
  Eigen::VectorXd weights;                   // n_dof, all positive
  std::vector<TrajectoryRange> trajectories; // ordered partition of the columns
  std::vector<ParamRecord> params;           // per trajectory; may be empty
  Eigen::MatrixXd mesh_coords;               // n_dof x dim, may be empty

  Eigen::Index n_dof() const { return values.rows(); }
  Eigen::Index n_columns() const { return values.cols(); }
  std::size_t n_trajectories() const { return trajectories.size(); }

  Eigen::Ref<const Eigen::MatrixXd> trajectory(std::size_t t) const {
    const TrajectoryRange& r = trajectories.at(t);
    return values.middleCols(static_cast<Eigen::Index>(r.begin), static_cast<Eigen::Index>(r.size()));
  }

  /// Throws ConfigError naming the offending field on any structural defect.
  void validate() const {
    if (values.rows() == 0 || values.cols() == 0) throw ConfigError("snapshot set: values is empty");
    if (weights.size() != values.rows())
      throw ConfigError("snapshot set: weights length " + std::to_string(weights.size()) +
                        " does not match n_dof " + std::to_string(values.rows()));
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
      if (!(weights[i] > 0.0))
        throw ConfigError("snapshot set: weights[" + std::to_string(i) + "] = " + std::to_string(weights[i]) +
                          " is not positive");
    }
    if (trajectories.empty()) throw ConfigError("snapshot set: trajectories is empty");
    std::size_t cursor = 0;
    for (std::size_t t = 0; t < trajectories.size(); ++t) {
      const TrajectoryRange& r = trajectories[t];
      if (r.begin != cursor || r.end <= r.begin)
        throw ConfigError("snapshot set: trajectories[" + std::to_string(t) +
                          "] does not partition the columns in order");
      cursor = r.end;
    }
    if (cursor != static_cast<std::size_t>(values.cols()))
      throw ConfigError("snapshot set: trajectories cover " + std::to_string(cursor) + " of " +
                        std::to_string(values.cols()) + " columns");
    if (!params.empty() && params.size() != trajectories.size())
      throw ConfigError("snapshot set: params has " + std::to_string(params.size()) + " records for " +
                        std::to_string(trajectories.size()) + " trajectories");
    if (mesh_coords.size() != 0 && mesh_coords.rows() != values.rows())
      throw ConfigError("snapshot set: mesh_coords rows " + std::to_string(mesh_coords.rows()) +
                        " do not match n_dof " + std::to_string(values.rows()));
  }
};

/// Regroups the set so every column is its own trajectory. A record entry
/// named "times" whose length equals the trajectory length is split into a
/// scalar "t" entry per column; every other entry is copied as-is.
inline SnapshotSet flatten_trajectories(const SnapshotSet& set) {
  SnapshotSet flat;
  flat.values = set.values;
  flat.weights = set.weights;
  flat.mesh_coords = set.mesh_coords;
  const auto m = static_cast<std::size_t>(set.values.cols());
  flat.trajectories.reserve(m);
  for (std::size_t c = 0; c < m; ++c) flat.trajectories.push_back({c, c + 1});
  if (!set.params.empty()) {
    flat.params.reserve(m);
    for (std::size_t t = 0; t < set.trajectories.size(); ++t) {
      const TrajectoryRange& r = set.trajectories[t];
      for (std::size_t c = r.begin; c < r.end; ++c) {
        ParamRecord rec;
        for (const ParamEntry& e : set.params[t]) {
          if (e.name == "times" && e.values.size() == r.size())
            rec.push_back({"t", {e.values[c - r.begin]}});
          else
            rec.push_back(e);
        }
        flat.params.push_back(std::move(rec));
      }
    }
  }
  return flat;
}

/// Extracts the listed trajectories (in the given order) into a new set.
inline SnapshotSet subset_by_trajectories(const SnapshotSet& set, const std::vector<std::size_t>& traj_indices) {
  if (traj_indices.empty()) throw ConfigError("subset_by_trajectories: empty index list");
  SnapshotSet out;
  out.weights = set.weights;
  out.mesh_coords = set.mesh_coords;
  Eigen::Index total = 0;
  for (std::size_t t : traj_indices) {
    if (t >= set.trajectories.size())
      throw ConfigError("subset_by_trajectories: trajectory index " + std::to_string(t) + " out of range");
    total += static_cast<Eigen::Index>(set.trajectories[t].size());
  }
  out.values.resize(set.values.rows(), total);
  std::size_t cursor = 0;
  for (std::size_t t : traj_indices) {
    const TrajectoryRange& r = set.trajectories[t];
    out.values.middleCols(static_cast<Eigen::Index>(cursor), static_cast<Eigen::Index>(r.size())) =
        set.trajectory(t);
    out.trajectories.push_back({cursor, cursor + r.size()});
    if (!set.params.empty()) out.params.push_back(set.params[t]);
    cursor += r.size();
  }
  return out;
}

/// Seeded shuffle of the trajectories followed by a first/second split.
/// fraction is the share assigned to the first (training) set.
inline std::pair<SnapshotSet, SnapshotSet> split_train_test(const SnapshotSet& set, double fraction,
                                                            std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("split_train_test: fraction must lie in (0, 1)");
  const std::size_t m = set.n_trajectories();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng = make_rng(seed, 0x5b17ull);
  for (std::size_t i = m; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(m)));
  if (n_train == 0 || n_train == m) throw ConfigError("split_train_test: split leaves one side empty");
  std::vector<std::size_t> head(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> tail(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return {subset_by_trajectories(set, head), subset_by_trajectories(set, tail)};
}

}  // namespace robdict
