#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "robdict/clustering.hpp"
#include "robdict/heat1d.hpp"
#include "robdict/pod.hpp"
#include "robdict/snapshot_io.hpp"
#include "robdict/snapshot_set.hpp"

namespace robdict {

/// Cluster-specific reduced bases plus the provenance needed to use them:
/// which medoids anchor the clusters and which snapshots each basis was
/// built from. All bases share the training set's inner-product weights.
struct RomDictionary {
  std::vector<ReducedBasis> bases;             // one per cluster
  std::vector<std::size_t> medoid_indices;     // trajectory indices, per cluster
  std::vector<std::vector<std::size_t>> selection;  // trajectory indices, per cluster
  std::size_t k = 0;
  Eigen::Index n_modes = 0;  // max over bases; equal across bases for fixed truncation
  std::size_t n_s = 0;

  const ReducedBasis& basis_for_cluster(std::size_t c) const { return bases.at(c); }
};

namespace detail {

inline Eigen::MatrixXd gather_columns(const SnapshotSet& set, const std::vector<std::size_t>& traj_indices) {
  Eigen::Index total = 0;
  for (std::size_t t : traj_indices) {
    if (t >= set.trajectories.size())
      throw ConfigError("dictionary: trajectory index " + std::to_string(t) + " out of range");
    total += static_cast<Eigen::Index>(set.trajectories[t].size());
  }
  Eigen::MatrixXd cols(set.n_dof(), total);
  Eigen::Index at = 0;
  for (std::size_t t : traj_indices) {
    const auto width = static_cast<Eigen::Index>(set.trajectories[t].size());
    cols.middleCols(at, width) = set.trajectory(t);
    at += width;
  }
  return cols;
}

}  // namespace detail

/// Builds one POD basis per cluster from that cluster's selected snapshots.
/// With fixed truncation every basis has exactly N modes; with tolerance
/// truncation sizes may differ per cluster.
inline RomDictionary build_dictionary(const SnapshotSet& set, const Clustering& clustering,
                                      const std::vector<std::vector<std::size_t>>& selection,
                                      const Truncation& truncation) {
  set.validate();
  if (selection.size() != clustering.k())
    throw ConfigError("dictionary: selection has " + std::to_string(selection.size()) + " groups for K = " +
                      std::to_string(clustering.k()));
  RomDictionary dict;
  dict.k = clustering.k();
  dict.medoid_indices = clustering.medoids;
  dict.selection = selection;
  dict.n_s = selection.empty() ? 0 : selection[0].size();
  dict.bases.reserve(dict.k);
  for (std::size_t c = 0; c < dict.k; ++c) {
    if (selection[c].empty()) throw ConfigError("dictionary: cluster " + std::to_string(c) + " selected nothing");
    try {
      dict.bases.push_back(pod_basis(detail::gather_columns(set, selection[c]), set.weights, truncation));
    } catch (const NumericalError& e) {
      throw NumericalError("dictionary: cluster " + std::to_string(c) + ": " + e.what());
    }
    dict.n_modes = std::max(dict.n_modes, dict.bases.back().n_modes());
  }
  return dict;
}

/// Single POD basis over the union of the selected snapshots; the global
/// counterpart a dictionary is compared against.
inline ReducedBasis build_global_rom(const SnapshotSet& set, const std::vector<std::size_t>& selection,
                                     const Truncation& truncation) {
  set.validate();
  if (selection.empty()) throw ConfigError("global rom: empty selection");
  return pod_basis(detail::gather_columns(set, selection), set.weights, truncation);
}

/// Subtracts the constant Dirichlet value so snapshots vanish on the
/// boundary; POD bases of the result are admissible for the reduced solve.
inline SnapshotSet lift_columns(const SnapshotSet& set, double u0) {
  SnapshotSet lifted = set;
  if (u0 != 0.0) lifted.values.array() -= u0;
  return lifted;
}

struct ReducedSolution {
  Eigen::VectorXd coefficients;  // gamma, one per mode
  Eigen::VectorXd field;         // u0 + modes * gamma on all nodes
};

/// Galerkin projection of the 1D heat operator onto the basis:
/// (Psi^T K Psi) gamma = Psi^T f on the interior unknowns, u = u0 + Psi gamma.
/// The basis must stem from lifted snapshots over the same mesh.
inline ReducedSolution reduced_galerkin_solve_heat1d(const Heat1dParams& p, const ReducedBasis& basis) {
  const Eigen::Index n_nodes = basis.n_dof();
  auto [k, f] = detail::assemble_heat1d(p, n_nodes);
  const Eigen::Index n_int = n_nodes - 2;
  Eigen::MatrixXd psi = basis.modes.middleRows(1, n_int);

  // K Psi through the tridiagonal stencil, then the small dense system.
  Eigen::MatrixXd kpsi(n_int, psi.cols());
  for (Eigen::Index j = 0; j < psi.cols(); ++j) {
    for (Eigen::Index i = 0; i < n_int; ++i) {
      double v = k.diag[i] * psi(i, j);
      if (i > 0) v += k.off[i - 1] * psi(i - 1, j);
      if (i < n_int - 1) v += k.off[i] * psi(i + 1, j);
      kpsi(i, j) = v;
    }
  }
  Eigen::MatrixXd a = psi.transpose() * kpsi;
  Eigen::VectorXd b = psi.transpose() * f;
  Eigen::LDLT<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success)
    throw NumericalError("reduced solve: projected operator could not be factorized");
  Eigen::VectorXd gamma = solver.solve(b);
  if (!gamma.allFinite() || (a * gamma - b).norm() > 1e-8 * std::max(1.0, b.norm()))
    throw NumericalError("reduced solve: projected system is singular or badly conditioned");

  ReducedSolution sol;
  sol.coefficients = gamma;
  sol.field = basis.modes * gamma;
  sol.field.array() += p.u0;
  return sol;
}

/// Directory layout: manifest.json plus one snapshot-format file per basis
/// (modes as columns, one trajectory). Singular values go in the sidecars.
inline void save_dictionary(const RomDictionary& dict, const std::string& dir,
                            const nlohmann::json& extra = nlohmann::json::object()) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json manifest = extra;
  manifest["kind"] = "rom_dictionary";
  manifest["K"] = dict.k;
  manifest["N"] = dict.n_modes;
  manifest["n_s"] = dict.n_s;
  manifest["medoid_indices"] = dict.medoid_indices;
  manifest["selection"] = dict.selection;
  nlohmann::json files = nlohmann::json::array();
  for (std::size_t c = 0; c < dict.bases.size(); ++c) {
    const std::string name = "basis_" + std::to_string(c) + ".snap";
    const ReducedBasis& basis = dict.bases[c];
    SnapshotSet carrier;
    carrier.values = basis.modes;
    carrier.weights = basis.weights;
    carrier.trajectories = {{0, static_cast<std::size_t>(basis.modes.cols())}};
    nlohmann::json sidecar = {
        {"singular_values", std::vector<double>(basis.singular_values.data(),
                                                basis.singular_values.data() + basis.singular_values.size())}};
    export_snapshots(carrier, (fs::path(dir) / name).string(), sidecar);
    files.push_back(name);
  }
  manifest["basis_files"] = std::move(files);
  write_json_file(manifest, (fs::path(dir) / "manifest.json").string());
}

inline RomDictionary load_dictionary(const std::string& dir, nlohmann::json* manifest_out = nullptr) {
  namespace fs = std::filesystem;
  nlohmann::json manifest = read_json_file((fs::path(dir) / "manifest.json").string());
  RomDictionary dict;
  try {
    dict.k = manifest.at("K").get<std::size_t>();
    dict.n_modes = manifest.at("N").get<Eigen::Index>();
    dict.n_s = manifest.at("n_s").get<std::size_t>();
    dict.medoid_indices = manifest.at("medoid_indices").get<std::vector<std::size_t>>();
    dict.selection = manifest.at("selection").get<std::vector<std::vector<std::size_t>>>();
    for (const auto& name : manifest.at("basis_files")) {
      nlohmann::json sidecar;
      SnapshotSet carrier = import_snapshots((fs::path(dir) / name.get<std::string>()).string(), &sidecar);
      ReducedBasis basis;
      basis.modes = carrier.values;
      basis.weights = carrier.weights;
      auto sv = sidecar.value("singular_values", std::vector<double>{});
      basis.singular_values = Eigen::Map<const Eigen::VectorXd>(sv.data(), static_cast<Eigen::Index>(sv.size()));
      dict.bases.push_back(std::move(basis));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("dictionary manifest: " + std::string(e.what()));
  }
  if (dict.bases.size() != dict.k) throw ConfigError("dictionary manifest: basis count does not match K");
  if (manifest_out) *manifest_out = std::move(manifest);
  return dict;
}

}  // namespace robdict
