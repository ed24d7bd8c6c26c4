#pragma once

#include <Eigen/Dense>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "robdict/common.hpp"
#include "robdict/snapshot_set.hpp"

namespace robdict {

// On-disk layout (little endian):
//   8 bytes  magic "ROBSNAP1"
//   3 x u64  n_dof, m_total, n_trajectories
//   f64[n_dof]              weights
//   u64[n_trajectories + 1] trajectory start offsets (last = m_total)
//   f64[n_dof * m_total]    values, column major
// Parameter records and mesh coordinates live in "<path>.meta.json".
inline constexpr char kSnapshotMagic[8] = {'R', 'O', 'B', 'S', 'N', 'A', 'P', '1'};

static_assert(std::endian::native == std::endian::little, "snapshot files are little endian");

namespace detail {

template <typename T>
inline void write_raw(std::ofstream& out, const T* data, std::size_t count) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
}

template <typename T>
inline void read_raw(std::ifstream& in, T* data, std::size_t count, const std::string& path,
                     const char* field) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(T))
    throw ConfigError("'" + path + "': truncated while reading " + field);
}

inline std::string meta_path(const std::string& path) { return path + ".meta.json"; }

}  // namespace detail

/// Writes the set plus its metadata sidecar. `extra` is merged into the
/// sidecar top level (provenance and the like).
inline void export_snapshots(const SnapshotSet& set, const std::string& path,
                             const nlohmann::json& extra = nlohmann::json::object()) {
  set.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out.write(kSnapshotMagic, sizeof(kSnapshotMagic));
  const std::uint64_t dims[3] = {static_cast<std::uint64_t>(set.values.rows()),
                                 static_cast<std::uint64_t>(set.values.cols()),
                                 static_cast<std::uint64_t>(set.trajectories.size())};
  detail::write_raw(out, dims, 3);
  detail::write_raw(out, set.weights.data(), static_cast<std::size_t>(set.weights.size()));
  std::vector<std::uint64_t> offsets;
  offsets.reserve(set.trajectories.size() + 1);
  for (const TrajectoryRange& r : set.trajectories) offsets.push_back(r.begin);
  offsets.push_back(static_cast<std::uint64_t>(set.values.cols()));
  detail::write_raw(out, offsets.data(), offsets.size());
  detail::write_raw(out, set.values.data(), static_cast<std::size_t>(set.values.size()));
  if (!out) throw ConfigError("failed writing '" + path + "'");
  out.close();

  nlohmann::json meta = extra;
  meta["kind"] = "snapshot_set_meta";
  nlohmann::json params = nlohmann::json::array();
  for (const ParamRecord& rec : set.params) {
    nlohmann::json jrec = nlohmann::json::array();
    for (const ParamEntry& e : rec) jrec.push_back({{"name", e.name}, {"values", e.values}});
    params.push_back(std::move(jrec));
  }
  meta["params"] = std::move(params);
  if (set.mesh_coords.size() != 0) {
    meta["mesh"] = {{"dim", set.mesh_coords.cols()},
                    {"coords", std::vector<double>(set.mesh_coords.data(),
                                                   set.mesh_coords.data() + set.mesh_coords.size())}};
  } else {
    meta["mesh"] = nullptr;
  }
  std::ofstream meta_out(detail::meta_path(path), std::ios::binary);
  if (!meta_out) throw ConfigError("cannot open '" + detail::meta_path(path) + "' for writing");
  meta_out << meta.dump(2) << '\n';
  if (!meta_out) throw ConfigError("failed writing '" + detail::meta_path(path) + "'");
}

/// Reads a snapshot file and, when present, its metadata sidecar. Validates
/// the result; a truncated or inconsistent file never yields a partial set.
inline SnapshotSet import_snapshots(const std::string& path, nlohmann::json* meta_out = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open snapshot file '" + path + "'");
  char magic[8];
  detail::read_raw(in, magic, 8, path, "magic");
  if (std::memcmp(magic, kSnapshotMagic, 8) != 0)
    throw ConfigError("'" + path + "': magic does not identify a snapshot file");
  std::uint64_t dims[3];
  detail::read_raw(in, dims, 3, path, "dimensions");
  if (dims[0] == 0 || dims[1] == 0 || dims[2] == 0 || dims[2] > dims[1] ||
      dims[0] > (1ull << 32) || dims[1] > (1ull << 32))
    throw ConfigError("'" + path + "': implausible dimensions");

  SnapshotSet set;
  set.weights.resize(static_cast<Eigen::Index>(dims[0]));
  detail::read_raw(in, set.weights.data(), dims[0], path, "weights");
  std::vector<std::uint64_t> offsets(dims[2] + 1);
  detail::read_raw(in, offsets.data(), offsets.size(), path, "trajectory offsets");
  for (std::size_t t = 0; t < dims[2]; ++t) {
    if (offsets[t] >= offsets[t + 1] || offsets[t + 1] > dims[1])
      throw ConfigError("'" + path + "': trajectory offsets are not an ordered partition");
    set.trajectories.push_back({offsets[t], offsets[t + 1]});
  }
  if (offsets[0] != 0 || offsets[dims[2]] != dims[1])
    throw ConfigError("'" + path + "': trajectory offsets do not cover the columns");
  set.values.resize(static_cast<Eigen::Index>(dims[0]), static_cast<Eigen::Index>(dims[1]));
  detail::read_raw(in, set.values.data(), dims[0] * dims[1], path, "values");

  std::ifstream meta_in(detail::meta_path(path), std::ios::binary);
  if (meta_in) {
    nlohmann::json meta = nlohmann::json::parse(meta_in, nullptr, false);
    if (meta.is_discarded()) throw ConfigError("'" + detail::meta_path(path) + "': malformed JSON");
    if (meta.contains("params") && meta["params"].is_array() && !meta["params"].empty()) {
      for (const auto& jrec : meta["params"]) {
        ParamRecord rec;
        for (const auto& je : jrec)
          rec.push_back({je.at("name").get<std::string>(), je.at("values").get<std::vector<double>>()});
        set.params.push_back(std::move(rec));
      }
    }
    if (meta.contains("mesh") && meta["mesh"].is_object()) {
      const auto dim = meta["mesh"].at("dim").get<Eigen::Index>();
      auto coords = meta["mesh"].at("coords").get<std::vector<double>>();
      if (dim > 0 && coords.size() == static_cast<std::size_t>(set.values.rows() * dim))
        set.mesh_coords = Eigen::Map<const Eigen::MatrixXd>(coords.data(), set.values.rows(), dim);
    }
    if (meta_out) *meta_out = std::move(meta);
  } else if (meta_out) {
    *meta_out = nlohmann::json::object();
  }
  set.validate();
  return set;
}

/// Plain-text export for small matrices; refuses anything above 1e6 entries.
inline void export_matrix_csv(const Eigen::MatrixXd& matrix, const std::string& path) {
  if (matrix.size() > 1000000)
    throw ConfigError("csv export: matrix has " + std::to_string(matrix.size()) +
                      " entries; limit is 1000000");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  for (Eigen::Index j = 0; j < matrix.cols(); ++j) out << (j ? "," : "") << "c" << j;
  out << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", matrix(i, j));
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

inline void write_json_file(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("'" + path + "': malformed JSON");
  return j;
}

}  // namespace robdict
