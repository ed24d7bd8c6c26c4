#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "robdict/advection2d.hpp"
#include "robdict/clustering.hpp"
#include "robdict/common.hpp"
#include "robdict/dictionary.hpp"
#include "robdict/dissimilarity.hpp"
#include "robdict/evaluation.hpp"
#include "robdict/heat1d.hpp"
#include "robdict/pod.hpp"
#include "robdict/snapshot_io.hpp"
#include "robdict/snapshot_set.hpp"

namespace robdict::cli {

using nlohmann::json;

/// Everything a command needs: the parsed config, the output directory and
/// the effective seed (config value unless overridden on the command line).
/// config_hash fingerprints the canonicalized config in every artifact.
struct Context {
  json config;
  std::string out = ".";
  std::uint64_t seed = 0;

  std::string config_hash() const { return hex64(fnv1a64(config.dump())); }
  json provenance() const { return {{"config_hash", config_hash()}, {"seed", seed}}; }

  std::string path(const std::string& name) const {
    return (std::filesystem::path(out) / name).string();
  }

  std::string require(const std::string& name, const std::string& producer) const {
    std::string p = path(name);
    if (!std::filesystem::exists(p))
      throw ConfigError("missing artifact '" + p + "'; run `robdict " + producer + "` first");
    return p;
  }

  const json& section(const char* name) const {
    auto it = config.find(name);
    if (it == config.end()) throw ConfigError(std::string("config: missing section '") + name + "'");
    if (!it->is_object()) throw ConfigError(std::string("config: '") + name + "' must be an object");
    return *it;
  }

  json section_or_empty(const char* name) const {
    auto it = config.find(name);
    if (it == config.end()) return json::object();
    if (!it->is_object()) throw ConfigError(std::string("config: '") + name + "' must be an object");
    return *it;
  }
};

namespace detail {

template <typename T>
T field(const json& sec, const char* sec_name, const char* key) {
  auto it = sec.find(key);
  if (it == sec.end())
    throw ConfigError(std::string("config: ") + sec_name + "." + key + " is required");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: ") + sec_name + "." + key + " has the wrong type");
  }
}

template <typename T>
T field_or(const json& sec, const char* sec_name, const char* key, T fallback) {
  if (sec.find(key) == sec.end()) return fallback;
  return field<T>(sec, sec_name, key);
}

inline void remove_if_exists(const std::string& p) {
  std::error_code ec;
  std::filesystem::remove(p, ec);
}

// Rectangular matrix CSV with a one-line JSON comment header.
inline void write_matrix_csv(const Eigen::MatrixXd& m, const std::string& path, const json& header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << "# " << header.dump() << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out << buf << (j + 1 < m.cols() ? "," : "\n");
    }
  }
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

inline Eigen::MatrixXd read_matrix_csv(const std::string& path, json* header_out = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::string line;
  std::vector<std::vector<double>> rows;
  bool first = true;
  while (std::getline(in, line)) {
    if (first && line.rfind("# ", 0) == 0) {
      if (header_out) {
        json h = json::parse(line.substr(2), nullptr, false);
        if (h.is_discarded()) throw ConfigError("'" + path + "': malformed header");
        *header_out = std::move(h);
      }
      first = false;
      continue;
    }
    first = false;
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      try {
        row.push_back(std::stod(line.substr(pos, comma - pos)));
      } catch (const std::exception&) {
        throw ConfigError("'" + path + "': malformed number");
      }
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows[0].size())
      throw ConfigError("'" + path + "': ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("'" + path + "': no data rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

inline MeasureSpec measure_spec(const Context& ctx) {
  json d = ctx.section_or_empty("dissimilarity");
  MeasureSpec spec;
  spec.kind = parse_measure(field_or<std::string>(d, "dissimilarity", "measure", "sine"));
  spec.n = field_or<Eigen::Index>(d, "dissimilarity", "n", 1);
  if (spec.n < 1) throw ConfigError("config: dissimilarity.n must be >= 1");
  return spec;
}

inline Truncation truncation_spec(const json& sec, const char* sec_name) {
  const bool has_n = sec.find("n_modes") != sec.end();
  const bool has_tol = sec.find("tolerance") != sec.end();
  if (has_n == has_tol)
    throw ConfigError(std::string("config: ") + sec_name +
                      " must set exactly one of n_modes or tolerance");
  if (has_n) return Truncation::fixed(field<Eigen::Index>(sec, sec_name, "n_modes"));
  return Truncation::tolerance(field<double>(sec, sec_name, "tolerance"));
}

inline json stats_json(const SummaryStats& s) {
  return {{"q1", s.q1}, {"median", s.median}, {"q3", s.q3}, {"mean", s.mean}};
}

inline void save_basis(const ReducedBasis& basis, const std::string& path, const json& extra) {
  SnapshotSet carrier;
  carrier.values = basis.modes;
  carrier.weights = basis.weights;
  carrier.trajectories = {{0, static_cast<std::size_t>(basis.modes.cols())}};
  json meta = extra;
  meta["kind"] = "reduced_basis";
  meta["singular_values"] = std::vector<double>(
      basis.singular_values.data(), basis.singular_values.data() + basis.singular_values.size());
  export_snapshots(carrier, path, meta);
}

inline ReducedBasis load_basis(const std::string& path) {
  json meta;
  SnapshotSet carrier = import_snapshots(path, &meta);
  ReducedBasis basis;
  basis.modes = carrier.values;
  basis.weights = carrier.weights;
  auto sv = meta.value("singular_values", std::vector<double>{});
  basis.singular_values = Eigen::Map<const Eigen::VectorXd>(sv.data(), static_cast<Eigen::Index>(sv.size()));
  return basis;
}

inline std::vector<std::size_t> int_range(const json& sec, const char* sec_name, const char* values_key,
                                          const char* range_key, std::size_t lo_default,
                                          std::size_t hi_default) {
  if (sec.find(values_key) != sec.end()) {
    auto v = field<std::vector<std::size_t>>(sec, sec_name, values_key);
    if (v.empty()) throw ConfigError(std::string("config: ") + sec_name + "." + values_key + " is empty");
    return v;
  }
  std::size_t lo = lo_default, hi = hi_default;
  if (sec.find(range_key) != sec.end()) {
    auto r = field<std::vector<std::size_t>>(sec, sec_name, range_key);
    if (r.size() != 2 || r[0] > r[1])
      throw ConfigError(std::string("config: ") + sec_name + "." + range_key + " must be [lo, hi]");
    lo = r[0];
    hi = r[1];
  }
  std::vector<std::size_t> v;
  for (std::size_t k = lo; k <= hi; ++k) v.push_back(k);
  return v;
}

}  // namespace detail

inline void cmd_generate(const Context& ctx) {
  const json& p = ctx.section("problem");
  const std::string kind = detail::field<std::string>(p, "problem", "kind");
  SnapshotSet set;
  if (kind == "heat1d") {
    Heat1dDatasetConfig cfg;
    cfg.n_samples = detail::field_or<Eigen::Index>(p, "problem", "n_samples", cfg.n_samples);
    cfg.n_nodes = detail::field_or<Eigen::Index>(p, "problem", "n_nodes", cfg.n_nodes);
    cfg.L = detail::field_or<double>(p, "problem", "L", cfg.L);
    cfg.lambda1 = detail::field_or<double>(p, "problem", "lambda1", cfg.lambda1);
    cfg.u0 = detail::field_or<double>(p, "problem", "u0", cfg.u0);
    cfg.gp_sigma = detail::field_or<double>(p, "problem", "gp_sigma", cfg.gp_sigma);
    cfg.gp_corr_len = detail::field_or<double>(p, "problem", "gp_corr_len", cfg.gp_corr_len);
    cfg.seed = ctx.seed;
    set = generate_heat1d_dataset(cfg);
  } else if (kind == "advection2d") {
    Advection2dDatasetConfig cfg;
    cfg.amplitudes = detail::field_or<std::vector<double>>(p, "problem", "amplitudes", cfg.amplitudes);
    cfg.centers = detail::field_or<std::vector<double>>(p, "problem", "centers", cfg.centers);
    cfg.n_timesteps = detail::field_or<Eigen::Index>(p, "problem", "n_timesteps", cfg.n_timesteps);
    cfg.t_end = detail::field_or<double>(p, "problem", "t_end", cfg.t_end);
    cfg.grid_n = detail::field_or<Eigen::Index>(p, "problem", "grid_n", cfg.grid_n);
    cfg.l = detail::field_or<double>(p, "problem", "l", cfg.l);
    cfg.c = detail::field_or<double>(p, "problem", "c", cfg.c);
    set = generate_advection2d_dataset(cfg);
  } else {
    throw ConfigError("config: problem.kind must be 'heat1d' or 'advection2d'");
  }
  if (detail::field_or<bool>(p, "problem", "per_column", false)) set = flatten_trajectories(set);

  const double tf = detail::field_or<double>(p, "problem", "test_fraction", 0.0);
  json meta = ctx.provenance();
  meta["problem"] = p;
  if (tf == 0.0) {
    meta["role"] = "train";
    export_snapshots(set, ctx.path("train.snap"), meta);
    detail::remove_if_exists(ctx.path("test.snap"));
    detail::remove_if_exists(ctx.path("test.snap.meta.json"));
  } else {
    if (!(tf > 0.0 && tf < 1.0)) throw ConfigError("config: problem.test_fraction must lie in [0, 1)");
    auto [train, test] = split_train_test(set, 1.0 - tf, derive_seed(ctx.seed, 0x7e57));
    meta["role"] = "train";
    export_snapshots(train, ctx.path("train.snap"), meta);
    meta["role"] = "test";
    export_snapshots(test, ctx.path("test.snap"), meta);
  }
}

inline void cmd_dissim(const Context& ctx) {
  MeasureSpec spec = detail::measure_spec(ctx);
  SnapshotSet train = import_snapshots(ctx.require("train.snap", "generate"));
  std::optional<ParameterStandardizer> standardizer;
  if (spec.kind == Measure::euclid_parameter) standardizer = ParameterStandardizer::fit(train.params);
  const ParameterStandardizer* sp = standardizer ? &*standardizer : nullptr;

  DissimilarityMatrix dm = dissimilarity_matrix(train, spec, sp);
  save_dissimilarity_matrix(dm, ctx.path("dissim_train.csv"), ctx.provenance());

  if (std::filesystem::exists(ctx.path("test.snap"))) {
    SnapshotSet test = import_snapshots(ctx.path("test.snap"));
    Eigen::MatrixXd cross = cross_dissimilarity(test, train, spec, sp);
    json header = ctx.provenance();
    header["kind"] = "cross_dissimilarity";
    header["measure"] = measure_name(spec.kind);
    header["n"] = spec.n;
    detail::write_matrix_csv(cross, ctx.path("cross_test_train.csv"), header);
  } else {
    detail::remove_if_exists(ctx.path("cross_test_train.csv"));
  }
}

inline void cmd_cluster(const Context& ctx) {
  DissimilarityMatrix dm = load_dissimilarity_matrix(ctx.require("dissim_train.csv", "dissim"));
  json c = ctx.section("clustering");
  const auto k = detail::field<std::size_t>(c, "clustering", "k");
  const auto restarts = detail::field_or<std::size_t>(c, "clustering", "restarts", 10);
  const std::string init_name = detail::field_or<std::string>(c, "clustering", "init", "random");
  PamInit init;
  if (init_name == "random") init = PamInit::random;
  else if (init_name == "build") init = PamInit::build;
  else if (init_name == "exhaustive") init = PamInit::exhaustive;
  else throw ConfigError("config: clustering.init must be random, build or exhaustive");

  Clustering clustering = pam(dm, k, restarts, ctx.seed, init);
  json out = clustering_to_json(clustering, dm.measure);
  out["provenance"] = ctx.provenance();
  write_json_file(out, ctx.path("clustering.json"));
}

inline void cmd_select(const Context& ctx) {
  DissimilarityMatrix dm = load_dissimilarity_matrix(ctx.require("dissim_train.csv", "dissim"));
  Clustering clustering = clustering_from_json(read_json_file(ctx.require("clustering.json", "cluster")));
  const auto n_s = detail::field<std::size_t>(ctx.section("selection"), "selection", "n_s");
  std::vector<std::vector<std::size_t>> groups = select_snapshots(dm, clustering, n_s);
  json out = {{"kind", "selection"},
              {"n_s", n_s},
              {"groups", groups},
              {"flat", flatten_selection(groups)},
              {"provenance", ctx.provenance()}};
  write_json_file(out, ctx.path("selection.json"));
}

inline void cmd_build(const Context& ctx) {
  SnapshotSet train = import_snapshots(ctx.require("train.snap", "generate"));
  Clustering clustering = clustering_from_json(read_json_file(ctx.require("clustering.json", "cluster")));
  json sel = read_json_file(ctx.require("selection.json", "select"));
  std::vector<std::vector<std::size_t>> groups;
  try {
    groups = sel.at("groups").get<std::vector<std::vector<std::size_t>>>();
  } catch (const json::exception& e) {
    throw ConfigError("selection.json: " + std::string(e.what()));
  }
  Truncation truncation = detail::truncation_spec(ctx.section("dictionary"), "dictionary");

  RomDictionary dict = build_dictionary(train, clustering, groups, truncation);
  ReducedBasis global = build_global_rom(train, flatten_selection(groups), truncation);
  json extra = {{"provenance", ctx.provenance()}};
  save_dictionary(dict, ctx.path("dictionary"), extra);
  detail::save_basis(global, ctx.path("global_basis.snap"), extra);
}

inline void cmd_evaluate(const Context& ctx) {
  ctx.require("dictionary/manifest.json", "build");
  SnapshotSet test = import_snapshots(ctx.require("test.snap", "generate (set problem.test_fraction)"));
  RomDictionary dict = load_dictionary(ctx.path("dictionary"));
  ReducedBasis global = detail::load_basis(ctx.require("global_basis.snap", "build"));
  Eigen::MatrixXd cross = detail::read_matrix_csv(ctx.require("cross_test_train.csv", "dissim"));
  if (cross.rows() != static_cast<Eigen::Index>(test.n_trajectories()))
    throw ConfigError("cross_test_train.csv: row count does not match the test set");

  Eigen::MatrixXd to_medoids(cross.rows(), static_cast<Eigen::Index>(dict.k));
  for (std::size_t c = 0; c < dict.k; ++c) {
    if (dict.medoid_indices[c] >= static_cast<std::size_t>(cross.cols()))
      throw ConfigError("cross_test_train.csv: too few columns for the dictionary medoids");
    to_medoids.col(static_cast<Eigen::Index>(c)) =
        cross.col(static_cast<Eigen::Index>(dict.medoid_indices[c]));
  }

  EvaluationResult errors = evaluate_errors(test, dict, to_medoids);
  std::vector<double> global_eta;
  for (std::size_t t = 0; t < test.n_trajectories(); ++t) {
    std::vector<double> eta = robdict::detail::projection_errors(test.trajectory(t), global);
    global_eta.insert(global_eta.end(), eta.begin(), eta.end());
  }

  json out = {{"kind", "evaluation"},
              {"provenance", ctx.provenance()},
              {"n_test_columns", errors.eta.size()},
              {"assigned", errors.assigned},
              {"eta", errors.eta},
              {"eta_stats", detail::stats_json(errors.stats)},
              {"global_eta", global_eta},
              {"global_eta_stats", detail::stats_json(summarize(global_eta))}};
  bool uniform = true;
  for (const ReducedBasis& b : dict.bases)
    if (b.n_modes() != global.n_modes()) uniform = false;
  if (uniform) {
    GainSamples gains = gain_samples(test, dict, global, to_medoids);
    out["gains"] = {{"values", gains.gains},
                    {"stats", detail::stats_json(gains.stats)},
                    {"floored", gains.floored}};
  } else {
    out["gains"] = nullptr;
    out["note"] = "basis sizes differ between dictionary and global ROM; gains skipped";
  }
  write_json_file(out, ctx.path("evaluation.json"));
}

inline void cmd_admissible(const Context& ctx) {
  SnapshotSet train = import_snapshots(ctx.require("train.snap", "generate"));
  SnapshotSet test = import_snapshots(ctx.require("test.snap", "generate (set problem.test_fraction)"));
  DissimilarityMatrix dm = load_dissimilarity_matrix(ctx.require("dissim_train.csv", "dissim"));
  Eigen::MatrixXd cross = detail::read_matrix_csv(ctx.require("cross_test_train.csv", "dissim"));

  json a = ctx.section_or_empty("admissible");
  AdmissibleSearchConfig cfg;
  cfg.k_values = detail::int_range(a, "admissible", "k_values", "k_range", 2, 10);
  auto n_sizes = detail::int_range(a, "admissible", "n_values", "n_range", 1, 5);
  for (std::size_t n : n_sizes) cfg.n_values.push_back(static_cast<Eigen::Index>(n));
  cfg.budget = detail::field_or<std::size_t>(a, "admissible", "budget", cfg.budget);
  cfg.eta_star = detail::field_or<double>(a, "admissible", "eta_star", cfg.eta_star);
  cfg.g_r_star = detail::field_or<double>(a, "admissible", "g_r_star", cfg.g_r_star);
  cfg.expected_wrong_gain =
      detail::field_or<double>(a, "admissible", "expected_wrong_gain", cfg.expected_wrong_gain);
  cfg.restarts = detail::field_or<std::size_t>(a, "admissible", "restarts", cfg.restarts);
  if (a.find("n_s") != a.end()) cfg.n_s_override = detail::field<std::size_t>(a, "admissible", "n_s");
  cfg.seed = ctx.seed;

  json acc = a.find("accuracy") != a.end() ? a.at("accuracy") : json::object();
  AccuracyModel model = fit_accuracy_model(detail::field_or<double>(acc, "admissible.accuracy", "p1", 1.0),
                                           detail::field_or<double>(acc, "admissible.accuracy", "k_mid", 6.0),
                                           detail::field_or<double>(acc, "admissible.accuracy", "p_mid", 0.8),
                                           detail::field_or<double>(acc, "admissible.accuracy", "k_max", 20.0));

  HyperparameterReport report = admissible_set(train, test, dm, cross, cfg, model);

  json cells = json::array();
  for (const HyperparameterCell& c : report.cells) {
    cells.push_back({{"K", c.k},
                     {"N", c.n},
                     {"n_s", c.n_s},
                     {"mean_eta", c.mean_eta},
                     {"median_eta", c.median_eta},
                     {"mean_gain", c.mean_gain},
                     {"gain_cv", c.gain_cv},
                     {"p_k", c.p_k},
                     {"threshold", c.threshold},
                     {"floored_gains", c.floored_gains},
                     {"r1", c.r1},
                     {"r2", c.r2},
                     {"r3", c.r3},
                     {"r4", c.r4},
                     {"admissible", c.admissible()},
                     {"feasible", c.feasible},
                     {"note", c.note}});
  }
  json out = {{"kind", "admissible"},
              {"provenance", ctx.provenance()},
              {"budget", report.budget},
              {"eta_star", report.eta_star},
              {"g_r_star", report.g_r_star},
              {"expected_wrong_gain", report.expected_wrong_gain},
              {"n_limit", report.n_limit},
              {"accuracy", {{"a", model.a}, {"b", model.b}, {"c", model.c}, {"k_max", model.k_max}}},
              {"cells", cells}};
  if (report.recommendation) {
    out["recommendation"] = {{"K", report.recommendation->k},
                             {"N", report.recommendation->n},
                             {"n_s", report.recommendation->n_s}};
  } else {
    out["recommendation"] = nullptr;
  }
  write_json_file(out, ctx.path("admissible.json"));

  std::ofstream csv(ctx.path("admissible.csv"), std::ios::binary);
  if (!csv) throw ConfigError("cannot open '" + ctx.path("admissible.csv") + "' for writing");
  csv << "K,N,n_s,mean_eta,median_eta,mean_gain,gain_cv,p_k,threshold,floored_gains,"
         "r1,r2,r3,r4,admissible,feasible,note\n";
  char buf[32];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const HyperparameterCell& c : report.cells) {
    csv << c.k << ',' << c.n << ',' << c.n_s << ',' << num(c.mean_eta) << ',' << num(c.median_eta) << ','
        << num(c.mean_gain) << ',' << num(c.gain_cv) << ',' << num(c.p_k) << ',' << num(c.threshold) << ','
        << c.floored_gains << ',' << c.r1 << ',' << c.r2 << ',' << c.r3 << ',' << c.r4 << ','
        << c.admissible() << ',' << c.feasible << ',' << c.note << '\n';
  }
  if (!csv) throw ConfigError("failed writing '" + ctx.path("admissible.csv") + "'");

  if (report.recommendation) {
    std::cout << "admissible set nonempty; recommended (K, N, n_s) = (" << report.recommendation->k << ", "
              << report.recommendation->n << ", " << report.recommendation->n_s << ")\n";
  } else {
    std::cout << "admissible set empty\n";
  }
}

inline void cmd_compare(const Context& ctx) {
  SnapshotSet train = import_snapshots(ctx.require("train.snap", "generate"));
  SnapshotSet test = import_snapshots(ctx.require("test.snap", "generate (set problem.test_fraction)"));
  json c = ctx.section_or_empty("compare");
  const auto k = detail::field_or<std::size_t>(c, "compare", "k", 6);
  const auto n = detail::field_or<Eigen::Index>(c, "compare", "n", 3);
  const auto n_s = detail::field_or<std::size_t>(c, "compare", "n_s", static_cast<std::size_t>(n));
  const auto restarts = detail::field_or<std::size_t>(c, "compare", "restarts", 10);

  CompareReport report = compare_strategies(train, test, k, n, n_s, restarts, ctx.seed);
  CorrelationReport corr = correlation_report(report.eta_dict_sine, report.nearest);

  json strategies = json::array();
  for (const StrategyResult& s : report.strategies) {
    strategies.push_back({{"name", s.name},
                          {"measure", measure_name(s.measure)},
                          {"stats", detail::stats_json(s.stats)},
                          {"eta", s.eta}});
  }
  json correlations = json::array();
  for (const CorrelationEntry& e : corr.entries) {
    correlations.push_back({{"measure", e.measure},
                            {"pearson", e.pearson},
                            {"spearman", e.spearman},
                            {"valid", e.valid},
                            {"warning", e.warning}});
  }
  json out = {{"kind", "compare"},
              {"provenance", ctx.provenance()},
              {"K", k},
              {"N", n},
              {"n_s", n_s},
              {"strategies", strategies},
              {"correlations", correlations}};
  write_json_file(out, ctx.path("compare.json"));
}

inline void cmd_mds(const Context& ctx) {
  DissimilarityMatrix dm = load_dissimilarity_matrix(ctx.require("dissim_train.csv", "dissim"));
  const auto dim = detail::field_or<Eigen::Index>(ctx.section_or_empty("mds"), "mds", "dim", 2);
  MdsResult res = classical_mds(dm, dim);
  json coords = json::array();
  for (Eigen::Index i = 0; i < res.coordinates.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < res.coordinates.cols(); ++j) row.push_back(res.coordinates(i, j));
    coords.push_back(std::move(row));
  }
  json out = {{"kind", "mds"},
              {"provenance", ctx.provenance()},
              {"dim_requested", dim},
              {"dim_used", res.dim_used},
              {"eigenvalues", std::vector<double>(res.eigenvalues.data(),
                                                  res.eigenvalues.data() + res.eigenvalues.size())},
              {"warnings", res.warnings},
              {"coordinates", coords}};
  write_json_file(out, ctx.path("mds.json"));
}

inline int resolve_threads(const std::optional<int>& flag, const json& config) {
  int threads = 0;
  if (flag) {
    threads = *flag;
  } else if (const char* env = std::getenv("ROBDICT_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1)
      throw ConfigError("ROBDICT_THREADS must be a positive integer");
    threads = static_cast<int>(v);
  } else if (config.find("threads") != config.end()) {
    threads = detail::field<int>(config, "config", "threads");
  } else {
    threads = 1;
  }
  if (threads < 1) throw ConfigError("thread count must be >= 1");
  return threads;
}

/// Parses and runs one command line (without the program name). Returns the
/// process exit code: 0 on success, 2 on configuration or usage errors, 3 on
/// numerical or I/O failures.
inline int run(std::vector<std::string> args) {
  CLI::App app{"dictionaries of cluster-specific reduced-order bases"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed_flag;
  std::optional<int> threads_flag;

  struct CommandSpec {
    const char* name;
    const char* help;
    void (*fn)(const Context&);
  };
  const CommandSpec commands[] = {
      {"generate", "sample a snapshot dataset and split it", cmd_generate},
      {"dissim", "dissimilarity matrices of the training set", cmd_dissim},
      {"cluster", "k-medoids clustering of the training set", cmd_cluster},
      {"select", "two-stage snapshot selection per cluster", cmd_select},
      {"build", "local POD bases and the matched global ROM", cmd_build},
      {"evaluate", "projection errors and gains on the test set", cmd_evaluate},
      {"admissible", "hyperparameter grid search with admissibility flags", cmd_admissible},
      {"compare", "six-strategy comparison and error correlations", cmd_compare},
      {"mds", "classical MDS embedding of the training set", cmd_mds},
  };
  for (const CommandSpec& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--out", out_dir, "artifact directory (default: .)");
    sub->add_option("--seed", seed_flag, "override the config seed");
    sub->add_option("--threads", threads_flag, "worker thread count");
  }

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    Context ctx;
    ctx.config = read_json_file(config_path);
    if (!ctx.config.is_object()) throw ConfigError("config: top level must be an object");
    ctx.out = out_dir;
    ctx.seed = seed_flag ? *seed_flag : detail::field_or<std::uint64_t>(ctx.config, "config", "seed", 0);
    worker_count() = resolve_threads(threads_flag, ctx.config);
    std::filesystem::create_directories(ctx.out);

    for (const CommandSpec& c : commands) {
      if (app.get_subcommand(c.name)->parsed()) {
        c.fn(ctx);
        return 0;
      }
    }
    throw ConfigError("no command given");
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace robdict::cli
