#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "robdict/clustering.hpp"
#include "robdict/common.hpp"
#include "robdict/dictionary.hpp"
#include "robdict/dissimilarity.hpp"
#include "robdict/pod.hpp"
#include "robdict/snapshot_set.hpp"

namespace robdict {

/// Quartiles by linear interpolation between order statistics (the common
/// "type 7" rule), plus the mean.
struct SummaryStats {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double mean = 0.0;
};

inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw ConfigError("quantile: empty sample");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline SummaryStats summarize(std::vector<double> xs) {
  if (xs.empty()) throw ConfigError("summarize: empty sample");
  SummaryStats s;
  s.mean = 0.0;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  std::sort(xs.begin(), xs.end());
  s.q1 = quantile_sorted(xs, 0.25);
  s.median = quantile_sorted(xs, 0.5);
  s.q3 = quantile_sorted(xs, 0.75);
  return s;
}

namespace detail {

// Column-wise relative projection errors of a block of fields.
inline std::vector<double> projection_errors(const Eigen::Ref<const Eigen::MatrixXd>& fields,
                                             const ReducedBasis& basis) {
  Eigen::MatrixXd weighted = basis.weights.asDiagonal() * fields;
  Eigen::MatrixXd coeffs = basis.modes.transpose() * weighted;
  Eigen::MatrixXd residual = fields - basis.modes * coeffs;
  std::vector<double> eta(static_cast<std::size_t>(fields.cols()));
  for (Eigen::Index c = 0; c < fields.cols(); ++c) {
    const double nu = weighted_norm(fields.col(c), basis.weights);
    if (!(nu > 0.0)) throw NumericalError("projection error: field has zero norm");
    const double e = weighted_norm(residual.col(c), basis.weights) / nu;
    eta[static_cast<std::size_t>(c)] = std::min(1.0, std::max(0.0, e));
  }
  return eta;
}

inline void check_same_weights(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const char* context) {
  if (a.size() != b.size() || a != b)
    throw ConfigError(std::string(context) + ": inner-product weights do not match");
}

}  // namespace detail

/// Per-column projection errors of a test set against a dictionary, with
/// each trajectory routed to the cluster of its nearest medoid.
/// test_to_medoids holds dissimilarities from every test trajectory (rows)
/// to the K medoids (columns), under the dictionary's own measure.
struct EvaluationResult {
  std::vector<double> eta;            // per test column
  std::vector<std::size_t> assigned;  // per test trajectory
  SummaryStats stats;
};

inline EvaluationResult evaluate_errors(const SnapshotSet& test, const RomDictionary& dict,
                                        const Eigen::MatrixXd& test_to_medoids) {
  test.validate();
  if (dict.bases.empty()) throw ConfigError("evaluate: dictionary has no bases");
  detail::check_same_weights(test.weights, dict.bases[0].weights, "evaluate");
  if (test_to_medoids.rows() != static_cast<Eigen::Index>(test.n_trajectories()) ||
      test_to_medoids.cols() != static_cast<Eigen::Index>(dict.k))
    throw ConfigError("evaluate: test_to_medoids must be n_trajectories x K");

  EvaluationResult res;
  res.eta.reserve(static_cast<std::size_t>(test.n_columns()));
  res.assigned.reserve(test.n_trajectories());
  for (std::size_t t = 0; t < test.n_trajectories(); ++t) {
    const std::size_t c = assign(test_to_medoids.row(static_cast<Eigen::Index>(t)).transpose());
    res.assigned.push_back(c);
    std::vector<double> eta = detail::projection_errors(test.trajectory(t), dict.bases[c]);
    res.eta.insert(res.eta.end(), eta.begin(), eta.end());
  }
  res.stats = summarize(res.eta);
  return res;
}

/// Per-column gains eta_global / eta_local under a perfect classifier.
/// Local errors below the floor are clamped to it and counted.
struct GainSamples {
  std::vector<double> gains;  // per test column
  std::size_t floored = 0;
  SummaryStats stats;
};

inline constexpr double kGainFloor = 1e-15;

inline GainSamples gain_samples(const SnapshotSet& test, const RomDictionary& dict,
                                const ReducedBasis& global_basis, const Eigen::MatrixXd& test_to_medoids) {
  test.validate();
  if (dict.bases.empty()) throw ConfigError("gain: dictionary has no bases");
  detail::check_same_weights(test.weights, global_basis.weights, "gain");
  for (const ReducedBasis& b : dict.bases)
    if (b.n_modes() != global_basis.n_modes())
      throw ConfigError("gain: dictionary and global bases have different mode counts");

  EvaluationResult local = evaluate_errors(test, dict, test_to_medoids);
  std::vector<double> global_eta;
  global_eta.reserve(local.eta.size());
  for (std::size_t t = 0; t < test.n_trajectories(); ++t) {
    std::vector<double> eta = detail::projection_errors(test.trajectory(t), global_basis);
    global_eta.insert(global_eta.end(), eta.begin(), eta.end());
  }

  GainSamples g;
  g.gains.resize(local.eta.size());
  for (std::size_t i = 0; i < local.eta.size(); ++i) {
    double denom = local.eta[i];
    if (denom < kGainFloor) {
      denom = kGainFloor;
      ++g.floored;
    }
    g.gains[i] = global_eta[i] / denom;
  }
  g.stats = summarize(g.gains);
  return g;
}

/// Quadratic classification-accuracy model p(K) = a K^2 + b K + c through
/// (1, p1), (K_mid, p_mid) and (K_max, 1/K_max), decreasing on [1, K_max].
struct AccuracyModel {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double k_max = 0.0;

  double operator()(double k) const { return (a * k + b) * k + c; }
};

inline AccuracyModel fit_accuracy_model(double p1, double k_mid, double p_mid, double k_max) {
  if (!(k_mid > 1.0 && k_max > k_mid)) throw ConfigError("accuracy model: need 1 < K_mid < K_max");
  // Lagrange form of the interpolating quadratic through the three anchors.
  const double x0 = 1.0, x1 = k_mid, x2 = k_max;
  const double y0 = p1, y1 = p_mid, y2 = 1.0 / k_max;
  const double l0 = y0 / ((x0 - x1) * (x0 - x2));
  const double l1 = y1 / ((x1 - x0) * (x1 - x2));
  const double l2 = y2 / ((x2 - x0) * (x2 - x1));
  AccuracyModel m;
  m.a = l0 + l1 + l2;
  m.b = -(l0 * (x1 + x2) + l1 * (x0 + x2) + l2 * (x0 + x1));
  m.c = l0 * x1 * x2 + l1 * x0 * x2 + l2 * x0 * x1;
  m.k_max = k_max;
  if (std::abs(m(1.0) - p1) > 1e-12 || std::abs(m(k_max) - 1.0 / k_max) > 1e-12)
    throw NumericalError("accuracy model: interpolation failed to reproduce its anchors");
  // p' is monotone for a quadratic; checking the endpoints covers [1, K_max].
  if (2.0 * m.a * 1.0 + m.b > 0.0 || 2.0 * m.a * k_max + m.b > 0.0)
    throw ConfigError("accuracy model: fitted p(K) is not decreasing on [1, K_max]");
  return m;
}

/// Gain a dictionary must reach on correctly classified points so that the
/// expected gain under classification accuracy p still meets g_r_star, given
/// the expected gain E on misclassified points.
inline double perfect_profit_threshold(double g_r_star, double p, double expected_wrong_gain) {
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("profit threshold: p must lie in (0, 1]");
  return (g_r_star - (1.0 - p) * expected_wrong_gain) / p;
}

/// One grid cell of the hyperparameter search.
struct HyperparameterCell {
  std::size_t k = 0;
  Eigen::Index n = 0;
  std::size_t n_s = 0;
  double mean_eta = std::numeric_limits<double>::quiet_NaN();
  double median_eta = std::numeric_limits<double>::quiet_NaN();
  double mean_gain = std::numeric_limits<double>::quiet_NaN();
  double gain_cv = std::numeric_limits<double>::quiet_NaN();
  double p_k = std::numeric_limits<double>::quiet_NaN();
  double threshold = std::numeric_limits<double>::quiet_NaN();
  std::size_t floored_gains = 0;
  bool r1 = false;  // K * n_s within the snapshot budget
  bool r2 = false;  // N within the speed-up bound floor(n_dof^(1/3))
  bool r3 = false;  // mean eta within eta_star
  bool r4 = false;  // mean perfect gain at least the profit threshold
  bool feasible = true;
  std::string note;

  bool admissible() const { return feasible && r1 && r2 && r3 && r4; }
};

struct Recommendation {
  std::size_t k = 0;
  Eigen::Index n = 0;
  std::size_t n_s = 0;
};

struct HyperparameterReport {
  std::vector<HyperparameterCell> cells;
  std::size_t budget = 0;
  double eta_star = 0.0;
  double g_r_star = 0.0;
  double expected_wrong_gain = 0.0;
  std::size_t n_limit = 0;  // floor(n_dof^(1/3))
  std::optional<Recommendation> recommendation;
};

struct AdmissibleSearchConfig {
  std::vector<std::size_t> k_values;
  std::vector<Eigen::Index> n_values;
  std::optional<std::size_t> n_s_override;  // default: n_s = N
  std::size_t budget = 20;
  double eta_star = 0.35;
  double g_r_star = 2.0;
  double expected_wrong_gain = 0.75;
  std::size_t restarts = 10;
  std::uint64_t seed = 0;
};

/// Smallest admissible N, then the K with the lowest mean error among that
/// N's admissible cells.
inline std::optional<Recommendation> recommend(const std::vector<HyperparameterCell>& cells) {
  std::optional<Recommendation> best;
  double best_eta = std::numeric_limits<double>::infinity();
  for (const HyperparameterCell& cell : cells) {
    if (!cell.admissible()) continue;
    if (!best || cell.n < best->n || (cell.n == best->n && cell.mean_eta < best_eta)) {
      best = Recommendation{cell.k, cell.n, cell.n_s};
      best_eta = cell.mean_eta;
    }
  }
  return best;
}

/// Grid search over (K, N): per K one clustering of the training set, per
/// cell a two-stage selection, dictionary, matched global ROM and the error
/// and perfect-gain statistics with the four requirement flags.
/// d_test_to_train holds test-trajectory x train-trajectory dissimilarities
/// under the same measure as d_train.
inline HyperparameterReport admissible_set(const SnapshotSet& train, const SnapshotSet& test,
                                           const DissimilarityMatrix& d_train,
                                           const Eigen::MatrixXd& d_test_to_train,
                                           const AdmissibleSearchConfig& cfg, const AccuracyModel& model) {
  if (cfg.k_values.empty() || cfg.n_values.empty()) throw ConfigError("admissible_set: empty grid");
  if (d_test_to_train.rows() != static_cast<Eigen::Index>(test.n_trajectories()) ||
      d_test_to_train.cols() != static_cast<Eigen::Index>(train.n_trajectories()))
    throw ConfigError("admissible_set: d_test_to_train must be m_test x m_train");

  HyperparameterReport report;
  report.budget = cfg.budget;
  report.eta_star = cfg.eta_star;
  report.g_r_star = cfg.g_r_star;
  report.expected_wrong_gain = cfg.expected_wrong_gain;
  report.n_limit = floor_cbrt(static_cast<std::size_t>(train.n_dof()));

  for (std::size_t k : cfg.k_values) {
    Clustering clustering = pam(d_train, k, cfg.restarts, derive_seed(cfg.seed, k));
    Eigen::MatrixXd to_medoids(d_test_to_train.rows(), static_cast<Eigen::Index>(k));
    for (std::size_t c = 0; c < k; ++c)
      to_medoids.col(static_cast<Eigen::Index>(c)) =
          d_test_to_train.col(static_cast<Eigen::Index>(clustering.medoids[c]));

    for (Eigen::Index n : cfg.n_values) {
      HyperparameterCell cell;
      cell.k = k;
      cell.n = n;
      cell.n_s = cfg.n_s_override.value_or(static_cast<std::size_t>(n));
      cell.p_k = model(static_cast<double>(k));
      cell.threshold = perfect_profit_threshold(cfg.g_r_star, cell.p_k, cfg.expected_wrong_gain);
      cell.r1 = k * cell.n_s <= cfg.budget;
      cell.r2 = static_cast<std::size_t>(n) <= report.n_limit;
      try {
        std::vector<std::vector<std::size_t>> selection = select_snapshots(d_train, clustering, cell.n_s);
        RomDictionary dict = build_dictionary(train, clustering, selection, Truncation::fixed(n));
        ReducedBasis global = build_global_rom(train, flatten_selection(selection), Truncation::fixed(n));
        EvaluationResult errors = evaluate_errors(test, dict, to_medoids);
        GainSamples gains = gain_samples(test, dict, global, to_medoids);
        cell.mean_eta = errors.stats.mean;
        cell.median_eta = errors.stats.median;
        cell.mean_gain = gains.stats.mean;
        cell.floored_gains = gains.floored;
        double var = 0.0;
        for (double g : gains.gains) var += (g - gains.stats.mean) * (g - gains.stats.mean);
        var /= static_cast<double>(gains.gains.size());
        cell.gain_cv = gains.stats.mean > 0.0 ? std::sqrt(var) / gains.stats.mean
                                              : std::numeric_limits<double>::quiet_NaN();
        cell.r3 = cell.mean_eta <= cfg.eta_star;
        cell.r4 = cell.mean_gain >= cell.threshold;
      } catch (const std::exception& e) {
        cell.feasible = false;
        cell.note = e.what();
      }
      report.cells.push_back(std::move(cell));
    }
  }
  report.recommendation = recommend(report.cells);
  return report;
}

/// One of the six strategies of the comparison study.
struct StrategyResult {
  std::string name;
  Measure measure = Measure::sine;
  std::vector<double> eta;  // per test column
  SummaryStats stats;
};

struct CompareReport {
  std::vector<StrategyResult> strategies;
  // Dictionary-under-sine by-products feeding the correlation report:
  std::vector<double> eta_dict_sine;                   // per test column
  std::map<std::string, std::vector<double>> nearest;  // measure -> per-column nearest selected snapshot
};

/// Global ROM i: POD over the medoids of a (K*N)-cluster PAM run under
/// measure i. ROM dictionary i: K clusters under measure i, two-stage
/// selection of n_s snapshots per cluster, local PODs, nearest-medoid
/// routing under measure i. Measures: 1 = parameter, 2 = solution, 3 = sine.
inline CompareReport compare_strategies(const SnapshotSet& train, const SnapshotSet& test, std::size_t k,
                                        Eigen::Index n, std::size_t n_s, std::size_t restarts,
                                        std::uint64_t seed) {
  train.validate();
  test.validate();
  const MeasureSpec specs[3] = {{Measure::euclid_parameter, 1}, {Measure::euclid_solution, 1}, {Measure::sine, 1}};
  ParameterStandardizer standardizer = ParameterStandardizer::fit(train.params);

  CompareReport report;
  for (int i = 0; i < 3; ++i) {
    const MeasureSpec& spec = specs[i];
    const std::string tag = std::to_string(i + 1);
    DissimilarityMatrix d = dissimilarity_matrix(train, spec, &standardizer);
    Eigen::MatrixXd cross = cross_dissimilarity(test, train, spec, &standardizer);

    Clustering flat = pam(d, k * static_cast<std::size_t>(n), restarts, derive_seed(seed, 10 + i));
    ReducedBasis global = build_global_rom(train, flat.medoids, Truncation::fixed(n));
    StrategyResult gres;
    gres.name = "global_rom_" + tag;
    gres.measure = spec.kind;
    for (std::size_t t = 0; t < test.n_trajectories(); ++t) {
      std::vector<double> eta = detail::projection_errors(test.trajectory(t), global);
      gres.eta.insert(gres.eta.end(), eta.begin(), eta.end());
    }
    gres.stats = summarize(gres.eta);
    report.strategies.push_back(std::move(gres));

    Clustering clustering = pam(d, k, restarts, derive_seed(seed, 20 + i));
    std::vector<std::vector<std::size_t>> selection = select_snapshots(d, clustering, n_s);
    RomDictionary dict = build_dictionary(train, clustering, selection, Truncation::fixed(n));
    Eigen::MatrixXd to_medoids(cross.rows(), static_cast<Eigen::Index>(k));
    for (std::size_t c = 0; c < k; ++c)
      to_medoids.col(static_cast<Eigen::Index>(c)) =
          cross.col(static_cast<Eigen::Index>(clustering.medoids[c]));
    EvaluationResult eval = evaluate_errors(test, dict, to_medoids);
    StrategyResult dres;
    dres.name = "rom_dictionary_" + tag;
    dres.measure = spec.kind;
    dres.eta = eval.eta;
    dres.stats = eval.stats;
    report.strategies.push_back(std::move(dres));

    if (spec.kind == Measure::sine) report.eta_dict_sine = eval.eta;

    // Distance from each test point to its closest snapshot among the sine
    // dictionary's selected ones is filled in afterwards; here we stash the
    // cross matrices' nearest distances keyed by measure, using the sine
    // dictionary's selection computed in the i == 2 pass.
    if (i == 2) {
      std::vector<std::size_t> selected = flatten_selection(selection);
      for (int m = 0; m < 3; ++m) {
        Eigen::MatrixXd cross_m =
            (m == i) ? cross : cross_dissimilarity(test, train, specs[m], &standardizer);
        std::vector<double> nearest;
        nearest.reserve(static_cast<std::size_t>(test.n_columns()));
        for (std::size_t t = 0; t < test.n_trajectories(); ++t) {
          double least = std::numeric_limits<double>::infinity();
          for (std::size_t s : selected)
            least = std::min(least, cross_m(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(s)));
          for (std::size_t ccol = 0; ccol < test.trajectories[t].size(); ++ccol) nearest.push_back(least);
        }
        report.nearest[measure_name(specs[m].kind)] = std::move(nearest);
      }
    }
  }
  return report;
}

inline std::vector<double> average_ranks(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

inline double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y, bool* valid = nullptr) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("correlation: samples must align and have size >= 2");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    if (valid) *valid = false;
    return std::numeric_limits<double>::quiet_NaN();
  }
  if (valid) *valid = true;
  return std::min(1.0, std::max(-1.0, sxy / std::sqrt(sxx * syy)));
}

inline double spearman_correlation(const std::vector<double>& x, const std::vector<double>& y,
                                   bool* valid = nullptr) {
  return pearson_correlation(average_ranks(x), average_ranks(y), valid);
}

struct CorrelationEntry {
  std::string measure;
  double pearson = std::numeric_limits<double>::quiet_NaN();
  double spearman = std::numeric_limits<double>::quiet_NaN();
  bool valid = true;
  std::string warning;
};

struct CorrelationReport {
  std::vector<CorrelationEntry> entries;
};

/// Pearson and Spearman coefficients between the per-sample projection
/// errors and, per measure, the dissimilarity to the closest snapshot used
/// for basis construction. Degenerate (zero-variance) inputs are flagged
/// rather than reported as numbers.
inline CorrelationReport correlation_report(const std::vector<double>& eta,
                                            const std::map<std::string, std::vector<double>>& nearest) {
  if (nearest.empty()) throw ConfigError("correlation report: no dissimilarity samples");
  CorrelationReport report;
  for (const auto& [measure, dissims] : nearest) {
    if (dissims.size() != eta.size())
      throw ConfigError("correlation report: sample sizes disagree for measure '" + measure + "'");
    CorrelationEntry entry;
    entry.measure = measure;
    bool pv = true, sv = true;
    entry.pearson = pearson_correlation(dissims, eta, &pv);
    entry.spearman = spearman_correlation(dissims, eta, &sv);
    entry.valid = pv && sv;
    if (!entry.valid) entry.warning = "zero variance sample; correlation undefined";
    report.entries.push_back(std::move(entry));
  }
  return report;
}

/// Classical (Torgerson) multidimensional scaling of a dissimilarity
/// matrix: double-center -D.^2/2, keep the top eigenpairs with positive
/// eigenvalues, scale eigenvectors by sqrt(eigenvalue). Axes are oriented
/// so their first nonzero coordinate is positive.
struct MdsResult {
  Eigen::MatrixXd coordinates;  // m x dim_used
  Eigen::VectorXd eigenvalues;  // all m, non-increasing, clamped at zero
  Eigen::Index dim_used = 0;
  std::vector<std::string> warnings;
};

inline MdsResult classical_mds(const DissimilarityMatrix& dm, Eigen::Index dim) {
  detail::check_square(dm.d);
  if (dim < 1) throw ConfigError("mds: dim must be >= 1");
  const Eigen::Index m = dm.d.rows();
  Eigen::MatrixXd b = -0.5 * dm.d.cwiseProduct(dm.d);
  Eigen::VectorXd row_mean = b.rowwise().mean();
  const double total_mean = row_mean.mean();
  b.colwise() -= row_mean;
  b.rowwise() -= row_mean.transpose();
  b.array() += total_mean;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
  if (eig.info() != Eigen::Success) throw NumericalError("mds: eigendecomposition failed");
  Eigen::VectorXd values = eig.eigenvalues().reverse();
  Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();

  MdsResult res;
  const double scale = std::max(std::abs(values[0]), std::abs(values[m - 1]));
  Eigen::Index positive = 0;
  while (positive < m && values[positive] > 1e-12 * scale) ++positive;
  res.dim_used = std::min(dim, positive);
  if (res.dim_used < dim)
    res.warnings.push_back("only " + std::to_string(res.dim_used) +
                           " positive eigenvalues; returning that many coordinates");
  res.eigenvalues = values.cwiseMax(0.0);
  res.coordinates.resize(m, res.dim_used);
  for (Eigen::Index k = 0; k < res.dim_used; ++k) {
    Eigen::VectorXd axis = vectors.col(k) * std::sqrt(values[k]);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (axis[i] != 0.0) {
        if (axis[i] < 0.0) axis = -axis;
        break;
      }
    }
    res.coordinates.col(k) = axis;
  }
  return res;
}

/// Per-cluster POD basis sizes at the given energy tolerance, from the
/// singular spectra of the clusters' snapshot columns.
inline std::vector<Eigen::Index> local_basis_sizes(const SnapshotSet& set, const Clustering& clustering,
                                                   double tol) {
  std::vector<Eigen::Index> sizes(clustering.k(), 0);
  for (std::size_t c = 0; c < clustering.k(); ++c) {
    std::vector<std::size_t> members;
    for (std::size_t t = 0; t < clustering.labels.size(); ++t)
      if (clustering.labels[t] == c) members.push_back(t);
    if (members.empty()) continue;
    Eigen::MatrixXd cols = detail::gather_columns(set, members);
    Eigen::VectorXd sv = pod_spectrum(cols, set.weights);
    sizes[c] = truncation_rank_for_tolerance(sv, tol);
  }
  return sizes;
}

}  // namespace robdict
