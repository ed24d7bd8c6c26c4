#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "robdict/common.hpp"
#include "robdict/dissimilarity.hpp"

namespace robdict {

/// Medoid-based partition of the points behind a dissimilarity matrix.
/// cost is the sum of squared dissimilarities to the assigned medoids.
struct Clustering {
  std::vector<std::size_t> labels;   // per point, cluster index
  std::vector<std::size_t> medoids;  // K distinct point indices, ascending
  double cost = 0.0;
  std::size_t restarts_used = 0;
  std::uint64_t seed = 0;

  std::size_t k() const { return medoids.size(); }
};

enum class PamInit { random, build, exhaustive };

namespace detail {

// Numerical slack below which a swap no longer counts as an improvement.
inline constexpr double kSwapImprovementTol = 1e-12;

struct NearestPair {
  std::vector<std::size_t> n1;  // medoid-list position of the nearest medoid
  std::vector<double> d1;       // squared dissimilarity to it
  std::vector<double> d2;       // squared dissimilarity to the second nearest
};

inline NearestPair nearest_pair(const Eigen::MatrixXd& d2mat, const std::vector<std::size_t>& medoids) {
  const auto m = static_cast<std::size_t>(d2mat.rows());
  NearestPair np;
  np.n1.assign(m, 0);
  np.d1.assign(m, std::numeric_limits<double>::infinity());
  np.d2.assign(m, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < medoids.size(); ++k) {
      const double d = d2mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(medoids[k]));
      if (d < np.d1[i]) {
        np.d2[i] = np.d1[i];
        np.d1[i] = d;
        np.n1[i] = k;
      } else if (d < np.d2[i]) {
        np.d2[i] = d;
      }
    }
  }
  return np;
}

inline double assignment_cost(const NearestPair& np) {
  double cost = 0.0;
  for (double d : np.d1) cost += d;
  return cost;
}

struct SwapCandidate {
  double delta = 0.0;
  std::size_t medoid_pos = 0;
  std::size_t point = 0;
};

// Best single swap (steepest descent). For each non-medoid j one pass over
// the points yields the cost change of replacing any medoid position h.
// Ties resolve to the lowest (h, j).
inline std::optional<SwapCandidate> best_swap(const Eigen::MatrixXd& d2mat,
                                              const std::vector<std::size_t>& medoids, const NearestPair& np,
                                              std::vector<char>& is_medoid, std::vector<double>& adj) {
  const auto m = static_cast<std::size_t>(d2mat.rows());
  const std::size_t k = medoids.size();
  std::optional<SwapCandidate> best;
  for (std::size_t j = 0; j < m; ++j) {
    if (is_medoid[j]) continue;
    double common = 0.0;
    std::fill(adj.begin(), adj.end(), 0.0);
    const double* col = d2mat.col(static_cast<Eigen::Index>(j)).data();
    for (std::size_t i = 0; i < m; ++i) {
      const double d = col[i];
      const double base = std::min(d - np.d1[i], 0.0);
      common += base;
      adj[np.n1[i]] += std::min(d, np.d2[i]) - np.d1[i] - base;
    }
    for (std::size_t h = 0; h < k; ++h) {
      const double delta = common + adj[h];
      if (delta < -kSwapImprovementTol &&
          (!best || delta < best->delta ||
           (delta == best->delta && (h < best->medoid_pos || (h == best->medoid_pos && j < best->point))))) {
        best = SwapCandidate{delta, h, j};
      }
    }
  }
  return best;
}

struct DescentResult {
  std::vector<std::size_t> medoids;
  double cost = 0.0;
  std::vector<double> cost_trace;  // cost after init and after each accepted swap
};

inline DescentResult swap_descent(const Eigen::MatrixXd& d2mat, std::vector<std::size_t> medoids) {
  const auto m = static_cast<std::size_t>(d2mat.rows());
  std::vector<char> is_medoid(m, 0);
  for (std::size_t idx : medoids) is_medoid[idx] = 1;
  std::vector<double> adj(medoids.size(), 0.0);
  NearestPair np = nearest_pair(d2mat, medoids);
  DescentResult res;
  res.cost_trace.push_back(assignment_cost(np));
  while (true) {
    std::optional<SwapCandidate> swap = best_swap(d2mat, medoids, np, is_medoid, adj);
    if (!swap) break;
    is_medoid[medoids[swap->medoid_pos]] = 0;
    is_medoid[swap->point] = 1;
    medoids[swap->medoid_pos] = swap->point;
    np = nearest_pair(d2mat, medoids);
    res.cost_trace.push_back(assignment_cost(np));
  }
  res.medoids = std::move(medoids);
  res.cost = res.cost_trace.back();
  return res;
}

inline std::vector<std::size_t> distinct_uniform_indices(std::size_t m, std::size_t k, std::mt19937_64& rng) {
  std::vector<std::size_t> pool(m);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, m - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  return pool;
}

// Greedy BUILD initialization: repeatedly add the point that lowers the
// squared assignment cost the most (ties to the lowest index).
inline std::vector<std::size_t> build_init(const Eigen::MatrixXd& d2mat, std::size_t k) {
  const auto m = static_cast<std::size_t>(d2mat.rows());
  std::vector<std::size_t> medoids;
  std::vector<double> d1(m, std::numeric_limits<double>::infinity());
  std::vector<char> chosen(m, 0);
  for (std::size_t round = 0; round < k; ++round) {
    std::size_t best_j = m;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      if (chosen[j]) continue;
      double cost = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        cost += std::min(d1[i], d2mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      if (cost < best_cost) {
        best_cost = cost;
        best_j = j;
      }
    }
    chosen[best_j] = 1;
    medoids.push_back(best_j);
    for (std::size_t i = 0; i < m; ++i)
      d1[i] = std::min(d1[i], d2mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(best_j)));
  }
  return medoids;
}

inline double binomial_guarded(std::size_t m, std::size_t k, double cap) {
  double c = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    c *= static_cast<double>(m - i) / static_cast<double>(i + 1);
    if (c > cap) return cap + 1.0;
  }
  return c;
}

template <typename Visit>
inline void for_each_combination(std::size_t m, std::size_t k, Visit&& visit) {
  std::vector<std::size_t> comb(k);
  std::iota(comb.begin(), comb.end(), std::size_t{0});
  while (true) {
    visit(const_cast<const std::vector<std::size_t>&>(comb));
    std::size_t i = k;
    while (i > 0 && comb[i - 1] == m - k + i - 1) --i;
    if (i == 0) break;
    ++comb[i - 1];
    for (std::size_t j = i; j < k; ++j) comb[j] = comb[j - 1] + 1;
  }
}

inline void check_square(const Eigen::MatrixXd& d) {
  if (d.rows() == 0 || d.rows() != d.cols())
    throw ConfigError("clustering: dissimilarity matrix must be square and nonempty");
}

}  // namespace detail

/// Nearest-medoid labels; ties break to the lowest cluster index.
inline std::vector<std::size_t> assign_labels(const Eigen::MatrixXd& d, const std::vector<std::size_t>& medoids) {
  detail::check_square(d);
  if (medoids.empty()) throw ConfigError("assign: medoid list is empty");
  std::vector<std::size_t> labels(static_cast<std::size_t>(d.rows()), 0);
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < medoids.size(); ++k) {
      const double v = d(i, static_cast<Eigen::Index>(medoids[k]));
      if (std::isnan(v)) throw NumericalError("assign: dissimilarity to medoid " + std::to_string(k) + " is NaN");
      if (v < best_d) {
        best_d = v;
        best = k;
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
  }
  return labels;
}

/// Nearest-medoid choice from one row of dissimilarities to the K medoids.
inline std::size_t assign(const Eigen::VectorXd& dissims_to_medoids) {
  if (dissims_to_medoids.size() == 0) throw ConfigError("assign: empty dissimilarity row");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < dissims_to_medoids.size(); ++k) {
    const double v = dissims_to_medoids[k];
    if (std::isnan(v)) throw NumericalError("assign: dissimilarity to medoid " + std::to_string(k) + " is NaN");
    if (v < best_d) {
      best_d = v;
      best = static_cast<std::size_t>(k);
    }
  }
  return best;
}

/// PAM k-medoids under the squared-dissimilarity objective
/// sum_i min_k d(i, medoid_k)^2. Each restart draws distinct uniform initial
/// medoids from its own seed stream and runs steepest-descent swaps until no
/// swap improves the cost by more than 1e-12. The best restart wins; cost
/// ties keep the earlier stream. Deterministic given (d, k, restarts, seed).
inline Clustering pam(const DissimilarityMatrix& d, std::size_t k, std::size_t restarts = 10,
                      std::uint64_t seed = 0, PamInit init = PamInit::random) {
  detail::check_square(d.d);
  const auto m = static_cast<std::size_t>(d.d.rows());
  if (k < 1 || k > m) throw ConfigError("pam: K = " + std::to_string(k) + " is not in [1, " + std::to_string(m) + "]");
  Eigen::MatrixXd d2mat = d.d.cwiseProduct(d.d);

  Clustering out;
  out.seed = seed;

  if (k == 1) {
    // Degenerate sub-case: the optimum is the point with the least total
    // squared dissimilarity. Sequential sums keep the cost bitwise equal to
    // the exhaustive search's accumulation order.
    Eigen::VectorXd totals = Eigen::VectorXd::Zero(d2mat.cols());
    for (Eigen::Index j = 0; j < d2mat.cols(); ++j)
      for (Eigen::Index i = 0; i < d2mat.rows(); ++i) totals[j] += d2mat(i, j);
    Eigen::Index best = 0;
    totals.minCoeff(&best);
    out.medoids = {static_cast<std::size_t>(best)};
    out.labels.assign(m, 0);
    out.cost = totals[best];
    out.restarts_used = 1;
    return out;
  }

  std::optional<detail::DescentResult> best;
  auto consider = [&](std::vector<std::size_t> init_medoids) {
    detail::DescentResult res = detail::swap_descent(d2mat, std::move(init_medoids));
    if (!best || res.cost < best->cost) best = std::move(res);
  };

  switch (init) {
    case PamInit::random: {
      if (restarts < 1) throw ConfigError("pam: restarts must be >= 1");
      for (std::size_t r = 0; r < restarts; ++r) {
        std::mt19937_64 rng = make_rng(seed, r);
        consider(detail::distinct_uniform_indices(m, k, rng));
      }
      out.restarts_used = restarts;
      break;
    }
    case PamInit::build: {
      consider(detail::build_init(d2mat, k));
      out.restarts_used = 1;
      break;
    }
    case PamInit::exhaustive: {
      if (detail::binomial_guarded(m, k, 1e6) > 1e6)
        throw ConfigError("pam: exhaustive initialization needs C(m, K) <= 1e6");
      std::size_t count = 0;
      detail::for_each_combination(m, k, [&](const std::vector<std::size_t>& comb) {
        consider(comb);
        ++count;
      });
      out.restarts_used = count;
      break;
    }
  }

  out.medoids = std::move(best->medoids);
  std::sort(out.medoids.begin(), out.medoids.end());
  out.labels = assign_labels(d.d, out.medoids);
  out.cost = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    out.cost += d2mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(out.medoids[out.labels[i]]));
  return out;
}

/// Exact k-medoids by enumerating every K-subset in lexicographic order.
/// Refuses instances with more than 1e6 subsets.
inline Clustering brute_force_kmedoids(const DissimilarityMatrix& d, std::size_t k) {
  detail::check_square(d.d);
  const auto m = static_cast<std::size_t>(d.d.rows());
  if (k < 1 || k > m) throw ConfigError("k-medoids: K out of range");
  if (detail::binomial_guarded(m, k, 1e6) > 1e6)
    throw ConfigError("brute_force_kmedoids: C(" + std::to_string(m) + ", " + std::to_string(k) +
                      ") exceeds 1e6 subsets");
  Eigen::MatrixXd d2mat = d.d.cwiseProduct(d.d);
  std::vector<std::size_t> best_subset;
  double best_cost = std::numeric_limits<double>::infinity();
  detail::for_each_combination(m, k, [&](const std::vector<std::size_t>& comb) {
    double cost = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double least = std::numeric_limits<double>::infinity();
      for (std::size_t j : comb)
        least = std::min(least, d2mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      cost += least;
    }
    if (cost < best_cost) {
      best_cost = cost;
      best_subset = comb;
    }
  });
  Clustering out;
  out.medoids = std::move(best_subset);
  out.labels = assign_labels(d.d, out.medoids);
  out.cost = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    out.cost += d2mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(out.medoids[out.labels[i]]));
  out.restarts_used = 0;
  out.seed = 0;
  return out;
}

/// True when no single (medoid, non-medoid) exchange lowers the squared
/// cost by more than tol. Post-hoc audit of swap optimality.
inline bool swap_optimal(const DissimilarityMatrix& d, const Clustering& c,
                         double tol = detail::kSwapImprovementTol) {
  Eigen::MatrixXd d2mat = d.d.cwiseProduct(d.d);
  const auto m = static_cast<std::size_t>(d2mat.rows());
  std::vector<char> is_medoid(m, 0);
  for (std::size_t idx : c.medoids) is_medoid[idx] = 1;
  std::vector<double> adj(c.medoids.size(), 0.0);
  detail::NearestPair np = detail::nearest_pair(d2mat, c.medoids);
  for (std::size_t j = 0; j < m; ++j) {
    if (is_medoid[j]) continue;
    double common = 0.0;
    std::fill(adj.begin(), adj.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double dv = d2mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const double base = std::min(dv - np.d1[i], 0.0);
      common += base;
      adj[np.n1[i]] += std::min(dv, np.d2[i]) - np.d1[i] - base;
    }
    for (std::size_t h = 0; h < c.medoids.size(); ++h)
      if (common + adj[h] < -tol) return false;
  }
  return true;
}

namespace detail {

// Deterministic seed stream for the sub-clusterings of two-stage selection.
inline constexpr std::uint64_t kSelectionStreamBase = 1000;
inline constexpr std::size_t kSelectionRestarts = 10;

}  // namespace detail

/// Two-stage snapshot selection: per cluster, its medoid when n_s = 1,
/// otherwise the medoids of a PAM run with K = n_s restricted to the
/// cluster. Returns K groups of n_s distinct point indices.
inline std::vector<std::vector<std::size_t>> select_snapshots(const DissimilarityMatrix& d,
                                                              const Clustering& clustering, std::size_t n_s) {
  detail::check_square(d.d);
  if (n_s < 1) throw ConfigError("select_snapshots: n_s must be >= 1");
  const std::size_t k = clustering.k();
  std::vector<std::vector<std::size_t>> groups(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < clustering.labels.size(); ++i)
      if (clustering.labels[i] == c) members.push_back(i);
    if (members.size() < n_s)
      throw ConfigError("select_snapshots: cluster " + std::to_string(c) + " has " +
                        std::to_string(members.size()) + " members, fewer than n_s = " + std::to_string(n_s));
    if (n_s == 1) {
      groups[c] = {clustering.medoids[c]};
      continue;
    }
    const auto sub_m = static_cast<Eigen::Index>(members.size());
    DissimilarityMatrix sub;
    sub.measure = d.measure;
    sub.d.resize(sub_m, sub_m);
    for (Eigen::Index a = 0; a < sub_m; ++a)
      for (Eigen::Index b = 0; b < sub_m; ++b)
        sub.d(a, b) = d.d(static_cast<Eigen::Index>(members[static_cast<std::size_t>(a)]),
                          static_cast<Eigen::Index>(members[static_cast<std::size_t>(b)]));
    // Sub-clusterings run on their own seed streams, derived per cluster.
    Clustering subc = pam(sub, n_s, detail::kSelectionRestarts,
                          derive_seed(clustering.seed, detail::kSelectionStreamBase + c), PamInit::random);
    for (std::size_t idx : subc.medoids) groups[c].push_back(members[idx]);
  }
  return groups;
}

inline std::vector<std::size_t> flatten_selection(const std::vector<std::vector<std::size_t>>& groups) {
  std::vector<std::size_t> flat;
  for (const auto& g : groups) flat.insert(flat.end(), g.begin(), g.end());
  return flat;
}

inline nlohmann::json clustering_to_json(const Clustering& c, const MeasureSpec& measure) {
  return {{"measure", measure_name(measure.kind)}, {"n", measure.n},     {"K", c.k()},
          {"seed", c.seed},                        {"restarts", c.restarts_used}, {"cost", c.cost},
          {"medoids", c.medoids},                  {"labels", c.labels}};
}

inline Clustering clustering_from_json(const nlohmann::json& j, MeasureSpec* measure_out = nullptr) {
  Clustering c;
  try {
    c.medoids = j.at("medoids").get<std::vector<std::size_t>>();
    c.labels = j.at("labels").get<std::vector<std::size_t>>();
    c.cost = j.at("cost").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.restarts_used = j.at("restarts").get<std::size_t>();
    if (measure_out) {
      measure_out->kind = parse_measure(j.at("measure").get<std::string>());
      measure_out->n = j.value("n", 1);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("clustering file: ") + e.what());
  }
  if (c.medoids.empty() || j.at("K").get<std::size_t>() != c.medoids.size())
    throw ConfigError("clustering file: medoid count does not match K");
  return c;
}

}  // namespace robdict
