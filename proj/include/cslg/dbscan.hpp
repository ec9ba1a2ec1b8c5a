#pragma once

#include <cmath>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cslg/core.hpp"
#include "cslg/percept_sim.hpp"

namespace cslg {

struct DbscanParams {
  double eps = 0.1;
  int min_samples = 2;
};

/// Cluster labels for one DBSCAN run. Core clusters are numbered 0..n_core_clusters-1
/// by their first core point in input order; each noise point then gets its own
/// id, counting up from n_core_clusters in input order.
struct ClusterAssignment {
  std::vector<int> labels;
  int n_core_clusters = 0;

  bool is_noise(std::size_t i) const { return labels[i] >= n_core_clusters; }
};

template <typename Scalar>
using Point = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

namespace detail {

template <typename Scalar>
std::vector<std::vector<std::size_t>> eps_neighborhoods(std::span<const Point<Scalar>> points,
                                                        Scalar eps) {
  const std::size_t n = points.size();
  const Scalar eps2 = eps * eps;
  std::vector<std::vector<std::size_t>> nbrs(n);
  for (std::size_t i = 0; i < n; ++i) {
    nbrs[i].push_back(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((points[i] - points[j]).squaredNorm() <= eps2) {
        nbrs[i].push_back(j);
        nbrs[j].push_back(i);
      }
    }
  }
  return nbrs;
}

}  // namespace detail

/// Density-based clustering, Euclidean metric. A point is core when at least
/// `min_samples` points (itself included) lie within `eps`. Border points reachable
/// from several clusters join the lowest cluster id.
template <typename Scalar>
ClusterAssignment dbscan(std::span<const Point<Scalar>> points, const DbscanParams& params) {
  if (!(params.eps > 0.0)) throw ConfigError("dbscan: eps must be positive");
  if (params.min_samples < 1) throw ConfigError("dbscan: min_samples must be >= 1");

  ClusterAssignment out;
  const std::size_t n = points.size();
  if (n == 0) return out;
  for (const auto& p : points)
    if (p.size() != points[0].size())
      throw DimensionMismatch("dbscan: points have mixed dimensions (" +
                              std::to_string(points[0].size()) + " vs " +
                              std::to_string(p.size()) + ")");

  const auto nbrs = detail::eps_neighborhoods<Scalar>(points, static_cast<Scalar>(params.eps));
  auto is_core = [&](std::size_t i) {
    return nbrs[i].size() >= static_cast<std::size_t>(params.min_samples);
  };

  constexpr int kUnlabeled = -1;
  out.labels.assign(n, kUnlabeled);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.labels[i] != kUnlabeled || !is_core(i)) continue;
    const int id = next++;
    out.labels[i] = id;
    std::deque<std::size_t> frontier{i};
    while (!frontier.empty()) {
      const std::size_t p = frontier.front();
      frontier.pop_front();
      for (std::size_t q : nbrs[p]) {
        if (out.labels[q] != kUnlabeled) continue;
        out.labels[q] = id;
        if (is_core(q)) frontier.push_back(q);
      }
    }
  }
  out.n_core_clusters = next;
  for (auto& l : out.labels)
    if (l == kUnlabeled) l = next++;
  return out;
}

template <typename Scalar>
ClusterAssignment dbscan(const std::vector<Point<Scalar>>& points, const DbscanParams& params) {
  return dbscan<Scalar>(std::span<const Point<Scalar>>(points), params);
}

/// eps = 3 * noise_scale * sqrt(dim), min_samples = 2.
inline DbscanParams default_params(double noise_scale, int dim) {
  return {3.0 * noise_scale * std::sqrt(static_cast<double>(dim)), 2};
}

/// Per-modality parameters for the three percept modalities.
struct ClusteringParams {
  std::array<DbscanParams, 3> per_modality;

  const DbscanParams& operator[](Modality m) const { return per_modality.at(index_of(m)); }
  DbscanParams& operator[](Modality m) { return per_modality.at(index_of(m)); }
};

inline DbscanParams default_params(Modality m, const ScenarioConfig& cfg) {
  if (m == Modality::Auxiliary) throw Error("default_params: auxiliary modality has no percepts");
  return default_params(cfg.noise_scale, cfg.dim(m));
}

inline ClusteringParams default_clustering(const ScenarioConfig& cfg) {
  ClusteringParams p;
  for (Modality m : kPerceptModalities) p[m] = default_params(m, cfg);
  return p;
}

/// Reclusters the whole percept history of one modality; every historical
/// percept (the newest included) gets a symbol in the fresh snapshot.
inline std::vector<PerceptSymbol> recluster_all(Modality modality,
                                                std::span<const FeatureVector> history,
                                                const DbscanParams& params) {
  if (modality == Modality::Auxiliary)
    throw Error("recluster_all: auxiliary modality has no percepts");
  if (history.empty()) throw Error("recluster_all: empty history");
  const auto assignment = dbscan<double>(history, params);
  std::vector<PerceptSymbol> out;
  out.reserve(history.size());
  for (int l : assignment.labels) out.push_back({modality, l});
  return out;
}

}  // namespace cslg
