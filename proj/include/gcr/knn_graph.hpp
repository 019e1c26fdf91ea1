#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "gcr/types.hpp"

namespace gcr {

enum class GraphRestrict : std::uint8_t { All, CrossCameraOnly };

// Sparse realization of the k-NN similarity matrix. The diagonal entry is an
// implicit constant 1 and never appears in the neighbor lists; degree and
// propagation code account for it.
struct NeighborGraph {
  struct Edge {
    std::uint32_t dst;
    double weight;
    friend bool operator==(const Edge&, const Edge&) = default;
  };

  std::size_t n = 0;
  bool symmetric = false;
  // neighbors[i] sorted by ascending dst; dst != i; weights in (0, 1].
  std::vector<std::vector<Edge>> neighbors;

  std::size_t edge_count() const {
    std::size_t e = 0;
    for (const auto& nb : neighbors) e += nb.size();
    return e;
  }

  // Checks weight range, duplicate/self edges, and (for symmetric graphs)
  // mirror edges with weights equal within 1e-7. Throws ValidationError.
  void validate() const;

  friend bool operator==(const NeighborGraph&, const NeighborGraph&) = default;
};

using DegreeVector = std::vector<double>;

// Squared Euclidean distances from row i to every row, 64-bit accumulation.
// Entry i is exactly 0.
std::vector<double> pairwise_sq_dists(const FeatureSet& fs, std::size_t i);

// Indices of the min(k, n-1) smallest distances excluding `exclude`,
// ties broken by ascending index. Result ordered by (distance, index).
std::vector<std::uint32_t> knn_select(std::span<const double> dists, int k,
                                      std::size_t exclude);

// k-NN graph with weights exp(-dist^2/gamma). With CrossCameraOnly the
// candidate pool for node i is restricted to rows from other cameras; a node
// with no eligible candidate gets an empty list. Asymmetric output.
NeighborGraph build_graph(const FeatureSet& fs, const Params& p,
                          GraphRestrict restrict, int workers = 0);

// A = (A~ + A~^T) / 2, realized sparsely; a missing direction contributes 0.
NeighborGraph symmetrize(const NeighborGraph& g);

// row[i] = 1 + sum of out-weights, col[j] = 1 + sum of in-weights
// (the 1 is the implicit diagonal). For symmetric graphs row == col.
std::pair<DegreeVector, DegreeVector> degrees(const NeighborGraph& g);

// Graph cache: CSV `src,dst,weight` (9 significant digits) plus a JSON
// sidecar at <path>.json holding {n, k, gamma, restrict, symmetric}.
struct GraphCacheInfo {
  std::size_t n = 0;
  int k = 0;
  double gamma = 0.0;
  GraphRestrict restrict = GraphRestrict::All;
  bool symmetric = false;
};

void save_graph(const NeighborGraph& g, const GraphCacheInfo& info,
                const std::filesystem::path& path);
std::pair<NeighborGraph, GraphCacheInfo> load_graph(
    const std::filesystem::path& path);

}  // namespace gcr
