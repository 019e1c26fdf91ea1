#pragma once

#include <cstdint>
#include <vector>

#include "gcr/knn_graph.hpp"
#include "gcr/types.hpp"

namespace gcr {

enum class PropagationVariant : std::uint8_t { Asymmetric, Symmetric, Local };

struct PropagationPlan {
  PropagationVariant variant = PropagationVariant::Symmetric;
  int iters = 3;
  bool recompute_graph = true;
  bool renormalize = true;
};

PropagationPlan plan_from_params(const Params& p);

// Wall-clock breakdown filled in by the run_* drivers. Graph construction is
// reported separately from propagation because it dominates the cost.
struct StageTimings {
  double graph_ms = 0.0;
  double propagate_ms = 0.0;
  double profile_ms = 0.0;
};

namespace detail {
// One propagation step in double precision:
//   out_i = sum_{j in N_i + {i}} A_ij / sqrt(d_row(i) * d_col(j)) * x_j
// computed against a frozen snapshot of fs, rows in parallel, per-row sums in
// fixed order (diagonal first, then ascending neighbor index).
std::vector<double> propagate_f64(const FeatureSet& fs, const NeighborGraph& g,
                                  int workers);
}  // namespace detail

// Single feature-propagation step; metadata unchanged.
FeatureSet propagate_once(const FeatureSet& fs, const NeighborGraph& g,
                          int workers = 0);

// T iterations of {build graph -> optional symmetrize -> propagate ->
// optional renormalize}. With recompute_graph=false the iteration-1 graph is
// reused for every subsequent iteration.
FeatureSet run_global(const FeatureSet& fs, const Params& p, int workers = 0,
                      StageTimings* timings = nullptr);

// Iterates propagate/renormalize against a fixed, precomputed graph.
FeatureSet run_with_fixed_graph(const FeatureSet& fs, const NeighborGraph& g,
                                const Params& p, int workers = 0,
                                StageTimings* timings = nullptr);

// Decentralized local propagation: each sample's k-NN set is augmented with
// the sample itself, a dense local similarity matrix is built over that set,
// and T normalized propagation steps run locally; the output for sample i is
// its own row after the last step. Neighbor sets come from the original
// features and are frozen across iterations. Embarrassingly parallel.
FeatureSet run_local(const FeatureSet& fs, const Params& p, int workers = 0,
                     StageTimings* timings = nullptr);

}  // namespace gcr
