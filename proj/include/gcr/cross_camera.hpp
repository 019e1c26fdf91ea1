#pragma once

#include "gcr/knn_graph.hpp"
#include "gcr/propagation.hpp"
#include "gcr/types.hpp"

namespace gcr {

struct FusionWeights {
  explicit FusionWeights(double a) : alpha(a) {
    if (alpha < 0.0 || alpha > 1.0)
      throw ValidationError("fusion alpha must be in [0,1]");
  }
  double alpha;
};

// out = alpha * propagate(fs, g_all) + (1 - alpha) * propagate(fs, g_cr),
// both terms computed from the same input snapshot and fused in double
// precision before the float32 cast.
FeatureSet propagate_fused(const FeatureSet& fs, const NeighborGraph& g_all,
                           const NeighborGraph& g_cr, double alpha,
                           int workers = 0);

// T iterations of {build global + cross-camera graphs from current features
// -> optional symmetrize both -> fused propagation -> optional renormalize}.
FeatureSet run_cross_camera(const FeatureSet& fs, const Params& p,
                            int workers = 0, StageTimings* timings = nullptr);

}  // namespace gcr
