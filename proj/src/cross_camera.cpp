#include "gcr/cross_camera.hpp"

#include <chrono>
#include <string>

#include "gcr/feature_store.hpp"

namespace gcr {

namespace {
using Clock = std::chrono::steady_clock;
double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}
}  // namespace

FeatureSet propagate_fused(const FeatureSet& fs, const NeighborGraph& g_all,
                           const NeighborGraph& g_cr, double alpha,
                           int workers) {
  const FusionWeights w(alpha);
  if (g_all.n != fs.size() || g_cr.n != fs.size())
    throw GraphSizeMismatch("fused propagation: graph size != feature count");

  const std::vector<double> global_term = detail::propagate_f64(fs, g_all, workers);
  const std::vector<double> cross_term = detail::propagate_f64(fs, g_cr, workers);

  FeatureSet out(fs.size(), fs.dim());
  out.meta() = fs.meta();
  for (std::size_t i = 0; i < global_term.size(); ++i)
    out.data()[i] = static_cast<float>(w.alpha * global_term[i] +
                                       (1.0 - w.alpha) * cross_term[i]);
  return out;
}

FeatureSet run_cross_camera(const FeatureSet& fs, const Params& p, int workers,
                            StageTimings* timings) {
  p.validate();
  if (p.mode != Mode::CrossCamera)
    throw ValidationError("run_cross_camera requires mode CrossCamera");
  FeatureSet cur = fs;
  NeighborGraph g_all, g_cr;
  for (int t = 0; t < p.iters; ++t) {
    if (t == 0 || p.recompute_graph) {
      const auto start = Clock::now();
      g_all = build_graph(cur, p, GraphRestrict::All, workers);
      g_cr = build_graph(cur, p, GraphRestrict::CrossCameraOnly, workers);
      if (p.symmetrize) {
        g_all = symmetrize(g_all);
        g_cr = symmetrize(g_cr);
      }
      if (timings) timings->graph_ms += ms_since(start);
    }
    const auto start = Clock::now();
    cur = propagate_fused(cur, g_all, g_cr, p.alpha, workers);
    if (p.renormalize) cur = normalize_rows(cur);
    if (timings) timings->propagate_ms += ms_since(start);
  }
  return cur;
}

}  // namespace gcr
