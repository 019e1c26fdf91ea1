#include "gcr/propagation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "gcr/feature_store.hpp"
#include "gcr/parallel.hpp"

namespace gcr {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

FeatureSet from_f64(const FeatureSet& like, const std::vector<double>& values) {
  FeatureSet out(like.size(), like.dim());
  out.meta() = like.meta();
  for (std::size_t i = 0; i < values.size(); ++i)
    out.data()[i] = static_cast<float>(values[i]);
  return out;
}

}  // namespace

PropagationPlan plan_from_params(const Params& p) {
  PropagationPlan plan;
  plan.iters = p.iters;
  plan.renormalize = p.renormalize;
  switch (p.mode) {
    case Mode::Local:
      plan.variant = PropagationVariant::Local;
      plan.recompute_graph = false;  // neighbor sets are fixed by construction
      break;
    case Mode::Global:
    case Mode::CrossCamera:
      plan.variant = p.symmetrize ? PropagationVariant::Symmetric
                                  : PropagationVariant::Asymmetric;
      plan.recompute_graph = p.recompute_graph;
      break;
  }
  return plan;
}

namespace detail {

std::vector<double> propagate_f64(const FeatureSet& fs, const NeighborGraph& g,
                                  int workers) {
  if (g.n != fs.size())
    throw GraphSizeMismatch("graph has " + std::to_string(g.n) +
                            " nodes, features have " + std::to_string(fs.size()));
  const std::size_t n = fs.size(), d = fs.dim();
  auto [row_deg, col_deg] = degrees(g);
  std::vector<double> out(n * d);

  parallel_chunks(n, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double* acc = out.data() + i * d;
      const double self_coef = 1.0 / std::sqrt(row_deg[i] * col_deg[i]);
      const float* xi = fs.data().data() + i * d;
      for (std::size_t t = 0; t < d; ++t) acc[t] = self_coef * xi[t];
      for (const auto& e : g.neighbors[i]) {
        const double coef = e.weight / std::sqrt(row_deg[i] * col_deg[e.dst]);
        const float* xj = fs.data().data() + static_cast<std::size_t>(e.dst) * d;
        for (std::size_t t = 0; t < d; ++t) acc[t] += coef * xj[t];
      }
    }
  });
  return out;
}

}  // namespace detail

FeatureSet propagate_once(const FeatureSet& fs, const NeighborGraph& g,
                          int workers) {
  return from_f64(fs, detail::propagate_f64(fs, g, workers));
}

FeatureSet run_global(const FeatureSet& fs, const Params& p, int workers,
                      StageTimings* timings) {
  p.validate();
  if (p.mode != Mode::Global)
    throw ValidationError("run_global requires mode Global");
  FeatureSet cur = fs;
  NeighborGraph g;
  for (int t = 0; t < p.iters; ++t) {
    if (t == 0 || p.recompute_graph) {
      const auto start = Clock::now();
      g = build_graph(cur, p, GraphRestrict::All, workers);
      if (p.symmetrize) g = symmetrize(g);
      if (timings) timings->graph_ms += ms_since(start);
    }
    const auto start = Clock::now();
    cur = propagate_once(cur, g, workers);
    if (p.renormalize) cur = normalize_rows(cur);
    if (timings) timings->propagate_ms += ms_since(start);
  }
  return cur;
}

FeatureSet run_with_fixed_graph(const FeatureSet& fs, const NeighborGraph& g,
                                const Params& p, int workers,
                                StageTimings* timings) {
  p.validate();
  FeatureSet cur = fs;
  for (int t = 0; t < p.iters; ++t) {
    const auto start = Clock::now();
    cur = propagate_once(cur, g, workers);
    if (p.renormalize) cur = normalize_rows(cur);
    if (timings) timings->propagate_ms += ms_since(start);
  }
  return cur;
}

FeatureSet run_local(const FeatureSet& fs, const Params& p, int workers,
                     StageTimings* timings) {
  p.validate();
  if (p.mode != Mode::Local)
    throw ValidationError("run_local requires mode Local");
  const std::size_t n = fs.size(), d = fs.dim();
  const std::size_t k = static_cast<std::size_t>(p.k);

  // Phase 1: neighbor sets from the original features, frozen afterwards.
  auto start = Clock::now();
  std::vector<std::vector<std::uint32_t>> local_sets(n);
  parallel_chunks(n, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const std::vector<double> dist = pairwise_sq_dists(fs, i);
      std::vector<std::uint32_t> sel = knn_select(dist, p.k, i);
      sel.push_back(static_cast<std::uint32_t>(i));
      std::sort(sel.begin(), sel.end());
      local_sets[i] = std::move(sel);
    }
  });
  if (timings) timings->graph_ms += ms_since(start);

  // Phase 2: dense local propagation, one independent block per sample.
  start = Clock::now();
  FeatureSet out = fs;
  parallel_chunks(n, workers, [&](std::size_t begin, std::size_t end) {
    std::vector<double> A((k + 1) * (k + 1));
    std::vector<double> deg(k + 1);
    std::vector<double> X((k + 1) * d), Y((k + 1) * d);
    for (std::size_t i = begin; i < end; ++i) {
      const auto& local = local_sets[i];
      const std::size_t m = local.size();

      for (std::size_t u = 0; u < m; ++u) {
        const float* xu = fs.data().data() + static_cast<std::size_t>(local[u]) * d;
        for (std::size_t v = 0; v < m; ++v) {
          const float* xv = fs.data().data() + static_cast<std::size_t>(local[v]) * d;
          double acc = 0.0;
          for (std::size_t t = 0; t < d; ++t) {
            const double diff = static_cast<double>(xu[t]) - static_cast<double>(xv[t]);
            acc += diff * diff;
          }
          A[u * m + v] = std::exp(-acc / p.gamma);
        }
        A[u * m + u] = 1.0;
      }
      for (std::size_t u = 0; u < m; ++u) {
        double s = 0.0;
        for (std::size_t v = 0; v < m; ++v) s += A[u * m + v];
        deg[u] = s;
      }
      for (std::size_t u = 0; u < m; ++u)
        for (std::size_t t = 0; t < d; ++t)
          X[u * d + t] = fs.data()[static_cast<std::size_t>(local[u]) * d + t];

      for (int it = 0; it < p.iters; ++it) {
        for (std::size_t u = 0; u < m; ++u) {
          double* yu = Y.data() + u * d;
          std::fill(yu, yu + d, 0.0);
          for (std::size_t v = 0; v < m; ++v) {
            const double coef = A[u * m + v] / std::sqrt(deg[u] * deg[v]);
            const double* xv = X.data() + v * d;
            for (std::size_t t = 0; t < d; ++t) yu[t] += coef * xv[t];
          }
        }
        std::swap(X, Y);
        if (p.renormalize) {
          for (std::size_t u = 0; u < m; ++u) {
            double norm_sq = 0.0;
            for (std::size_t t = 0; t < d; ++t) norm_sq += X[u * d + t] * X[u * d + t];
            const double denom = std::max(std::sqrt(norm_sq), 1e-12);
            for (std::size_t t = 0; t < d; ++t) X[u * d + t] /= denom;
          }
        }
      }

      const std::size_t pos =
          std::lower_bound(local.begin(), local.end(), static_cast<std::uint32_t>(i)) -
          local.begin();
      auto dst = out.row(i);
      for (std::size_t t = 0; t < d; ++t)
        dst[t] = static_cast<float>(X[pos * d + t]);
    }
  });
  if (timings) timings->propagate_ms += ms_since(start);
  if (p.renormalize && p.iters > 0) out.set_normalized(true);
  return out;
}

}  // namespace gcr
