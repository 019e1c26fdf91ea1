#pragma once

// Independent reference implementations used only by tests. Everything here
// is written as literal dense loops and shares no computational code with the
// library kernels it checks.

#include <cstddef>
#include <vector>

#include "gcr/knn_graph.hpp"

namespace gcr::oracle {

enum class Variant { Asymmetric, Symmetric };

// Full n x n matrix from a sparse graph: zeros, ones on the diagonal, and the
// stored edge weights. Format conversion only, no arithmetic.
std::vector<double> dense_from_graph(const NeighborGraph& g);

// Literal degree-normalized propagation on a full matrix.
// Asymmetric uses row and column degree vectors; Symmetric uses row degrees
// on both sides.
std::vector<double> propagate_dense(const std::vector<float>& x, std::size_t n,
                                    std::size_t d, const std::vector<double>& a,
                                    Variant variant);

// alpha-weighted fusion of two dense propagations from the same snapshot.
std::vector<double> propagate_fused_dense(const std::vector<float>& x,
                                          std::size_t n, std::size_t d,
                                          const std::vector<double>& a_all,
                                          const std::vector<double>& a_cross,
                                          double alpha);

// Quadratic profile objective
//   f(w) = mean_i <x_i, w> - mean_{j in tracklet} <x_j, w>
//          + (1/n) |X w|^2 + (lambda/2) |w|^2
// over a camera group; rows index into `group`.
double profile_objective(const std::vector<std::vector<double>>& group,
                         const std::vector<std::size_t>& tracklet_rows,
                         double lambda, const std::vector<double>& w);

// Minimizes profile_objective by gradient descent with backtracking until the
// gradient norm drops below grad_tol. Throws gcr::NoConvergence at the
// iteration cap.
std::vector<double> numeric_profile_oracle(
    const std::vector<std::vector<double>>& group,
    const std::vector<std::size_t>& tracklet_rows, double lambda,
    double grad_tol = 1e-8, int max_iters = 200000);

}  // namespace gcr::oracle
