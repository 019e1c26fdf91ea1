#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "gcr/knn_graph.hpp"
#include "gcr/rng.hpp"
#include "support/oracles.hpp"
#include "support/testutil.hpp"
#include "support/tolerances.hpp"

using namespace gcr;

namespace {

Params params(int k, double gamma = 0.2) {
  Params p;
  p.k = k;
  p.gamma = gamma;
  return p;
}

// Edge lookup; 0 when absent.
double weight_of(const NeighborGraph& g, std::size_t i, std::uint32_t j) {
  for (const auto& e : g.neighbors[i])
    if (e.dst == j) return e.weight;
  return 0.0;
}

}  // namespace

TEST_CASE("pairwise_sq_dists on hand cases") {
  FeatureSet fs(2, 2);
  fs.data() = {1.0f, 0.0f, 0.0f, 1.0f};
  const auto d0 = pairwise_sq_dists(fs, 0);
  CHECK(d0[0] == 0.0);
  CHECK(d0[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("pairwise_sq_dists matches the naive two-loop oracle") {
  const FeatureSet fs = testutil::random_features(10, 4, 3);
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const auto dists = pairwise_sq_dists(fs, i);
    for (std::size_t j = 0; j < fs.size(); ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < fs.dim(); ++t) {
        const double diff =
            static_cast<double>(fs.row(i)[t]) - static_cast<double>(fs.row(j)[t]);
        acc += diff * diff;
      }
      CHECK(std::abs(dists[j] - acc) < tol::kBruteDistance);
    }
  }
}

TEST_CASE("knn_select basics") {
  const std::vector<double> dists = {0.0, 3.0, 1.0, 2.0};
  CHECK(knn_select(dists, 2, 0) == std::vector<std::uint32_t>{2, 3});

  const std::vector<double> tied = {0.0, 1.0, 1.0, 1.0};
  CHECK(knn_select(tied, 2, 0) == std::vector<std::uint32_t>{1, 2});

  CHECK(knn_select(dists, 10, 0) == std::vector<std::uint32_t>{2, 3, 1});
}

TEST_CASE("build_graph on two identical points") {
  FeatureSet fs(2, 3);
  fs.data() = {0.5f, 0.5f, 0.5f, 0.5f, 0.5f, 0.5f};
  const NeighborGraph g = build_graph(fs, params(1), GraphRestrict::All);
  CHECK(weight_of(g, 0, 1) == 1.0);
  CHECK(weight_of(g, 1, 0) == 1.0);
}

TEST_CASE("edge weight of dist^2 = gamma is exp(-1)") {
  FeatureSet fs(2, 1);
  const float step = std::sqrt(0.2f);
  fs.data() = {0.0f, step};
  const NeighborGraph g = build_graph(fs, params(1, 0.2), GraphRestrict::All);
  const double expected =
      std::exp(-(static_cast<double>(step) * step) / 0.2);
  CHECK(weight_of(g, 0, 1) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(weight_of(g, 0, 1) == doctest::Approx(0.367879).epsilon(1e-4));
}

TEST_CASE("every edge weight matches the recomputed kernel on seeded data") {
  const FeatureSet fs = testutil::random_features(50, 8, 11);
  const Params p = params(6, 0.2);
  const NeighborGraph g = build_graph(fs, p, GraphRestrict::All);
  g.validate();
  for (std::size_t i = 0; i < fs.size(); ++i) {
    CHECK(g.neighbors[i].size() == 6);
    for (const auto& e : g.neighbors[i]) {
      double acc = 0.0;
      for (std::size_t t = 0; t < fs.dim(); ++t) {
        const double diff = static_cast<double>(fs.row(i)[t]) -
                            static_cast<double>(fs.row(e.dst)[t]);
        acc += diff * diff;
      }
      CHECK(std::abs(e.weight - std::exp(-acc / p.gamma)) < tol::kEdgeWeight);
    }
  }
}

TEST_CASE("cross-camera restriction never links same-camera rows") {
  const FeatureSet fs = testutil::random_features(40, 6, 5, /*cams=*/3);
  const NeighborGraph g =
      build_graph(fs, params(7), GraphRestrict::CrossCameraOnly);
  for (std::size_t i = 0; i < fs.size(); ++i)
    for (const auto& e : g.neighbors[i])
      CHECK(fs.meta()[e.dst].camera != fs.meta()[i].camera);
}

TEST_CASE("a node with no eligible cross-camera candidate gets an empty list") {
  const FeatureSet fs = testutil::random_features(10, 4, 9, /*cams=*/1);
  const NeighborGraph g =
      build_graph(fs, params(3), GraphRestrict::CrossCameraOnly);
  for (std::size_t i = 0; i < fs.size(); ++i) CHECK(g.neighbors[i].empty());
}

TEST_CASE("symmetrize hand cases") {
  NeighborGraph g;
  g.n = 2;
  g.neighbors.resize(2);
  SUBCASE("one-directional edge halves") {
    g.neighbors[0] = {{1, 0.8}};
    const NeighborGraph s = symmetrize(g);
    CHECK(weight_of(s, 0, 1) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(weight_of(s, 1, 0) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(s.symmetric);
  }
  SUBCASE("mutual equal edges keep their weight") {
    g.neighbors[0] = {{1, 0.6}};
    g.neighbors[1] = {{0, 0.6}};
    const NeighborGraph s = symmetrize(g);
    CHECK(weight_of(s, 0, 1) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(weight_of(s, 1, 0) == doctest::Approx(0.6).epsilon(1e-12));
  }
}

TEST_CASE("symmetrize matches the dense (A~+A~^T)/2 oracle") {
  const FeatureSet fs = testutil::random_features(30, 5, 21);
  const NeighborGraph g = build_graph(fs, params(4), GraphRestrict::All);
  const NeighborGraph s = symmetrize(g);
  s.validate();

  const std::vector<double> dense = oracle::dense_from_graph(g);
  const std::size_t n = g.n;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double expected =
          i == j ? 1.0 : (dense[i * n + j] + dense[j * n + i]) / 2.0;
      const double actual = i == j ? 1.0 : weight_of(s, i, j);
      CHECK(std::abs(actual - expected) < tol::kSymmetrize);
    }
}

TEST_CASE("degrees hand cases") {
  NeighborGraph g;
  g.n = 2;
  g.neighbors.resize(2);
  SUBCASE("isolated nodes have degree exactly 1") {
    const auto [row, col] = degrees(g);
    CHECK(row[0] == 1.0);
    CHECK(col[0] == 1.0);
  }
  SUBCASE("single outbound edge") {
    g.neighbors[0] = {{1, 0.5}};
    const auto [row, col] = degrees(g);
    CHECK(row[0] == 1.5);
    CHECK(col[0] == 1.0);
    CHECK(row[1] == 1.0);
    CHECK(col[1] == 1.5);
  }
}

TEST_CASE("symmetric graphs have equal row and column degrees") {
  const FeatureSet fs = testutil::random_features(40, 6, 13);
  const NeighborGraph s = symmetrize(build_graph(fs, params(5), GraphRestrict::All));
  const auto [row, col] = degrees(s);
  for (std::size_t i = 0; i < s.n; ++i) {
    CHECK(std::abs(row[i] - col[i]) < tol::kDegree);
    CHECK(row[i] >= 1.0);
    CHECK(col[i] >= 1.0);
  }
}

TEST_CASE("graph construction is permutation equivariant") {
  const FeatureSet fs = testutil::random_features(25, 4, 31, /*cams=*/2);
  const Params p = params(4);

  // Deterministic permutation.
  std::vector<std::size_t> perm(fs.size());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(99);
  for (std::size_t i = perm.size(); i > 1; --i)
    std::swap(perm[i - 1], perm[rng.next_u64() % i]);

  FeatureSet permuted(fs.size(), fs.dim());
  for (std::size_t i = 0; i < fs.size(); ++i) {
    std::copy(fs.row(i).begin(), fs.row(i).end(), permuted.row(perm[i]).begin());
    permuted.meta()[perm[i]] = fs.meta()[i];
  }

  for (GraphRestrict r : {GraphRestrict::All, GraphRestrict::CrossCameraOnly}) {
    const NeighborGraph g = build_graph(fs, p, r);
    const NeighborGraph gp = build_graph(permuted, p, r);
    for (std::size_t i = 0; i < fs.size(); ++i) {
      CHECK(g.neighbors[i].size() == gp.neighbors[perm[i]].size());
      for (const auto& e : g.neighbors[i]) {
        const double w = weight_of(gp, perm[i],
                                   static_cast<std::uint32_t>(perm[e.dst]));
        CHECK(w == e.weight);  // identical float inputs, identical weights
      }
    }
  }
}

TEST_CASE("edges are invariant to appending rows beyond the k-th neighbor") {
  const FeatureSet near = testutil::random_features(20, 4, 17);
  FeatureSet extended(25, 4);
  std::copy(near.data().begin(), near.data().end(), extended.data().begin());
  for (std::size_t i = 0; i < 20; ++i) extended.meta()[i] = near.meta()[i];
  Rng rng(18);
  for (std::size_t i = 20; i < 25; ++i) {
    const auto far = rng.unit_vector(4);
    for (std::size_t t = 0; t < 4; ++t)
      extended.row(i)[t] = static_cast<float>(100.0 + 10.0 * far[t]);
    extended.meta()[i].identity = static_cast<std::int64_t>(i);
  }

  const NeighborGraph g = build_graph(near, params(5), GraphRestrict::All);
  const NeighborGraph ge = build_graph(extended, params(5), GraphRestrict::All);
  for (std::size_t i = 0; i < 20; ++i) {
    REQUIRE(g.neighbors[i].size() == ge.neighbors[i].size());
    for (std::size_t t = 0; t < g.neighbors[i].size(); ++t)
      CHECK(g.neighbors[i][t] == ge.neighbors[i][t]);
  }
}

TEST_CASE("graph build is identical for any worker count") {
  const FeatureSet fs = testutil::random_features(60, 8, 23, /*cams=*/2);
  const NeighborGraph g1 = build_graph(fs, params(6), GraphRestrict::All, 1);
  const NeighborGraph g8 = build_graph(fs, params(6), GraphRestrict::All, 8);
  CHECK(g1 == g8);
}

TEST_CASE("graph cache round trip") {
  testutil::TempDir dir("graph");
  const FeatureSet fs = testutil::random_features(15, 4, 29, /*cams=*/2);
  const Params p = params(3);
  const NeighborGraph g = symmetrize(build_graph(fs, p, GraphRestrict::All));
  GraphCacheInfo info{fs.size(), p.k, p.gamma, GraphRestrict::All, true};

  const auto path = dir.path() / "g.csv";
  save_graph(g, info, path);
  const auto [back, back_info] = load_graph(path);

  CHECK(back.n == g.n);
  CHECK(back.symmetric);
  CHECK(back_info.k == 3);
  CHECK(back_info.gamma == doctest::Approx(0.2));
  for (std::size_t i = 0; i < g.n; ++i) {
    REQUIRE(back.neighbors[i].size() == g.neighbors[i].size());
    for (std::size_t t = 0; t < g.neighbors[i].size(); ++t) {
      CHECK(back.neighbors[i][t].dst == g.neighbors[i][t].dst);
      // 9 significant digits in the CSV
      CHECK(back.neighbors[i][t].weight ==
            doctest::Approx(g.neighbors[i][t].weight).epsilon(1e-8));
    }
  }
}

TEST_CASE("loading a cache without its sidecar fails") {
  testutil::TempDir dir("graph");
  CHECK_THROWS_AS(load_graph(dir.path() / "missing.csv"), IoFailure);
}
