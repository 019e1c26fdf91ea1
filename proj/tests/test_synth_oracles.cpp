#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "gcr/rng.hpp"
#include "gcr/synth.hpp"
#include "support/frozen_fixtures.hpp"
#include "support/oracles.hpp"
#include "support/testutil.hpp"
#include "support/tolerances.hpp"

using namespace gcr;

TEST_CASE("generation is deterministic for a fixed seed") {
  SynthSpec spec;
  spec.num_ids = 5;
  spec.cams = 3;
  spec.frames_per_tracklet = 4;
  spec.dim = 16;
  spec.seed = 77;
  const FeatureSet a = generate(spec);
  const FeatureSet b = generate(spec);
  CHECK(a.data() == b.data());
  CHECK(a.meta() == b.meta());

  spec.seed = 78;
  const FeatureSet c = generate(spec);
  CHECK(a.data() != c.data());
}

TEST_CASE("zero noise and zero shift collapse each identity to one point") {
  SynthSpec spec;
  spec.num_ids = 4;
  spec.cams = 3;
  spec.frames_per_tracklet = 2;
  spec.dim = 8;
  spec.cluster_std = 0.0;
  spec.camera_shift = 0.0;
  spec.seed = 3;
  const FeatureSet fs = generate(spec);
  for (std::size_t i = 0; i < fs.size(); ++i)
    for (std::size_t j = i + 1; j < fs.size(); ++j) {
      if (fs.meta()[i].identity != fs.meta()[j].identity) continue;
      for (std::size_t t = 0; t < fs.dim(); ++t)
        CHECK(fs.row(i)[t] == fs.row(j)[t]);
    }
}

TEST_CASE("generated sets carry the documented structure") {
  SynthSpec spec;
  spec.num_ids = 6;
  spec.cams = 4;
  spec.frames_per_tracklet = 3;
  spec.dim = 12;
  spec.seed = 5;
  const FeatureSet fs = generate(spec);
  CHECK(fs.size() == 6u * 4 * 3);
  CHECK_NOTHROW(fs.validate());
  CHECK(fs.normalized());

  // One tracklet per (identity, camera); one query tracklet per identity.
  std::set<std::pair<std::int64_t, std::int32_t>> id_cam;
  std::set<std::int64_t> query_ids;
  std::set<std::int64_t> tracklets;
  for (const auto& m : fs.meta()) {
    id_cam.insert({m.identity, m.camera});
    tracklets.insert(m.tracklet);
    if (m.split == Split::Query) query_ids.insert(m.identity);
  }
  CHECK(id_cam.size() == 24);
  CHECK(tracklets.size() == 24);
  CHECK(query_ids.size() == 6);
  for (std::int64_t id = 0; id < 6; ++id) {
    std::set<std::int64_t> qt;
    for (const auto& m : fs.meta())
      if (m.identity == id && m.split == Split::Query) qt.insert(m.tracklet);
    CHECK(qt.size() == 1);
  }
}

TEST_CASE("baseline mAP sits in the recorded band with low variance") {
  SynthSpec spec;  // the calibrated benchmark configuration
  std::vector<double> maps;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    spec.seed = seed;
    maps.push_back(testutil::reid_map(generate(spec)));
  }
  const double mean =
      std::accumulate(maps.begin(), maps.end(), 0.0) / maps.size();
  double var = 0.0;
  for (double m : maps) var += (m - mean) * (m - mean);
  const double cv = std::sqrt(var / (maps.size() - 1)) / mean;
  CHECK(cv < 0.10);
  CHECK(mean >= fixtures::kBaselineMapBandLo);
  CHECK(mean <= fixtures::kBaselineMapBandHi);
}

TEST_CASE("dense oracle with a diagonal-only matrix is the identity") {
  const FeatureSet fs = testutil::random_features(8, 5, 701);
  std::vector<double> eye(8 * 8, 0.0);
  for (std::size_t i = 0; i < 8; ++i) eye[i * 8 + i] = 1.0;
  const auto out = oracle::propagate_dense(fs.data(), 8, 5, eye,
                                           oracle::Variant::Asymmetric);
  CHECK(testutil::max_abs_diff(fs.data(), out) < 1e-15);
}

TEST_CASE("both oracle variants agree on a symmetric matrix") {
  Rng rng(711);
  const std::size_t n = 10, d = 4;
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    a[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j)
      a[i * n + j] = a[j * n + i] = rng.uniform01() < 0.4 ? rng.uniform01() : 0.0;
  }
  const FeatureSet fs = testutil::random_features(n, d, 712);
  const auto asym =
      oracle::propagate_dense(fs.data(), n, d, a, oracle::Variant::Asymmetric);
  const auto sym =
      oracle::propagate_dense(fs.data(), n, d, a, oracle::Variant::Symmetric);
  for (std::size_t i = 0; i < n * d; ++i)
    CHECK(std::abs(asym[i] - sym[i]) < tol::kDegree);
}

TEST_CASE("numeric oracle returns zero for a zero right-hand side") {
  // Two identical tracklets: tracklet mean equals group mean.
  std::vector<std::vector<double>> group = {{0.6, 0.8}, {0.6, 0.8}};
  const auto w = oracle::numeric_profile_oracle(group, {0}, 5.0);
  CHECK(w[0] == 0.0);
  CHECK(w[1] == 0.0);
}

TEST_CASE("numeric oracle direction approaches b - a for large lambda") {
  Rng rng(721);
  std::vector<std::vector<double>> group;
  for (int i = 0; i < 20; ++i) group.push_back(rng.unit_vector(6));
  std::vector<std::size_t> tracklet = {0, 1, 2, 3, 4};
  const auto w = oracle::numeric_profile_oracle(group, tracklet, 1e6);

  std::vector<double> diff(6, 0.0);
  for (std::size_t r : tracklet)
    for (std::size_t t = 0; t < 6; ++t) diff[t] += group[r][t] / 5.0;
  for (const auto& x : group)
    for (std::size_t t = 0; t < 6; ++t) diff[t] -= x[t] / 20.0;

  double dot = 0.0, nw = 0.0, nd = 0.0;
  for (std::size_t t = 0; t < 6; ++t) {
    dot += w[t] * diff[t];
    nw += w[t] * w[t];
    nd += diff[t] * diff[t];
  }
  CHECK(dot / std::sqrt(nw * nd) >= 1.0 - tol::kLambdaLimitCosineGap);
}

TEST_CASE("numeric oracle reports non-convergence at the iteration cap") {
  Rng rng(731);
  std::vector<std::vector<double>> group;
  for (int i = 0; i < 10; ++i) group.push_back(rng.unit_vector(4));
  CHECK_THROWS_AS(oracle::numeric_profile_oracle(group, {0, 1}, 1.0, 1e-8,
                                                 /*max_iters=*/1),
                  NoConvergence);
}

TEST_CASE("invalid synth specs are rejected") {
  SynthSpec spec;
  spec.num_ids = 0;
  CHECK_THROWS_AS(generate(spec), ValidationError);
  spec.num_ids = 1;
  spec.cluster_std = -0.5;
  CHECK_THROWS_AS(generate(spec), ValidationError);
}

TEST_CASE("synth spec JSON round trip") {
  SynthSpec spec;
  spec.num_ids = 9;
  spec.cams = 2;
  spec.frames_per_tracklet = 7;
  spec.dim = 24;
  spec.cluster_std = 0.3;
  spec.camera_shift = 1.1;
  spec.seed = 12345;
  const SynthSpec back = spec_from_json(spec_to_json(spec));
  CHECK(back.num_ids == spec.num_ids);
  CHECK(back.cams == spec.cams);
  CHECK(back.frames_per_tracklet == spec.frames_per_tracklet);
  CHECK(back.dim == spec.dim);
  CHECK(back.cluster_std == spec.cluster_std);
  CHECK(back.camera_shift == spec.camera_shift);
  CHECK(back.seed == spec.seed);
}
