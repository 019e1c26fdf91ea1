#pragma once

#include <cstdint>
#include <string>

#include "gcr/types.hpp"

namespace gcr {

// Clustered features with controllable per-camera bias and tracklets; stands
// in for real re-identification feature dumps at desk scale.
struct SynthSpec {
  int num_ids = 50;
  int cams = 4;
  int frames_per_tracklet = 4;
  int dim = 64;
  double cluster_std = 0.1;
  double camera_shift = 0.8;
  std::uint64_t seed = 1;

  void validate() const {
    if (num_ids < 1 || cams < 1 || frames_per_tracklet < 1 || dim < 1)
      throw ValidationError("synth counts must be >= 1");
    if (cluster_std < 0.0 || camera_shift < 0.0)
      throw ValidationError("synth noise magnitudes must be >= 0");
  }
};

// Identity centroids uniform on the unit sphere; each camera adds a fixed
// bias vector of norm camera_shift; each frame is
// normalize(centroid + bias + gaussian(cluster_std)). One tracklet per
// (identity, camera); per identity, the tracklet of camera (id % cams) is the
// query, the rest are gallery. Deterministic for a fixed seed.
FeatureSet generate(const SynthSpec& spec);

std::string spec_to_json(const SynthSpec& spec);
SynthSpec spec_from_json(const std::string& text);

}  // namespace gcr
