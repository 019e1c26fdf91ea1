#pragma once

#include <filesystem>

#include "gcr/types.hpp"

namespace gcr {

// GCRF binary format (little-endian):
//   magic "GCRF" (4 bytes), u32 version=1, u64 n, u64 d,
//   then n*d IEEE-754 float32 values, row-major.
// Companion manifest CSV (header row `index,identity,camera,tracklet,split`,
// split in {query,gallery}) must cover indices 0..n-1 exactly once.

// Manifest path convention: features at "x.gcrf" pair with "x.manifest.csv".
std::filesystem::path manifest_path_for(const std::filesystem::path& features);

FeatureSet load_features(const std::filesystem::path& path);
FeatureSet load_features(const std::filesystem::path& path,
                         const std::filesystem::path& manifest);

void save_features(const FeatureSet& fs, const std::filesystem::path& path);
void save_features(const FeatureSet& fs, const std::filesystem::path& path,
                   const std::filesystem::path& manifest);

// Each output row is the input row divided by max(norm, 1e-12); zero rows
// stay zero. Sets the normalized flag. Idempotent within 1e-7.
FeatureSet normalize_rows(const FeatureSet& fs);

}  // namespace gcr
