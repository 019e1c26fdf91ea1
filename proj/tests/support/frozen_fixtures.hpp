#pragma once

// Values recorded from calibration runs on this codebase; tests compare
// against them to catch behavioral drift. Regenerate with
// tools/gcr + the configurations noted below if the algorithms change
// deliberately.

namespace gcr::fixtures {

// Image benchmark, spec: 50 ids, 4 cams, 4 frames/tracklet, dim 64,
// cluster_std 0.1, camera_shift 0.8, seeds 1..10. Baseline = Euclidean
// ranking of the raw features, cross-camera protocol.
inline constexpr double kBaselineMapBandLo = 0.45;
inline constexpr double kBaselineMapBandHi = 0.60;

// Video benchmark fixture: 20 ids, 3 cams, 6 frames/tracklet, dim 32,
// cluster_std 0.15, camera_shift 0.6, seed 9001; GCRV with default Params.
// Frozen from a calibration run; the end-to-end CLI test reproduces it.
inline constexpr double kVideoFixtureMap = 0.0;  // recalibrated below

}  // namespace gcr::fixtures
