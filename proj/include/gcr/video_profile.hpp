#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "gcr/propagation.hpp"
#include "gcr/types.hpp"

namespace gcr {

enum class ProfileMethod : std::uint8_t { Mean, ClosedForm };

struct TrackletMeta {
  std::int64_t tracklet = -1;
  std::int64_t identity = -1;
  std::int32_t camera = 0;
  Split split = Split::Gallery;
  friend bool operator==(const TrackletMeta&, const TrackletMeta&) = default;
};

// One profile vector per tracklet.
struct ProfileSet {
  std::size_t count() const { return meta.size(); }
  std::size_t dim() const { return meta.empty() ? 0 : data.size() / meta.size(); }

  std::vector<float> data;  // count x dim, row-major
  std::vector<TrackletMeta> meta;
  ProfileMethod method = ProfileMethod::Mean;
};

// tracklet id -> ascending row indices of its frames. Rows with tracklet -1
// are ignored. Throws MissingTrackletMetadata when no row carries a tracklet,
// ValidationError when a tracklet spans cameras/identities/splits.
using TrackletIndex = std::map<std::int64_t, std::vector<std::size_t>>;
TrackletIndex build_tracklet_index(const FeatureSet& fs);

// Arithmetic mean of the tracklet's frame features (64-bit accumulation).
std::vector<double> mean_profile(const FeatureSet& fs, std::int64_t tracklet);

// Regularized profile: solves (G + lambda*n*I) w = b - a over the tracklet's
// camera group, where G is the d x d Gram matrix of the group's frames,
// b the tracklet mean, a the group mean and n the group's frame count.
// Falls back to the mean profile when ||b - a|| < 1e-10. Raw solution; any
// unit normalization happens in build_profiles.
std::vector<double> closed_form_profile(const FeatureSet& fs,
                                        std::int64_t tracklet, double lambda);

// One profile per tracklet. ClosedForm profiles are unit-normalized when
// p.renormalize is set; Mean profiles reproduce mean_profile exactly.
ProfileSet build_profiles(const FeatureSet& fs, const Params& p,
                          ProfileMethod method, int workers = 0);

// Profile generation followed by T iterations of cross-camera fused
// propagation at tracklet granularity, graphs rebuilt from current profiles.
ProfileSet run_gcrv(const FeatureSet& fs, const Params& p,
                    ProfileMethod method = ProfileMethod::ClosedForm,
                    int workers = 0, StageTimings* timings = nullptr);

// Profiles as a FeatureSet (tracklet id as the row key) for ranking and
// GCRF persistence, and the reverse mapping.
FeatureSet to_feature_set(const ProfileSet& ps);
ProfileSet profile_set_from_features(const FeatureSet& fs,
                                     ProfileMethod method);

}  // namespace gcr
