#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "gcr/evaluation.hpp"
#include "gcr/rng.hpp"
#include "gcr/types.hpp"

namespace gcr::testutil {

// Unique scratch directory under the system temp dir; removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("gcr-" + tag + "-" + std::to_string(rd()) + "-" +
             std::to_string(::getpid()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// n random rows near the unit sphere, cameras assigned round-robin,
// every row gallery except row 0.
inline FeatureSet random_features(std::size_t n, std::size_t d,
                                  std::uint64_t seed, int cams = 1) {
  Rng rng(seed);
  FeatureSet fs(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> v = rng.unit_vector(d);
    for (std::size_t t = 0; t < d; ++t)
      fs.row(i)[t] = static_cast<float>(v[t]);
    fs.meta()[i].identity = static_cast<std::int64_t>(i);
    fs.meta()[i].camera = static_cast<std::int32_t>(i % cams);
    fs.meta()[i].split = i == 0 ? Split::Query : Split::Gallery;
  }
  return fs;
}

inline double max_abs_diff(const std::vector<float>& a,
                           const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(static_cast<double>(a[i]) - b[i]));
  return worst;
}

inline double max_abs_diff(const std::vector<float>& a,
                           const std::vector<float>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(static_cast<double>(a[i]) -
                                     static_cast<double>(b[i])));
  return worst;
}

// Cross-camera mAP of a feature set split into query/gallery rows.
inline double reid_map(const FeatureSet& fs,
                       Protocol protocol = Protocol::CrossCamera) {
  const FeatureSet queries = subset_by_split(fs, Split::Query);
  const FeatureSet gallery = subset_by_split(fs, Split::Gallery);
  const RankResult r = rank(queries, gallery);
  return evaluate_reid(r, queries.meta(), gallery.meta(), protocol).mAP;
}

inline EvalReport reid_report(const FeatureSet& fs,
                              Protocol protocol = Protocol::CrossCamera,
                              std::size_t max_rank = 20) {
  const FeatureSet queries = subset_by_split(fs, Split::Query);
  const FeatureSet gallery = subset_by_split(fs, Split::Gallery);
  const RankResult r = rank(queries, gallery);
  return evaluate_reid(r, queries.meta(), gallery.meta(), protocol, max_rank);
}

}  // namespace gcr::testutil
