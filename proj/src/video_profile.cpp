#include "gcr/video_profile.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>

#include "gcr/cross_camera.hpp"
#include "gcr/parallel.hpp"

namespace gcr {

namespace {

using Clock = std::chrono::steady_clock;
double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

constexpr double kDegenerateRhsNorm = 1e-10;

// Frames of every tracklet sharing one camera; the scope of the Gram matrix
// and of the subtracted mean.
struct CameraGroup {
  std::vector<std::size_t> rows;
  Eigen::VectorXd mean;
  Eigen::LLT<Eigen::MatrixXd> llt;
  bool factorized = false;
};

Eigen::VectorXd tracklet_mean(const FeatureSet& fs,
                              const std::vector<std::size_t>& rows) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(fs.dim());
  for (std::size_t r : rows) {
    auto x = fs.row(r);
    for (std::size_t t = 0; t < fs.dim(); ++t) b[t] += x[t];
  }
  b /= static_cast<double>(rows.size());
  return b;
}

void factorize_group(const FeatureSet& fs, CameraGroup& group, double lambda) {
  const std::size_t d = fs.dim();
  const std::size_t m = group.rows.size();
  Eigen::MatrixXd columns(d, m);
  for (std::size_t c = 0; c < m; ++c) {
    auto x = fs.row(group.rows[c]);
    for (std::size_t t = 0; t < d; ++t) columns(t, c) = x[t];
  }
  group.mean = columns.rowwise().mean();

  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(d, d);
  system.selfadjointView<Eigen::Lower>().rankUpdate(columns);
  system.diagonal().array() += lambda * static_cast<double>(m);
  group.llt.compute(system.selfadjointView<Eigen::Lower>());
  if (group.llt.info() != Eigen::Success)
    throw SingularSystem("profile system is not positive definite (lambda=" +
                         std::to_string(lambda) + ")");
  group.factorized = true;
}

std::vector<double> solve_profile(const FeatureSet& fs, const CameraGroup& group,
                                  const std::vector<std::size_t>& tracklet_rows) {
  const Eigen::VectorXd b = tracklet_mean(fs, tracklet_rows);
  const Eigen::VectorXd rhs = b - group.mean;
  if (rhs.norm() < kDegenerateRhsNorm) {
    // A zero right-hand side would produce w = 0; fall back to the mean.
    return std::vector<double>(b.data(), b.data() + b.size());
  }
  const Eigen::VectorXd w = group.llt.solve(rhs);
  return std::vector<double>(w.data(), w.data() + w.size());
}

}  // namespace

TrackletIndex build_tracklet_index(const FeatureSet& fs) {
  TrackletIndex index;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const auto& m = fs.meta()[i];
    if (m.tracklet < 0) continue;
    index[m.tracklet].push_back(i);
  }
  if (index.empty())
    throw MissingTrackletMetadata("no row carries a tracklet id");
  for (const auto& [id, rows] : index) {
    const auto& first = fs.meta()[rows.front()];
    for (std::size_t r : rows) {
      const auto& m = fs.meta()[r];
      if (m.identity != first.identity || m.camera != first.camera)
        throw ValidationError("tracklet " + std::to_string(id) +
                              " spans identities or cameras");
      if (m.split != first.split)
        throw ValidationError("tracklet " + std::to_string(id) +
                              " mixes query and gallery frames");
    }
  }
  return index;
}

std::vector<double> mean_profile(const FeatureSet& fs, std::int64_t tracklet) {
  const TrackletIndex index = build_tracklet_index(fs);
  auto it = index.find(tracklet);
  if (it == index.end()) throw UnknownTracklet(tracklet);
  const Eigen::VectorXd b = tracklet_mean(fs, it->second);
  return std::vector<double>(b.data(), b.data() + b.size());
}

std::vector<double> closed_form_profile(const FeatureSet& fs,
                                        std::int64_t tracklet, double lambda) {
  if (lambda < 0.0) throw ValidationError("lambda must be >= 0");
  const TrackletIndex index = build_tracklet_index(fs);
  auto it = index.find(tracklet);
  if (it == index.end()) throw UnknownTracklet(tracklet);

  const std::int32_t camera = fs.meta()[it->second.front()].camera;
  CameraGroup group;
  for (const auto& [id, rows] : index)
    if (fs.meta()[rows.front()].camera == camera)
      group.rows.insert(group.rows.end(), rows.begin(), rows.end());
  std::sort(group.rows.begin(), group.rows.end());
  factorize_group(fs, group, lambda);
  return solve_profile(fs, group, it->second);
}

ProfileSet build_profiles(const FeatureSet& fs, const Params& p,
                          ProfileMethod method, int workers) {
  p.validate();
  const TrackletIndex index = build_tracklet_index(fs);
  const std::size_t d = fs.dim();

  std::vector<std::int64_t> ids;
  ids.reserve(index.size());
  for (const auto& [id, rows] : index) ids.push_back(id);

  ProfileSet ps;
  ps.method = method;
  ps.meta.resize(ids.size());
  ps.data.assign(ids.size() * d, 0.0f);
  for (std::size_t c = 0; c < ids.size(); ++c) {
    const auto& rows = index.at(ids[c]);
    const auto& m = fs.meta()[rows.front()];
    ps.meta[c] = {ids[c], m.identity, m.camera, m.split};
  }

  auto store = [&](std::size_t c, const std::vector<double>& w, bool renorm) {
    double scale = 1.0;
    if (renorm) {
      double norm_sq = 0.0;
      for (double v : w) norm_sq += v * v;
      scale = 1.0 / std::max(std::sqrt(norm_sq), 1e-12);
    }
    for (std::size_t t = 0; t < d; ++t)
      ps.data[c * d + t] = static_cast<float>(w[t] * scale);
  };

  if (method == ProfileMethod::Mean) {
    parallel_chunks(ids.size(), workers, [&](std::size_t begin, std::size_t end) {
      for (std::size_t c = begin; c < end; ++c) {
        const Eigen::VectorXd b = tracklet_mean(fs, index.at(ids[c]));
        store(c, std::vector<double>(b.data(), b.data() + b.size()), false);
      }
    });
    return ps;
  }

  // Closed form: one Gram factorization per camera, shared read-only by the
  // per-tracklet solves.
  std::map<std::int32_t, CameraGroup> groups;
  for (const auto& [id, rows] : index) {
    CameraGroup& group = groups[fs.meta()[rows.front()].camera];
    group.rows.insert(group.rows.end(), rows.begin(), rows.end());
  }
  for (auto& [cam, group] : groups) {
    std::sort(group.rows.begin(), group.rows.end());
    factorize_group(fs, group, p.lambda);
  }

  parallel_chunks(ids.size(), workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      const auto& rows = index.at(ids[c]);
      const CameraGroup& group = groups.at(fs.meta()[rows.front()].camera);
      store(c, solve_profile(fs, group, rows), p.renormalize);
    }
  });
  return ps;
}

ProfileSet run_gcrv(const FeatureSet& fs, const Params& p, ProfileMethod method,
                    int workers, StageTimings* timings) {
  const auto start = Clock::now();
  ProfileSet ps = build_profiles(fs, p, method, workers);
  if (timings) timings->profile_ms += ms_since(start);
  if (p.iters == 0) return ps;

  Params q = p;
  q.mode = Mode::CrossCamera;
  const FeatureSet updated = run_cross_camera(to_feature_set(ps), q, workers, timings);

  ProfileSet out = std::move(ps);
  out.data = updated.data();
  return out;
}

FeatureSet to_feature_set(const ProfileSet& ps) {
  FeatureSet fs(ps.count(), ps.dim());
  fs.data() = ps.data;
  for (std::size_t c = 0; c < ps.count(); ++c) {
    const TrackletMeta& m = ps.meta[c];
    fs.meta()[c] = {m.identity, m.camera, m.tracklet, m.split};
  }
  return fs;
}

ProfileSet profile_set_from_features(const FeatureSet& fs,
                                     ProfileMethod method) {
  ProfileSet ps;
  ps.method = method;
  ps.data = fs.data();
  ps.meta.resize(fs.size());
  for (std::size_t c = 0; c < fs.size(); ++c) {
    const SampleMeta& m = fs.meta()[c];
    if (m.tracklet < 0)
      throw MissingTrackletMetadata("profile row without tracklet id");
    ps.meta[c] = {m.tracklet, m.identity, m.camera, m.split};
  }
  return ps;
}

}  // namespace gcr
