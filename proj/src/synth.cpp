#include "gcr/synth.hpp"

#include <cmath>

#include "gcr/rng.hpp"
#include "json.hpp"

namespace gcr {

FeatureSet generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t d = static_cast<std::size_t>(spec.dim);

  std::vector<std::vector<double>> centroids(spec.num_ids);
  for (auto& c : centroids) c = rng.unit_vector(d);

  std::vector<std::vector<double>> camera_bias(spec.cams);
  for (auto& b : camera_bias) {
    b = rng.unit_vector(d);
    for (double& v : b) v *= spec.camera_shift;
  }

  const std::size_t n = static_cast<std::size_t>(spec.num_ids) * spec.cams *
                        spec.frames_per_tracklet;
  FeatureSet fs(n, d);
  std::size_t row = 0;
  std::vector<double> v(d);
  for (int id = 0; id < spec.num_ids; ++id) {
    const int query_cam = id % spec.cams;
    for (int cam = 0; cam < spec.cams; ++cam) {
      const std::int64_t tracklet =
          static_cast<std::int64_t>(id) * spec.cams + cam;
      for (int f = 0; f < spec.frames_per_tracklet; ++f, ++row) {
        double norm_sq = 0.0;
        for (std::size_t t = 0; t < d; ++t) {
          v[t] = centroids[id][t] + camera_bias[cam][t] +
                 spec.cluster_std * rng.gaussian();
          norm_sq += v[t] * v[t];
        }
        const double denom = std::max(std::sqrt(norm_sq), 1e-12);
        auto out = fs.row(row);
        for (std::size_t t = 0; t < d; ++t)
          out[t] = static_cast<float>(v[t] / denom);
        fs.meta()[row] = {id, cam, tracklet,
                          cam == query_cam ? Split::Query : Split::Gallery};
      }
    }
  }
  fs.set_normalized(true);
  return fs;
}

std::string spec_to_json(const SynthSpec& spec) {
  nlohmann::json j = {
      {"num_ids", spec.num_ids},
      {"cams", spec.cams},
      {"frames_per_tracklet", spec.frames_per_tracklet},
      {"dim", spec.dim},
      {"cluster_std", spec.cluster_std},
      {"camera_shift", spec.camera_shift},
      {"seed", spec.seed},
  };
  return j.dump(2);
}

SynthSpec spec_from_json(const std::string& text) {
  SynthSpec spec;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    spec.num_ids = j.at("num_ids").get<int>();
    spec.cams = j.at("cams").get<int>();
    spec.frames_per_tracklet = j.at("frames_per_tracklet").get<int>();
    spec.dim = j.at("dim").get<int>();
    spec.cluster_std = j.at("cluster_std").get<double>();
    spec.camera_shift = j.at("camera_shift").get<double>();
    spec.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw MalformedHeader(std::string("bad synth spec JSON: ") + e.what());
  }
  spec.validate();
  return spec;
}

}  // namespace gcr
