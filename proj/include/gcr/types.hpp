#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gcr {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MalformedHeader : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct NonFiniteValue : Error {
  NonFiniteValue(std::size_t row, std::size_t col)
      : Error("non-finite value at row " + std::to_string(row) + ", col " +
              std::to_string(col)),
        row(row),
        col(col) {}
  std::size_t row;
  std::size_t col;
};

struct IoFailure : Error {
  using Error::Error;
};

struct ValidationError : Error {
  using Error::Error;
};

struct GraphSizeMismatch : Error {
  using Error::Error;
};

struct UnknownTracklet : Error {
  explicit UnknownTracklet(std::int64_t id)
      : Error("unknown tracklet id " + std::to_string(id)) {}
};

struct SingularSystem : Error {
  using Error::Error;
};

struct MissingTrackletMetadata : Error {
  using Error::Error;
};

struct QuerySetMismatch : Error {
  using Error::Error;
};

struct NoConvergence : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Sample metadata
// ---------------------------------------------------------------------------

enum class Split : std::uint8_t { Query, Gallery };

struct SampleMeta {
  std::int64_t identity = -1;  // -1 marks a junk/distractor sample
  std::int32_t camera = 0;
  std::int64_t tracklet = -1;  // -1 for image (non-video) tasks
  Split split = Split::Gallery;

  friend bool operator==(const SampleMeta&, const SampleMeta&) = default;
};

// ---------------------------------------------------------------------------
// FeatureSet: n x d row-major float32 matrix plus per-row metadata.
// ---------------------------------------------------------------------------

class FeatureSet {
 public:
  FeatureSet() = default;
  FeatureSet(std::size_t n, std::size_t d)
      : n_(n), d_(d), data_(n * d, 0.0f), meta_(n) {}

  std::size_t size() const { return n_; }
  std::size_t dim() const { return d_; }

  std::span<const float> row(std::size_t i) const {
    return {data_.data() + i * d_, d_};
  }
  std::span<float> row(std::size_t i) { return {data_.data() + i * d_, d_}; }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

  const std::vector<SampleMeta>& meta() const { return meta_; }
  std::vector<SampleMeta>& meta() { return meta_; }

  bool normalized() const { return normalized_; }
  void set_normalized(bool v) { normalized_ = v; }

  // Checks every structural invariant; throws on the first violation.
  void validate() const;

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<float> data_;
  std::vector<SampleMeta> meta_;
  bool normalized_ = false;
};

// Rows whose L2 norm is exactly zero. Callers may warn; propagation treats
// them as ordinary points.
std::size_t count_zero_rows(const FeatureSet& fs);

// ---------------------------------------------------------------------------
// Hyperparameters
// ---------------------------------------------------------------------------

enum class Mode : std::uint8_t { Global, CrossCamera, Local };

struct Params {
  int k = 15;
  double gamma = 0.2;
  int iters = 3;
  double alpha = 0.7;
  double lambda = 10.0;
  bool symmetrize = true;
  bool renormalize = true;
  bool recompute_graph = true;
  Mode mode = Mode::Global;

  void validate() const {
    if (k < 1) throw ValidationError("k must be >= 1");
    if (!(gamma > 0.0)) throw ValidationError("gamma must be > 0");
    if (iters < 0) throw ValidationError("iters must be >= 0");
    if (alpha < 0.0 || alpha > 1.0)
      throw ValidationError("alpha must be in [0,1]");
    if (lambda < 0.0) throw ValidationError("lambda must be >= 0");
  }
};

}  // namespace gcr
