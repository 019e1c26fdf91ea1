#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gcr/types.hpp"

namespace gcr {

enum class Protocol : std::uint8_t { CrossCamera, Plain };

// Per-query gallery ordering by ascending squared Euclidean distance.
// Indices are positions in the gallery set passed to rank().
struct RankResult {
  std::vector<std::vector<std::uint32_t>> order;
  std::vector<std::vector<double>> dists;  // non-decreasing along each list
};

struct EvalReport {
  double mAP = 0.0;
  std::vector<double> cmc;  // cmc[k-1] = Rank-k accuracy
  std::size_t num_queries = 0;  // queries included in the metrics
  std::size_t num_skipped = 0;  // queries with no valid positive
  // AP per query in input order; NaN for skipped queries.
  std::vector<double> per_query_ap;
};

struct EvalDelta {
  double map_delta = 0.0;                 // b - a
  std::vector<double> cmc_delta;          // element-wise b - a
  std::vector<double> per_query_ap_delta; // NaN where either side skipped
};

// Full sort by squared Euclidean distance, ties by ascending gallery index.
RankResult rank(const FeatureSet& queries, const FeatureSet& gallery);

// CrossCamera: drops gallery items sharing both identity and camera with the
// query, plus junk (identity -1); AP = (1/R) * sum over hits of
// hits-so-far / rank. Queries with no remaining positive are skipped and
// counted. Plain: only junk is dropped.
EvalReport evaluate_reid(const RankResult& r,
                         const std::vector<SampleMeta>& query_meta,
                         const std::vector<SampleMeta>& gallery_meta,
                         Protocol protocol, std::size_t max_rank = 20);

// Returns b - a deltas; throws QuerySetMismatch on different query counts.
EvalDelta compare(const EvalReport& a, const EvalReport& b);

// JSON layout:
// {"mAP": float, "cmc": [float], "num_queries": int, "num_skipped": int,
//  "per_query_ap": [float|null]}
std::string report_to_json(const EvalReport& r);
EvalReport report_from_json(const std::string& text);

// Extracts the rows of the given split into a standalone FeatureSet.
FeatureSet subset_by_split(const FeatureSet& fs, Split split);

}  // namespace gcr
