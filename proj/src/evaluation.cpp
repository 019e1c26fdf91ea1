#include "gcr/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "json.hpp"

namespace gcr {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

FeatureSet subset_by_split(const FeatureSet& fs, Split split) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fs.size(); ++i)
    if (fs.meta()[i].split == split) rows.push_back(i);
  if (rows.empty()) throw ValidationError("no rows with requested split");
  FeatureSet out(rows.size(), fs.dim());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = fs.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
    out.meta()[i] = fs.meta()[rows[i]];
  }
  out.set_normalized(fs.normalized());
  return out;
}

RankResult rank(const FeatureSet& queries, const FeatureSet& gallery) {
  if (queries.dim() != gallery.dim())
    throw DimensionMismatch("query dim " + std::to_string(queries.dim()) +
                            " != gallery dim " + std::to_string(gallery.dim()));
  const std::size_t nq = queries.size(), ng = gallery.size(), d = queries.dim();
  RankResult r;
  r.order.resize(nq);
  r.dists.resize(nq);
  std::vector<std::pair<double, std::uint32_t>> scored(ng);
  for (std::size_t q = 0; q < nq; ++q) {
    const float* xq = queries.data().data() + q * d;
    for (std::size_t g = 0; g < ng; ++g) {
      const float* xg = gallery.data().data() + g * d;
      double acc = 0.0;
      for (std::size_t t = 0; t < d; ++t) {
        const double diff = static_cast<double>(xq[t]) - static_cast<double>(xg[t]);
        acc += diff * diff;
      }
      scored[g] = {acc, static_cast<std::uint32_t>(g)};
    }
    std::sort(scored.begin(), scored.end());
    r.order[q].resize(ng);
    r.dists[q].resize(ng);
    for (std::size_t g = 0; g < ng; ++g) {
      r.order[q][g] = scored[g].second;
      r.dists[q][g] = scored[g].first;
    }
  }
  return r;
}

EvalReport evaluate_reid(const RankResult& r,
                         const std::vector<SampleMeta>& query_meta,
                         const std::vector<SampleMeta>& gallery_meta,
                         Protocol protocol, std::size_t max_rank) {
  if (r.order.size() != query_meta.size())
    throw ValidationError("rank result does not match query metadata");

  EvalReport report;
  report.cmc.assign(max_rank, 0.0);
  report.per_query_ap.assign(query_meta.size(), kNaN);

  std::vector<std::size_t> first_hit_hist(max_rank, 0);
  double ap_sum = 0.0;

  for (std::size_t q = 0; q < query_meta.size(); ++q) {
    const SampleMeta& qm = query_meta[q];
    std::size_t kept = 0, hits = 0, total_positives = 0;
    double ap = 0.0;
    std::size_t first_hit = 0;  // 1-based; 0 = none

    for (std::uint32_t g : r.order[q]) {
      const SampleMeta& gm = gallery_meta[g];
      if (gm.identity < 0) continue;  // junk
      if (protocol == Protocol::CrossCamera && gm.identity == qm.identity &&
          gm.camera == qm.camera)
        continue;
      ++kept;
      if (gm.identity == qm.identity) {
        ++total_positives;
        ++hits;
        ap += static_cast<double>(hits) / static_cast<double>(kept);
        if (first_hit == 0) first_hit = kept;
      }
    }

    if (total_positives == 0) {
      ++report.num_skipped;
      continue;
    }
    ap /= static_cast<double>(total_positives);
    report.per_query_ap[q] = ap;
    ap_sum += ap;
    ++report.num_queries;
    if (first_hit >= 1 && first_hit <= max_rank) ++first_hit_hist[first_hit - 1];
  }

  if (report.num_queries > 0) {
    report.mAP = ap_sum / static_cast<double>(report.num_queries);
    std::size_t cum = 0;
    for (std::size_t k = 0; k < max_rank; ++k) {
      cum += first_hit_hist[k];
      report.cmc[k] = static_cast<double>(cum) / static_cast<double>(report.num_queries);
    }
  }
  return report;
}

EvalDelta compare(const EvalReport& a, const EvalReport& b) {
  if (a.per_query_ap.size() != b.per_query_ap.size())
    throw QuerySetMismatch("reports cover different query sets");
  EvalDelta delta;
  delta.map_delta = b.mAP - a.mAP;
  const std::size_t kmax = std::min(a.cmc.size(), b.cmc.size());
  delta.cmc_delta.resize(kmax);
  for (std::size_t k = 0; k < kmax; ++k) delta.cmc_delta[k] = b.cmc[k] - a.cmc[k];
  delta.per_query_ap_delta.resize(a.per_query_ap.size(), kNaN);
  for (std::size_t q = 0; q < a.per_query_ap.size(); ++q)
    if (std::isfinite(a.per_query_ap[q]) && std::isfinite(b.per_query_ap[q]))
      delta.per_query_ap_delta[q] = b.per_query_ap[q] - a.per_query_ap[q];
  return delta;
}

std::string report_to_json(const EvalReport& r) {
  nlohmann::json j;
  j["mAP"] = r.mAP;
  j["cmc"] = r.cmc;
  j["num_queries"] = r.num_queries;
  j["num_skipped"] = r.num_skipped;
  nlohmann::json aps = nlohmann::json::array();
  for (double ap : r.per_query_ap) {
    if (std::isfinite(ap))
      aps.push_back(ap);
    else
      aps.push_back(nullptr);
  }
  j["per_query_ap"] = std::move(aps);
  return j.dump(2);
}

EvalReport report_from_json(const std::string& text) {
  EvalReport r;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    r.mAP = j.at("mAP").get<double>();
    r.cmc = j.at("cmc").get<std::vector<double>>();
    r.num_queries = j.at("num_queries").get<std::size_t>();
    r.num_skipped = j.at("num_skipped").get<std::size_t>();
    for (const auto& ap : j.at("per_query_ap"))
      r.per_query_ap.push_back(ap.is_null() ? kNaN : ap.get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw MalformedHeader(std::string("bad eval report JSON: ") + e.what());
  }
  return r;
}

}  // namespace gcr
