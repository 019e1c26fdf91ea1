#include "gcr/knn_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "gcr/parallel.hpp"
#include "json.hpp"

namespace gcr {

namespace {

// min(limit, #eligible) nearest candidates by (distance, index); candidates
// chosen by `eligible`, which must reject the anchor itself.
template <typename Pred>
std::vector<std::uint32_t> select_nearest(std::span<const double> dists,
                                          std::size_t limit, Pred eligible,
                                          std::vector<std::pair<double, std::uint32_t>>& scratch) {
  scratch.clear();
  for (std::size_t j = 0; j < dists.size(); ++j)
    if (eligible(j)) scratch.emplace_back(dists[j], static_cast<std::uint32_t>(j));
  const std::size_t m = std::min(limit, scratch.size());
  std::partial_sort(scratch.begin(), scratch.begin() + m, scratch.end());
  std::vector<std::uint32_t> out(m);
  for (std::size_t t = 0; t < m; ++t) out[t] = scratch[t].second;
  return out;
}

}  // namespace

void NeighborGraph::validate() const {
  if (neighbors.size() != n) throw ValidationError("graph adjacency size != n");
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t prev = 0;
    bool first = true;
    for (const Edge& e : neighbors[i]) {
      if (e.dst >= n) throw ValidationError("edge destination out of range");
      if (e.dst == i) throw ValidationError("self edge in neighbor list");
      if (!first && e.dst <= prev)
        throw ValidationError("neighbor list not strictly ascending");
      if (!(e.weight > 0.0) || e.weight > 1.0)
        throw ValidationError("edge weight outside (0,1]");
      prev = e.dst;
      first = false;
    }
  }
  if (symmetric) {
    for (std::size_t i = 0; i < n; ++i) {
      for (const Edge& e : neighbors[i]) {
        const auto& back = neighbors[e.dst];
        auto it = std::lower_bound(back.begin(), back.end(), static_cast<std::uint32_t>(i),
                                   [](const Edge& x, std::uint32_t v) { return x.dst < v; });
        if (it == back.end() || it->dst != i)
          throw ValidationError("missing mirror edge in symmetric graph");
        if (std::abs(it->weight - e.weight) > 1e-7)
          throw ValidationError("mirror edge weight mismatch");
      }
    }
  }
}

std::vector<double> pairwise_sq_dists(const FeatureSet& fs, std::size_t i) {
  const std::size_t n = fs.size(), d = fs.dim();
  std::vector<double> out(n);
  const float* xi = fs.data().data() + i * d;
  for (std::size_t j = 0; j < n; ++j) {
    const float* xj = fs.data().data() + j * d;
    double acc = 0.0;
    for (std::size_t t = 0; t < d; ++t) {
      const double diff = static_cast<double>(xi[t]) - static_cast<double>(xj[t]);
      acc += diff * diff;
    }
    out[j] = acc;
  }
  out[i] = 0.0;
  return out;
}

std::vector<std::uint32_t> knn_select(std::span<const double> dists, int k,
                                      std::size_t exclude) {
  if (k < 1) throw ValidationError("knn_select requires k >= 1");
  std::vector<std::pair<double, std::uint32_t>> scratch;
  return select_nearest(dists, static_cast<std::size_t>(k),
                        [exclude](std::size_t j) { return j != exclude; }, scratch);
}

NeighborGraph build_graph(const FeatureSet& fs, const Params& p,
                          GraphRestrict restrict, int workers) {
  p.validate();
  const std::size_t n = fs.size(), d = fs.dim();
  NeighborGraph g;
  g.n = n;
  g.symmetric = false;
  g.neighbors.resize(n);

  parallel_chunks(n, workers, [&](std::size_t begin, std::size_t end) {
    std::vector<double> dist(n);
    std::vector<std::pair<double, std::uint32_t>> scratch;
    scratch.reserve(n);
    for (std::size_t i = begin; i < end; ++i) {
      const float* xi = fs.data().data() + i * d;
      for (std::size_t j = 0; j < n; ++j) {
        const float* xj = fs.data().data() + j * d;
        double acc = 0.0;
        for (std::size_t t = 0; t < d; ++t) {
          const double diff = static_cast<double>(xi[t]) - static_cast<double>(xj[t]);
          acc += diff * diff;
        }
        dist[j] = acc;
      }
      const std::int32_t cam = fs.meta()[i].camera;
      std::vector<std::uint32_t> sel;
      if (restrict == GraphRestrict::CrossCameraOnly) {
        sel = select_nearest(dist, static_cast<std::size_t>(p.k),
                             [&](std::size_t j) { return j != i && fs.meta()[j].camera != cam; },
                             scratch);
      } else {
        sel = select_nearest(dist, static_cast<std::size_t>(p.k),
                             [&](std::size_t j) { return j != i; }, scratch);
      }
      auto& edges = g.neighbors[i];
      edges.reserve(sel.size());
      for (std::uint32_t j : sel) {
        const double w = std::exp(-dist[j] / p.gamma);
        // An underflowed weight contributes nothing to sums; drop the edge.
        if (w > 0.0) edges.push_back({j, w});
      }
      std::sort(edges.begin(), edges.end(),
                [](const NeighborGraph::Edge& a, const NeighborGraph::Edge& b) {
                  return a.dst < b.dst;
                });
    }
  });
  return g;
}

NeighborGraph symmetrize(const NeighborGraph& g) {
  if (g.symmetric) throw ValidationError("graph already symmetric");
  NeighborGraph out;
  out.n = g.n;
  out.symmetric = true;
  out.neighbors.resize(g.n);

  // tag orders the two possible contributions per (node, dst) pair so the
  // halves always add in the same sequence: own out-edge first, then inbound.
  struct Contribution {
    std::uint32_t dst;
    std::uint8_t tag;
    double half;
  };
  std::vector<std::vector<Contribution>> contrib(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    for (const auto& e : g.neighbors[i]) {
      contrib[i].push_back({e.dst, 0, e.weight / 2.0});
      contrib[e.dst].push_back({static_cast<std::uint32_t>(i), 1, e.weight / 2.0});
    }
  }
  for (std::size_t i = 0; i < g.n; ++i) {
    auto& c = contrib[i];
    std::sort(c.begin(), c.end(), [](const Contribution& a, const Contribution& b) {
      return a.dst != b.dst ? a.dst < b.dst : a.tag < b.tag;
    });
    auto& edges = out.neighbors[i];
    for (std::size_t t = 0; t < c.size();) {
      double w = c[t].half;
      std::size_t u = t + 1;
      while (u < c.size() && c[u].dst == c[t].dst) w += c[u++].half;
      edges.push_back({c[t].dst, w});
      t = u;
    }
  }
  return out;
}

std::pair<DegreeVector, DegreeVector> degrees(const NeighborGraph& g) {
  DegreeVector row(g.n, 1.0);  // implicit diagonal weight 1
  DegreeVector col(g.n, 1.0);
  for (std::size_t i = 0; i < g.n; ++i)
    for (const auto& e : g.neighbors[i]) {
      row[i] += e.weight;
      col[e.dst] += e.weight;
    }
  return {std::move(row), std::move(col)};
}

void save_graph(const NeighborGraph& g, const GraphCacheInfo& info,
                const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoFailure("cannot open for writing: " + path.string());
  out << "src,dst,weight\n";
  char buf[64];
  for (std::size_t i = 0; i < g.n; ++i)
    for (const auto& e : g.neighbors[i]) {
      std::snprintf(buf, sizeof(buf), "%zu,%u,%.9g\n", i, e.dst, e.weight);
      out << buf;
    }
  out.flush();
  if (!out) throw IoFailure("failed writing " + path.string());

  nlohmann::json side = {
      {"n", g.n},
      {"k", info.k},
      {"gamma", info.gamma},
      {"restrict", info.restrict == GraphRestrict::All ? "all" : "cross_camera"},
      {"symmetric", g.symmetric},
  };
  std::ofstream sout(path.string() + ".json", std::ios::trunc);
  if (!sout) throw IoFailure("cannot write graph sidecar");
  sout << side.dump(2) << '\n';
  sout.flush();
  if (!sout) throw IoFailure("failed writing graph sidecar");
}

std::pair<NeighborGraph, GraphCacheInfo> load_graph(
    const std::filesystem::path& path) {
  std::ifstream sin(path.string() + ".json");
  if (!sin) throw IoFailure("cannot open graph sidecar " + path.string() + ".json");
  nlohmann::json side;
  try {
    sin >> side;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedHeader(std::string("bad graph sidecar: ") + e.what());
  }

  GraphCacheInfo info;
  NeighborGraph g;
  try {
    g.n = side.at("n").get<std::size_t>();
    info.n = g.n;
    info.k = side.at("k").get<int>();
    info.gamma = side.at("gamma").get<double>();
    const std::string r = side.at("restrict").get<std::string>();
    if (r == "all")
      info.restrict = GraphRestrict::All;
    else if (r == "cross_camera")
      info.restrict = GraphRestrict::CrossCameraOnly;
    else
      throw MalformedHeader("bad restrict value in graph sidecar");
    g.symmetric = side.at("symmetric").get<bool>();
    info.symmetric = g.symmetric;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedHeader(std::string("bad graph sidecar: ") + e.what());
  }
  g.neighbors.resize(g.n);

  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open graph cache " + path.string());
  std::string line;
  if (!std::getline(in, line) || (line != "src,dst,weight" && line != "src,dst,weight\r"))
    throw MalformedHeader("graph cache: bad header row");
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t src = 0;
    std::uint32_t dst = 0;
    double w = 0.0;
    if (std::sscanf(line.c_str(), "%zu,%u,%lf", &src, &dst, &w) != 3)
      throw MalformedHeader("graph cache: bad edge row '" + line + "'");
    if (src >= g.n || dst >= g.n)
      throw ValidationError("graph cache: edge endpoint out of range");
    g.neighbors[src].push_back({dst, w});
  }
  for (auto& edges : g.neighbors)
    std::sort(edges.begin(), edges.end(),
              [](const NeighborGraph::Edge& a, const NeighborGraph::Edge& b) {
                return a.dst < b.dst;
              });
  g.validate();
  return {std::move(g), info};
}

}  // namespace gcr
