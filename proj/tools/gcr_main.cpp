// gcr: k-NN graph feature propagation re-ranking for visual retrieval.
// Subcommands: rerank, rerank-video, eval, gen-synth, graph-cache.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gcr/cross_camera.hpp"
#include "gcr/evaluation.hpp"
#include "gcr/feature_store.hpp"
#include "gcr/knn_graph.hpp"
#include "gcr/parallel.hpp"
#include "gcr/propagation.hpp"
#include "gcr/synth.hpp"
#include "gcr/video_profile.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t fnv1a64_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw gcr::IoFailure("cannot open for checksum: " + path.string());
  std::uint64_t hash = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001b3ull;
    }
    if (got < static_cast<std::streamsize>(sizeof(buf))) break;
  }
  return hash;
}

json params_json(const gcr::Params& p) {
  return json{{"k", p.k},
              {"gamma", p.gamma},
              {"iters", p.iters},
              {"alpha", p.alpha},
              {"lambda", p.lambda},
              {"symmetrize", p.symmetrize},
              {"renormalize", p.renormalize},
              {"recompute_graph", p.recompute_graph}};
}

// Reproducibility record written next to the first output.
void write_run_record(const std::string& subcommand, const json& config,
                      const std::vector<fs::path>& inputs,
                      const std::vector<fs::path>& outputs) {
  if (outputs.empty()) return;
  json rec;
  rec["subcommand"] = subcommand;
  rec["config"] = config;
  rec["inputs"] = json::array();
  for (const auto& in : inputs) {
    char hex[24];
    std::snprintf(hex, sizeof(hex), "%016" PRIx64, fnv1a64_file(in));
    rec["inputs"].push_back({{"path", in.string()}, {"fnv1a64", hex}});
  }
  rec["outputs"] = json::array();
  for (const auto& out : outputs) rec["outputs"].push_back(out.string());

  const fs::path record_path = outputs.front().string() + ".run.json";
  std::ofstream out(record_path, std::ios::trunc);
  if (!out) throw gcr::IoFailure("cannot write run record " + record_path.string());
  out << rec.dump(2) << '\n';
}

struct CommonOpts {
  gcr::Params params;
  int workers = 0;
};

void add_param_flags(CLI::App* app, CommonOpts& o) {
  app->add_option("--k", o.params.k, "neighbor count")->capture_default_str();
  app->add_option("--gamma", o.params.gamma, "similarity temperature")
      ->capture_default_str();
  app->add_option("--iters", o.params.iters, "propagation iterations")
      ->capture_default_str();
  app->add_option("--alpha", o.params.alpha,
                  "global weight for cross-camera fusion")
      ->capture_default_str();
  app->add_option("--lambda", o.params.lambda,
                  "profile regularization weight")
      ->capture_default_str();
  app->add_flag("--symmetrize,!--no-symmetrize", o.params.symmetrize,
                "symmetrize similarity graphs");
  app->add_flag("--renormalize,!--no-renormalize", o.params.renormalize,
                "unit-normalize rows after each iteration");
  app->add_flag("--recompute-graph,!--no-recompute-graph",
                o.params.recompute_graph, "rebuild graphs every iteration");
  app->add_option("--workers", o.workers,
                  "worker threads (0 = GCR_WORKERS env or hardware)");
}

void warn_zero_rows(const gcr::FeatureSet& fsdata) {
  const std::size_t zeros = gcr::count_zero_rows(fsdata);
  if (zeros > 0)
    std::cerr << "warning: " << zeros << " zero feature row(s)\n";
}

void print_timings(const gcr::StageTimings& t, bool with_profile = false) {
  if (with_profile)
    std::printf("timing: profile generation %.1f ms, graph build %.1f ms, "
                "propagation %.1f ms\n",
                t.profile_ms, t.graph_ms, t.propagate_ms);
  else
    std::printf("timing: graph build %.1f ms, propagation %.1f ms\n",
                t.graph_ms, t.propagate_ms);
}

void print_report_row(const char* name, const gcr::EvalReport& r) {
  const double rank1 = r.cmc.empty() ? 0.0 : r.cmc.front();
  const double rank5 = r.cmc.size() >= 5 ? r.cmc[4] : r.cmc.back();
  std::printf("%-12s %8.4f %8.4f %8.4f %9zu %9zu\n", name, rank1, rank5, r.mAP,
              r.num_queries, r.num_skipped);
}

int cmd_rerank(const CommonOpts& o, const std::string& input,
               const std::string& manifest, const std::string& output,
               const std::string& mode, const std::string& graph_cache) {
  gcr::Params p = o.params;
  if (mode == "global")
    p.mode = gcr::Mode::Global;
  else if (mode == "cross-camera")
    p.mode = gcr::Mode::CrossCamera;
  else if (mode == "local")
    p.mode = gcr::Mode::Local;
  else
    throw gcr::ValidationError("unknown mode '" + mode + "'");
  p.validate();

  const fs::path in_path = input;
  const fs::path man_path =
      manifest.empty() ? gcr::manifest_path_for(in_path) : fs::path(manifest);
  const gcr::FeatureSet fsdata = gcr::load_features(in_path, man_path);
  warn_zero_rows(fsdata);

  gcr::StageTimings timings;
  gcr::FeatureSet result;
  if (!graph_cache.empty()) {
    if (p.mode != gcr::Mode::Global)
      throw gcr::ValidationError("--graph requires --mode global");
    auto [g, info] = gcr::load_graph(graph_cache);
    result = gcr::run_with_fixed_graph(fsdata, g, p, o.workers, &timings);
  } else {
    switch (p.mode) {
      case gcr::Mode::Global:
        result = gcr::run_global(fsdata, p, o.workers, &timings);
        break;
      case gcr::Mode::CrossCamera:
        result = gcr::run_cross_camera(fsdata, p, o.workers, &timings);
        break;
      case gcr::Mode::Local:
        result = gcr::run_local(fsdata, p, o.workers, &timings);
        break;
    }
  }

  const fs::path out_path = output;
  const fs::path out_manifest = gcr::manifest_path_for(out_path);
  gcr::save_features(result, out_path, out_manifest);
  gcr::load_features(out_path, out_manifest).validate();  // output validation

  json config = params_json(p);
  config["mode"] = mode;
  config["workers"] = o.workers;
  if (!graph_cache.empty()) config["graph_cache"] = graph_cache;
  std::vector<fs::path> inputs = {in_path, man_path};
  if (!graph_cache.empty()) inputs.push_back(graph_cache);
  write_run_record("rerank", config, inputs, {out_path, out_manifest});

  print_timings(timings);
  std::printf("wrote %s (%zu x %zu)\n", out_path.string().c_str(),
              result.size(), result.dim());
  return 0;
}

int cmd_rerank_video(const CommonOpts& o, const std::string& input,
                     const std::string& manifest, const std::string& output,
                     const std::string& profile) {
  gcr::Params p = o.params;
  p.mode = gcr::Mode::CrossCamera;
  p.validate();
  gcr::ProfileMethod method;
  if (profile == "closed-form")
    method = gcr::ProfileMethod::ClosedForm;
  else if (profile == "mean")
    method = gcr::ProfileMethod::Mean;
  else
    throw gcr::ValidationError("unknown profile method '" + profile + "'");

  const fs::path in_path = input;
  const fs::path man_path =
      manifest.empty() ? gcr::manifest_path_for(in_path) : fs::path(manifest);
  const gcr::FeatureSet fsdata = gcr::load_features(in_path, man_path);
  warn_zero_rows(fsdata);

  gcr::StageTimings timings;
  const gcr::ProfileSet profiles =
      gcr::run_gcrv(fsdata, p, method, o.workers, &timings);

  const fs::path out_path = output;
  const fs::path out_manifest = gcr::manifest_path_for(out_path);
  gcr::save_features(gcr::to_feature_set(profiles), out_path, out_manifest);
  gcr::load_features(out_path, out_manifest).validate();

  json config = params_json(p);
  config["profile"] = profile;
  config["workers"] = o.workers;
  write_run_record("rerank-video", config, {in_path, man_path},
                   {out_path, out_manifest});

  print_timings(timings, /*with_profile=*/true);
  std::printf("wrote %s (%zu tracklet profiles, dim %zu)\n",
              out_path.string().c_str(), profiles.count(), profiles.dim());
  return 0;
}

gcr::EvalReport eval_features(const fs::path& path, const fs::path& manifest,
                              gcr::Protocol protocol, std::size_t max_rank) {
  const gcr::FeatureSet fsdata = gcr::load_features(path, manifest);
  const gcr::FeatureSet queries = gcr::subset_by_split(fsdata, gcr::Split::Query);
  const gcr::FeatureSet gallery =
      gcr::subset_by_split(fsdata, gcr::Split::Gallery);
  const gcr::RankResult r = gcr::rank(queries, gallery);
  return gcr::evaluate_reid(r, queries.meta(), gallery.meta(), protocol,
                            max_rank);
}

int cmd_eval(const std::string& input, const std::string& manifest,
             const std::string& protocol_name, std::size_t max_rank,
             const std::string& report_path, const std::string& compare_input,
             const std::string& compare_manifest) {
  gcr::Protocol protocol;
  if (protocol_name == "cross-camera")
    protocol = gcr::Protocol::CrossCamera;
  else if (protocol_name == "plain")
    protocol = gcr::Protocol::Plain;
  else
    throw gcr::ValidationError("unknown protocol '" + protocol_name + "'");

  const fs::path in_path = input;
  const fs::path man_path =
      manifest.empty() ? gcr::manifest_path_for(in_path) : fs::path(manifest);
  const gcr::EvalReport report =
      eval_features(in_path, man_path, protocol, max_rank);

  std::printf("%-12s %8s %8s %8s %9s %9s\n", "set", "Rank-1", "Rank-5", "mAP",
              "queries", "skipped");
  print_report_row("input", report);
  if (report.num_queries == 0)
    std::printf("note: every query was skipped (no valid positives)\n");

  std::vector<fs::path> inputs = {in_path, man_path};
  std::vector<fs::path> outputs;

  if (!compare_input.empty()) {
    const fs::path cmp_path = compare_input;
    const fs::path cmp_man = compare_manifest.empty()
                                 ? gcr::manifest_path_for(cmp_path)
                                 : fs::path(compare_manifest);
    const gcr::EvalReport other =
        eval_features(cmp_path, cmp_man, protocol, max_rank);
    print_report_row("compare", other);
    const gcr::EvalDelta delta = gcr::compare(report, other);
    std::printf("%-12s %+8.4f %8s %+8.4f\n", "delta",
                delta.cmc_delta.empty() ? 0.0 : delta.cmc_delta.front(), "",
                delta.map_delta);
    inputs.push_back(cmp_path);
    inputs.push_back(cmp_man);
  }

  if (!report_path.empty()) {
    std::ofstream out(report_path, std::ios::trunc);
    if (!out) throw gcr::IoFailure("cannot write report " + report_path);
    out << gcr::report_to_json(report) << '\n';
    out.flush();
    if (!out) throw gcr::IoFailure("failed writing report " + report_path);
    outputs.push_back(report_path);
    json config = {{"protocol", protocol_name}, {"max_rank", max_rank}};
    write_run_record("eval", config, inputs, outputs);
  }
  return 0;
}

int cmd_gen_synth(const gcr::SynthSpec& spec, const std::string& out_prefix) {
  const gcr::FeatureSet fsdata = gcr::generate(spec);
  const fs::path features = out_prefix + ".gcrf";
  const fs::path manifest = gcr::manifest_path_for(features);
  gcr::save_features(fsdata, features, manifest);
  gcr::load_features(features, manifest).validate();

  const fs::path sidecar = out_prefix + ".synth.json";
  std::ofstream side(sidecar, std::ios::trunc);
  if (!side) throw gcr::IoFailure("cannot write " + sidecar.string());
  side << gcr::spec_to_json(spec) << '\n';

  write_run_record("gen-synth", json::parse(gcr::spec_to_json(spec)), {},
                   {features, manifest, sidecar});
  std::printf("wrote %s (%zu x %d)\n", features.string().c_str(), fsdata.size(),
              spec.dim);
  return 0;
}

int cmd_graph_cache(const CommonOpts& o, const std::string& input,
                    const std::string& manifest, const std::string& output,
                    const std::string& restrict_name, bool do_symmetrize) {
  gcr::Params p = o.params;
  p.validate();
  gcr::GraphRestrict restrict;
  if (restrict_name == "all")
    restrict = gcr::GraphRestrict::All;
  else if (restrict_name == "cross-camera")
    restrict = gcr::GraphRestrict::CrossCameraOnly;
  else
    throw gcr::ValidationError("unknown restrict '" + restrict_name + "'");

  const fs::path in_path = input;
  const fs::path man_path =
      manifest.empty() ? gcr::manifest_path_for(in_path) : fs::path(manifest);
  const gcr::FeatureSet fsdata = gcr::load_features(in_path, man_path);

  gcr::NeighborGraph g = gcr::build_graph(fsdata, p, restrict, o.workers);
  if (do_symmetrize) g = gcr::symmetrize(g);
  const gcr::GraphCacheInfo info{fsdata.size(), p.k, p.gamma, restrict,
                                 g.symmetric};
  gcr::save_graph(g, info, output);
  gcr::load_graph(output);  // output validation

  json config = params_json(p);
  config["restrict"] = restrict_name;
  config["symmetrized"] = do_symmetrize;
  write_run_record("graph-cache", config, {in_path, man_path},
                   {output, output + ".json"});
  std::printf("wrote %s (%zu nodes, %zu edges)\n", output.c_str(), g.n,
              g.edge_count());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"k-NN graph feature propagation re-ranking"};
  app.require_subcommand(1);

  // rerank
  CommonOpts rr;
  std::string rr_input, rr_manifest, rr_output, rr_graph;
  std::string rr_mode = "global";
  CLI::App* rerank = app.add_subcommand("rerank", "update image features");
  rerank->add_option("--input", rr_input, "GCRF feature file")->required();
  rerank->add_option("--manifest", rr_manifest,
                     "manifest CSV (default: derived from --input)");
  rerank->add_option("--output", rr_output, "output GCRF path")->required();
  rerank->add_option("--mode", rr_mode, "global | cross-camera | local")
      ->capture_default_str();
  rerank->add_option("--graph", rr_graph,
                     "precomputed graph cache CSV (global mode)");
  add_param_flags(rerank, rr);

  // rerank-video
  CommonOpts rv;
  std::string rv_input, rv_manifest, rv_output;
  std::string rv_profile = "closed-form";
  CLI::App* rerank_video =
      app.add_subcommand("rerank-video", "tracklet profiles + re-ranking");
  rerank_video->add_option("--input", rv_input, "GCRF feature file")->required();
  rerank_video->add_option("--manifest", rv_manifest,
                           "manifest CSV (default: derived from --input)");
  rerank_video->add_option("--output", rv_output, "output GCRF path")
      ->required();
  rerank_video->add_option("--profile", rv_profile, "closed-form | mean")
      ->capture_default_str();
  add_param_flags(rerank_video, rv);

  // eval
  std::string ev_input, ev_manifest, ev_report, ev_compare, ev_compare_manifest;
  std::string ev_protocol = "cross-camera";
  std::size_t ev_max_rank = 20;
  CLI::App* eval = app.add_subcommand("eval", "rank and score a feature file");
  eval->add_option("--input", ev_input, "GCRF feature file")->required();
  eval->add_option("--manifest", ev_manifest,
                   "manifest CSV (default: derived from --input)");
  eval->add_option("--protocol", ev_protocol, "cross-camera | plain")
      ->capture_default_str();
  eval->add_option("--max-rank", ev_max_rank, "CMC depth")->capture_default_str();
  eval->add_option("--report", ev_report, "write JSON report here");
  eval->add_option("--compare", ev_compare, "second GCRF file to compare");
  eval->add_option("--compare-manifest", ev_compare_manifest,
                   "manifest for --compare");

  // gen-synth
  gcr::SynthSpec spec;
  std::string gs_out;
  CLI::App* gen = app.add_subcommand("gen-synth", "generate synthetic features");
  gen->add_option("--out", gs_out, "output prefix")->required();
  gen->add_option("--ids", spec.num_ids, "identities")->capture_default_str();
  gen->add_option("--cams", spec.cams, "cameras")->capture_default_str();
  gen->add_option("--frames", spec.frames_per_tracklet, "frames per tracklet")
      ->capture_default_str();
  gen->add_option("--dim", spec.dim, "feature dimensionality")
      ->capture_default_str();
  gen->add_option("--std", spec.cluster_std, "intra-identity noise sigma")
      ->capture_default_str();
  gen->add_option("--shift", spec.camera_shift, "camera bias magnitude")
      ->capture_default_str();
  gen->add_option("--seed", spec.seed, "RNG seed")->capture_default_str();

  // graph-cache
  CommonOpts gc;
  std::string gc_input, gc_manifest, gc_output;
  std::string gc_restrict = "all";
  bool gc_symmetrize = false;
  CLI::App* graph_cache =
      app.add_subcommand("graph-cache", "build and store a k-NN graph");
  graph_cache->add_option("--input", gc_input, "GCRF feature file")->required();
  graph_cache->add_option("--manifest", gc_manifest,
                          "manifest CSV (default: derived from --input)");
  graph_cache->add_option("--output", gc_output, "graph CSV path")->required();
  graph_cache->add_option("--restrict", gc_restrict, "all | cross-camera")
      ->capture_default_str();
  graph_cache->add_flag("--symmetrized", gc_symmetrize,
                        "store the symmetrized graph");
  add_param_flags(graph_cache, gc);

  CLI11_PARSE(app, argc, argv);

  try {
    if (rerank->parsed())
      return cmd_rerank(rr, rr_input, rr_manifest, rr_output, rr_mode, rr_graph);
    if (rerank_video->parsed())
      return cmd_rerank_video(rv, rv_input, rv_manifest, rv_output, rv_profile);
    if (eval->parsed())
      return cmd_eval(ev_input, ev_manifest, ev_protocol, ev_max_rank,
                      ev_report, ev_compare, ev_compare_manifest);
    if (gen->parsed()) return cmd_gen_synth(spec, gs_out);
    if (graph_cache->parsed())
      return cmd_graph_cache(gc, gc_input, gc_manifest, gc_output, gc_restrict,
                             gc_symmetrize);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
