// Copyright 2026 The Panoweave Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PANOWEAVE_CLI_H_
#define PANOWEAVE_CLI_H_

// The panoweave command line: ingest-captions, generate, discretize,
// augment, stats, preview. Exit codes: 0 success, 1 runtime failure,
// 2 usage error.

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <filesystem>
#include <iostream>
#include <memory>
#include <mutex>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "panoweave/caption_store.h"
#include "panoweave/env_augment.h"
#include "panoweave/error.h"
#include "panoweave/http_backend.h"
#include "panoweave/image_io.h"
#include "panoweave/outpaint_engine.h"
#include "panoweave/pipeline_config.h"
#include "panoweave/procedural_backend.h"

namespace panoweave {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

namespace internal {

inline void UseStderrLogger() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = std::make_shared<spdlog::logger>(
        "panoweave", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    spdlog::set_default_logger(logger);
  });
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Backend for `settings`; http backends must answer a health probe that
// advertises every capability in `needed`.
inline std::shared_ptr<GenerationBackend> MakeBackend(const BackendSettings& settings,
                                                      std::initializer_list<Capability> needed) {
  if (settings.kind == BackendKind::kProcedural) return std::make_shared<ProceduralBackend>();
  auto http = std::make_shared<HttpBackend>(settings.http);
  const wire::HealthInfo health = http->Health();
  for (Capability c : needed) {
    bool found = false;
    for (const std::string& have : health.capabilities) found = found || have == CapabilityName(c);
    if (!found) {
      throw Error(ErrorCode::kBackendUnavailable, settings.http.base_url +
                                                      " does not offer " + CapabilityName(c));
    }
  }
  spdlog::info("backend {} healthy ({})", settings.http.base_url, health.model_id);
  return http;
}

inline std::optional<ViewIndex> ParseViewFileName(const std::string& file) {
  const std::string prefix = "view_";
  const std::string suffix = ".png";
  if (file.size() <= prefix.size() + suffix.size() || file.rfind(prefix, 0) != 0 ||
      file.compare(file.size() - suffix.size(), suffix.size(), suffix) != 0) {
    return std::nullopt;
  }
  const std::string name = file.substr(prefix.size(), file.size() - prefix.size() - suffix.size());
  const size_t us = name.find('_');
  if (us == std::string::npos) return std::nullopt;
  try {
    size_t a = 0;
    size_t b = 0;
    const int h = std::stoi(name.substr(0, us), &a);
    const int e = std::stoi(name.substr(us + 1), &b);
    if (a != us || b != name.size() - us - 1) return std::nullopt;
    ViewIndex idx{h, e};
    if (!idx.IsValid()) return std::nullopt;
    return idx;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

// Complete environment directories at `path`: the path itself, or
// path/scan/viewpoint below it.
inline std::vector<std::filesystem::path> FindEnvironmentDirs(const std::filesystem::path& path) {
  if (IsEnvironmentComplete(path)) return {path};
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(path)) return out;
  for (const auto& scan : std::filesystem::directory_iterator(path)) {
    if (!scan.is_directory()) continue;
    for (const auto& vp : std::filesystem::directory_iterator(scan.path())) {
      if (vp.is_directory() && IsEnvironmentComplete(vp.path())) out.push_back(vp.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct CommonFlags {
  std::string config_path;
  std::string backend;
  std::string backend_url;
  bool json = false;
};

inline PipelineConfig ResolveConfig(const CommonFlags& flags) {
  PipelineConfig c = ResolvePipelineConfig(flags.config_path);
  if (!flags.backend.empty()) c.backend.kind = ParseBackendKind(flags.backend);
  if (!flags.backend_url.empty()) c.backend.http.base_url = flags.backend_url;
  return c;
}

// ---------------------------------------------------------------------------

struct IngestFlags {
  std::vector<std::string> inputs;
  std::string images;
  std::string store;
};

inline int CmdIngestCaptions(const CommonFlags& common, const IngestFlags& f, std::ostream& out) {
  PipelineConfig config = ResolveConfig(common);
  const std::string store_path = f.store.empty() ? config.paths.captions : f.store;
  if (store_path.empty()) throw UsageError("--store is required");
  if (f.inputs.empty() && f.images.empty()) throw UsageError("nothing to ingest: pass --input or --images");

  CaptionStore store;
  if (std::filesystem::exists(store_path)) store = IngestCaptions(std::filesystem::path(store_path));
  for (const std::string& in : f.inputs) {
    const CaptionStore imported = IngestCaptions(std::filesystem::path(in));
    for (const auto& vp : imported.Viewpoints()) {
      for (const CaptionRecord* r : imported.ViewpointRecords(vp)) store.Upsert(*r);
    }
  }
  WriteCaptions(store, std::filesystem::path(store_path));

  size_t failures = 0;
  size_t captioned = 0;
  if (!f.images.empty()) {
    std::vector<std::pair<CaptionKey, RgbImage>> images;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(f.images)) {
      if (!entry.is_regular_file()) continue;
      const auto idx = ParseViewFileName(entry.path().filename().string());
      if (!idx) continue;
      const std::filesystem::path vp_dir = entry.path().parent_path();
      CaptionKey key{vp_dir.parent_path().filename().string(), vp_dir.filename().string(), *idx};
      images.emplace_back(std::move(key), ReadPng<3>(entry.path()));
    }
    std::sort(images.begin(), images.end(), [](const auto& a, const auto& b) {
      return a.first.ToString() < b.first.ToString();
    });
    auto backend = MakeBackend(config.backend, {Capability::kCaption});
    const std::filesystem::path ckpt =
        std::filesystem::path(store_path).parent_path() / kCheckpointFileName;
    const CaptionBatchResult r = CaptionViews(images, *backend, store, store_path, ckpt);
    failures = r.failures.size();
    captioned = r.records.size();
    WriteCaptions(store, std::filesystem::path(store_path));
  }

  size_t records = 0;
  size_t complete = 0;
  const auto viewpoints = store.Viewpoints();
  for (const auto& vp : viewpoints) {
    records += store.ViewpointRecords(vp).size();
    if (store.IsComplete(vp)) ++complete;
  }
  if (common.json) {
    out << nlohmann::json{{"records", records},
                          {"viewpoints", viewpoints.size()},
                          {"complete_viewpoints", complete},
                          {"captioned", captioned},
                          {"failures", failures}}
               .dump()
        << '\n';
  } else {
    out << "captions: " << records << ", viewpoints: " << viewpoints.size()
        << ", complete: " << complete << ", captioned: " << captioned
        << ", failures: " << failures << '\n';
  }
  return failures == 0 ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------

struct GenerateFlags {
  std::string captions;
  std::string out;
  std::optional<uint64_t> seed;
  std::vector<std::string> scans;
  std::vector<std::string> viewpoints;
  std::optional<int> workers;
};

inline int CmdGenerate(const CommonFlags& common, const GenerateFlags& f, std::ostream& out) {
  PipelineConfig config = ResolveConfig(common);
  if (f.seed) config.outpaint.seed = *f.seed;
  if (f.workers) config.workers = *f.workers;
  if (!f.captions.empty()) config.paths.captions = f.captions;
  if (!f.out.empty()) config.paths.out_dir = f.out;
  if (config.paths.captions.empty()) throw UsageError("--captions is required");
  if (config.paths.out_dir.empty()) throw UsageError("--out is required");
  if (config.workers < 1) throw UsageError("--workers must be at least 1");
  try {
    PlanTraversal(config.outpaint);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kPlanRejected || e.code() == ErrorCode::kInvalidArgument) {
      throw UsageError(e.what());
    }
    throw;
  }

  const CaptionStore store = IngestCaptions(std::filesystem::path(config.paths.captions));
  auto backend = MakeBackend(config.backend, {Capability::kGenerate, Capability::kOutpaint});
  const std::string run_hash = config.Hash();
  spdlog::info("run config hash {}", run_hash);

  const std::set<std::string> scans(f.scans.begin(), f.scans.end());
  const std::set<std::string> vps(f.viewpoints.begin(), f.viewpoints.end());
  std::vector<ViewpointKey> jobs;
  size_t skipped = 0;
  for (const ViewpointKey& vp : store.Viewpoints()) {
    if (!scans.empty() && !scans.count(vp.scan_id)) continue;
    if (!vps.empty() && !vps.count(vp.viewpoint_id)) continue;
    if (IsEnvironmentComplete(EnvironmentDir(config.paths.out_dir, vp))) {
      ++skipped;
      continue;
    }
    jobs.push_back(vp);
  }

  std::atomic<size_t> generated{0};
  std::mutex failed_mu;
  std::vector<std::string> failed;
  RunWorkerPool(jobs, config.workers, [&](const ViewpointKey& vp) {
    const std::string name = vp.scan_id + "/" + vp.viewpoint_id;
    try {
      const ViewpointCaptions captions = ViewpointCaptions::FromStore(store, vp);
      PanoEnvironment env = GeneratePanorama(captions, config.outpaint, *backend);
      env.provenance.run_config_hash = run_hash;
      SaveEnvironment(env, EnvironmentDir(config.paths.out_dir, vp));
      ++generated;
      spdlog::info("generated {}", name);
    } catch (const Error& e) {
      spdlog::error("{} failed: {}", name, e.what());
      std::lock_guard<std::mutex> lock(failed_mu);
      failed.push_back(name);
    }
  });
  std::sort(failed.begin(), failed.end());

  if (common.json) {
    out << nlohmann::json{{"generated", generated.load()},
                          {"skipped", skipped},
                          {"failed", failed.size()},
                          {"failures", failed},
                          {"config_hash", run_hash}}
               .dump()
        << '\n';
  } else {
    out << "generated: " << generated.load() << ", skipped: " << skipped
        << ", failed: " << failed.size() << '\n';
  }
  return failed.empty() ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------

struct DiscretizeFlags {
  std::string env;
  std::string out;
};

inline int CmdDiscretize(const CommonFlags& common, const DiscretizeFlags& f, std::ostream& out) {
  const std::vector<std::filesystem::path> dirs = FindEnvironmentDirs(f.env);
  if (dirs.empty()) {
    spdlog::error("no complete environments under {}", f.env);
    return kExitFailure;
  }
  size_t views = 0;
  for (const auto& dir : dirs) {
    const EquirectCanvas canvas = LoadCanvas(dir / kPanoramaBase);
    const Provenance prov =
        Provenance::FromJson(nlohmann::json::parse(ReadFileBytes(dir / kProvenanceFile)));
    const auto images = DiscretizeCanvas(canvas, prov.config.view_grid);
    std::filesystem::path target = dir;
    if (!f.out.empty()) {
      target = dirs.size() == 1 && dir == std::filesystem::path(f.env)
                   ? std::filesystem::path(f.out)
                   : std::filesystem::path(f.out) / prov.scan_id / prov.viewpoint_id;
      std::filesystem::create_directories(target);
    }
    for (const ViewIndex& idx : AllViewIndices()) {
      WritePng(target / ViewFileName(idx), images[idx.Ordinal()].pixels);
      ++views;
    }
  }
  if (common.json) {
    out << nlohmann::json{{"environments", dirs.size()}, {"views", views}}.dump() << '\n';
  } else {
    out << "environments: " << dirs.size() << ", views: " << views << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct AugmentFlags {
  std::string trajectories;
  std::string registry;
  std::string manifest;
  std::string stats;
  std::optional<double> ratio;
  std::optional<std::string> mode;
  std::optional<uint64_t> seed;
  std::optional<int> scans;
  std::optional<std::string> variant_choice;
  bool skip_validation = false;
};

inline int CmdAugment(const CommonFlags& common, const AugmentFlags& f, std::ostream& out) {
  PipelineConfig config = ResolveConfig(common);
  AugmentSettings& a = config.augment;
  if (f.ratio) a.ratio = *f.ratio;
  if (f.mode) a.mode = *f.mode;
  if (f.seed) a.seed = *f.seed;
  if (f.scans) a.scans_n = *f.scans;
  if (f.variant_choice) a.variant_choice = *f.variant_choice;
  PathSettings& p = config.paths;
  if (!f.trajectories.empty()) p.trajectories = f.trajectories;
  if (!f.registry.empty()) p.registry = f.registry;
  if (!f.manifest.empty()) p.manifest = f.manifest;
  if (!f.stats.empty()) p.stats = f.stats;

  if (!(a.ratio >= 0.0 && a.ratio <= 1.0)) throw UsageError("--ratio must lie in [0, 1]");
  AugmentConfig ac;
  ac.ratio_m = a.ratio;
  ac.seed = a.seed;
  try {
    ac.mode = ParseReplaceMode(a.mode);
    ac.variant_choice = ParseVariantChoice(a.variant_choice);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  for (const auto* req : {&p.trajectories, &p.registry, &p.manifest, &p.stats}) {
    if (req->empty()) throw UsageError("--trajectories, --registry, --manifest and --stats are required");
  }

  const std::vector<TrajectorySample> trajectories = LoadTrajectories(p.trajectories);
  if (a.scans_n) {
    std::vector<std::string> all;
    for (const auto& t : trajectories) all.push_back(t.scan_id);
    try {
      ac.scan_subset = SelectScanSubset(all, *a.scans_n, a.seed);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
  const EnvRegistry registry = LoadRegistry(p.registry, !f.skip_validation);
  const AugmentStats stats = AugmentDataset(p.trajectories, ac, registry, p.manifest, p.stats);
  if (common.json) {
    out << stats.ToJson().dump() << '\n';
  } else {
    out << "trajectories: " << stats.trajectories << ", viewpoints: " << stats.viewpoints
        << ", replaced: " << stats.replaced << ", skipped: " << stats.skipped
        << ", ratio: " << stats.global_ratio() << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct StatsFlags {
  std::string captions;
  std::string registry;
  std::string manifest;
  bool skip_validation = false;
};

inline int CmdStats(const StatsFlags& f, std::ostream& out) {
  if (f.captions.empty() && f.registry.empty() && f.manifest.empty()) {
    throw UsageError("pass at least one of --captions, --registry, --manifest");
  }
  nlohmann::json j = nlohmann::json::object();
  if (!f.captions.empty()) {
    const CaptionStore store = IngestCaptions(std::filesystem::path(f.captions));
    size_t records = 0;
    size_t complete = 0;
    const auto viewpoints = store.Viewpoints();
    for (const auto& vp : viewpoints) {
      records += store.ViewpointRecords(vp).size();
      if (store.IsComplete(vp)) ++complete;
    }
    j["captions"] = {{"records", records},
                     {"viewpoints", viewpoints.size()},
                     {"complete_viewpoints", complete}};
  }
  if (!f.registry.empty()) {
    const EnvRegistry reg = LoadRegistry(f.registry, !f.skip_validation);
    j["registry"] = {{"viewpoints", reg.viewpoint_count()},
                     {"environments", reg.environment_count()},
                     {"view_images", reg.view_image_count()}};
  }
  if (!f.manifest.empty()) {
    std::ifstream in(f.manifest);
    if (!in) throw Error(ErrorCode::kIo, "cannot read " + f.manifest);
    size_t trajectories = 0;
    size_t viewpoints = 0;
    size_t replaced = 0;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto m = nlohmann::json::parse(line);
      const std::string bits = m.at("bitmask").get<std::string>();
      ++trajectories;
      viewpoints += bits.size();
      replaced += static_cast<size_t>(std::count(bits.begin(), bits.end(), '1'));
    }
    j["manifest"] = {{"trajectories", trajectories},
                     {"viewpoints", viewpoints},
                     {"replaced", replaced},
                     {"ratio", viewpoints == 0 ? 0.0
                                               : static_cast<double>(replaced) /
                                                     static_cast<double>(viewpoints)}};
  }
  out << j.dump(2) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct PreviewFlags {
  std::string env;
  std::string out;
};

inline std::filesystem::path StripPath(const std::filesystem::path& out_png) {
  std::filesystem::path p = out_png;
  return p.replace_filename(out_png.stem().string() + ".strip.png");
}

inline int CmdPreview(const PreviewFlags& f, std::ostream& out, std::ostream& err) {
  const std::vector<std::string> problems = ValidateEnvironmentDir(f.env);
  if (!problems.empty()) {
    err << f.env << " failed validation:\n";
    for (const std::string& p : problems) err << "  - " << p << '\n';
    return kExitFailure;
  }
  const EquirectCanvas canvas = LoadCanvas(std::filesystem::path(f.env) / kPanoramaBase);
  const Provenance prov = Provenance::FromJson(
      nlohmann::json::parse(ReadFileBytes(std::filesystem::path(f.env) / kProvenanceFile)));
  const std::filesystem::path pano = f.out;
  if (pano.has_parent_path()) std::filesystem::create_directories(pano.parent_path());
  WritePng(pano, canvas.pixels());
  WritePng(StripPath(pano), RenderHorizonStrip(canvas, prov.config.view_grid));
  out << pano.string() << '\n' << StripPath(pano).string() << '\n';
  return kExitOk;
}

}  // namespace internal

inline int RunCli(std::vector<std::string> args, std::ostream& out = std::cout,
                  std::ostream& err = std::cerr) {
  using namespace internal;
  UseStderrLogger();
  CLI::App app{"Panorama generation and trajectory augmentation pipeline", "panoweave"};
  app.require_subcommand(1);
  CommonFlags common;
  std::string log_level = "info";
  app.add_option("--config", common.config_path, "JSON config file (default: $PANOWEAVE_CONFIG)");
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off");
  app.add_flag("--json", common.json, "print a JSON summary on stdout");
  app.fallthrough();

  IngestFlags ingest;
  auto* c_ingest = app.add_subcommand("ingest-captions", "import or compute per-view captions");
  c_ingest->add_option("--input", ingest.inputs, "caption JSONL file(s) to import");
  c_ingest->add_option("--images", ingest.images, "directory of scan/viewpoint/view_H_E.png to caption");
  c_ingest->add_option("--store", ingest.store, "caption store JSONL to update");
  c_ingest->add_option("--backend", common.backend, "procedural|http");
  c_ingest->add_option("--backend-url", common.backend_url, "service url (default: $PANOWEAVE_BACKEND_URL)");

  GenerateFlags gen;
  auto* c_gen = app.add_subcommand("generate", "generate one environment per viewpoint");
  c_gen->add_option("--captions", gen.captions, "caption store JSONL");
  c_gen->add_option("--out", gen.out, "output root");
  c_gen->add_option("--backend", common.backend, "procedural|http");
  c_gen->add_option("--backend-url", common.backend_url, "service url (default: $PANOWEAVE_BACKEND_URL)");
  c_gen->add_option("--seed", gen.seed, "run seed");
  c_gen->add_option("--scan", gen.scans, "only these scans");
  c_gen->add_option("--viewpoint", gen.viewpoints, "only these viewpoints");
  c_gen->add_option("--workers", gen.workers, "parallel panoramas");

  DiscretizeFlags disc;
  auto* c_disc = app.add_subcommand("discretize", "re-extract the 36 grid views");
  c_disc->add_option("--env", disc.env, "environment dir or output root")->required();
  c_disc->add_option("--out", disc.out, "write views here instead of in place");

  AugmentFlags aug;
  auto* c_aug = app.add_subcommand("augment", "sample observation replacements");
  c_aug->add_option("--trajectories", aug.trajectories, "trajectory JSONL");
  c_aug->add_option("--registry", aug.registry, "registry manifest JSONL or environment root");
  c_aug->add_option("--manifest", aug.manifest, "output manifest JSONL");
  c_aug->add_option("--stats", aug.stats, "output stats JSON");
  c_aug->add_option("--ratio", aug.ratio, "replacement ratio m in [0, 1]");
  c_aug->add_option("--mode", aug.mode, "bernoulli|exact_count");
  c_aug->add_option("--seed", aug.seed, "sampling seed");
  c_aug->add_option("--scans", aug.scans, "restrict replacement to a random subset of N scans");
  c_aug->add_option("--variant-choice", aug.variant_choice, "first|uniform_random");
  c_aug->add_flag("--skip-validation", aug.skip_validation, "do not open registry environments");

  StatsFlags stats;
  auto* c_stats = app.add_subcommand("stats", "summarize captions, registry, manifest");
  c_stats->add_option("--captions", stats.captions, "caption store JSONL");
  c_stats->add_option("--registry", stats.registry, "registry manifest JSONL or environment root");
  c_stats->add_option("--manifest", stats.manifest, "augmented manifest JSONL");
  c_stats->add_flag("--skip-validation", stats.skip_validation, "do not open registry environments");

  PreviewFlags prev;
  auto* c_prev = app.add_subcommand("preview", "render panorama and horizon strip");
  c_prev->add_option("--env", prev.env, "environment dir")->required();
  c_prev->add_option("--out", prev.out, "output PNG; the strip goes next to it")->required();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  const auto level = spdlog::level::from_str(log_level);
  if (level == spdlog::level::off && log_level != "off") {
    err << "unknown log level '" << log_level << "'\n";
    return kExitUsage;
  }
  spdlog::set_level(level);

  try {
    if (c_ingest->parsed()) return CmdIngestCaptions(common, ingest, out);
    if (c_gen->parsed()) return CmdGenerate(common, gen, out);
    if (c_disc->parsed()) return CmdDiscretize(common, disc, out);
    if (c_aug->parsed()) return CmdAugment(common, aug, out);
    if (c_stats->parsed()) return CmdStats(stats, out);
    if (c_prev->parsed()) return CmdPreview(prev, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}

inline int RunCli(int argc, const char* const* argv, std::ostream& out = std::cout,
                  std::ostream& err = std::cerr) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return RunCli(std::move(args), out, err);
}

}  // namespace panoweave

#endif  // PANOWEAVE_CLI_H_
