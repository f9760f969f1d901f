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

#ifndef PANOWEAVE_OUTPAINT_ENGINE_H_
#define PANOWEAVE_OUTPAINT_ENGINE_H_

// Recursive panorama generation: generate one zero-elevation seed view from
// its caption, then rotate the camera around the view grid, extracting the
// partially known view at each step, asking the backend to outpaint the
// unknown part under the nearest view's caption, and compositing the reply.

#include <spdlog/spdlog.h>

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "panoweave/backend.h"
#include "panoweave/canvas.h"
#include "panoweave/caption_store.h"
#include "panoweave/error.h"
#include "panoweave/hash.h"
#include "panoweave/image_io.h"
#include "panoweave/spherical.h"

namespace panoweave {

// Vertical step fraction that lands a default-fov view on the +/-30 deg rows.
inline constexpr double kDefaultVerticalStep = kGridStepDeg / kDefaultVfovDeg;
// Discretized views accept any positive coverage; see Discretize().
inline constexpr double kDiscretizeThreshold = 1e-6;
// Band that a finished panorama must cover completely.
inline constexpr double kCoveredBandLoDeg = -60.0;
inline constexpr double kCoveredBandHiDeg = 60.0;

struct OutpaintConfig {
  double p_r = 0.5;  // rightward step, fraction of hfov
  double p_u = kDefaultVerticalStep;  // upward step, fraction of vfov
  double p_d = kDefaultVerticalStep;  // downward step, fraction of vfov
  uint64_t seed = 0;
  double coverage_threshold = kDefaultCoverageThreshold;
  double blend_width_px = kDefaultBlendWidthPx;
  double min_known_fraction = 0.25;
  ViewGrid view_grid;
  int canvas_height_px = kDefaultCanvasHeight;

  int canvas_width_px() const { return 2 * canvas_height_px; }

  void Validate() const {
    auto in_unit = [](double p) { return p > 0.0 && p <= 1.0; };
    if (!in_unit(p_r) || !in_unit(p_u) || !in_unit(p_d)) {
      throw Error(ErrorCode::kInvalidArgument, "p_r, p_u, p_d must lie in (0, 1]");
    }
    if (!(coverage_threshold >= 0.0 && coverage_threshold <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "coverage_threshold must lie in [0, 1]");
    }
    if (!(blend_width_px >= 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "blend_width_px must be non-negative");
    }
    if (!(min_known_fraction >= 0.0 && min_known_fraction < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "min_known_fraction must lie in [0, 1)");
    }
    if (canvas_height_px <= 0) {
      throw Error(ErrorCode::kInvalidArgument, "canvas height must be positive");
    }
    view_grid.Spec(SphericalDirection()).Validate();
  }

  nlohmann::json ToJson() const {
    nlohmann::json j;
    j["p_r"] = p_r;
    j["p_u"] = p_u;
    j["p_d"] = p_d;
    j["seed"] = seed;
    j["coverage_threshold"] = coverage_threshold;
    j["blend_width_px"] = blend_width_px;
    j["min_known_fraction"] = min_known_fraction;
    j["hfov_deg"] = view_grid.hfov_deg;
    j["vfov_deg"] = view_grid.vfov_deg;
    j["view_width_px"] = view_grid.width_px;
    j["view_height_px"] = view_grid.height_px;
    j["canvas_height_px"] = canvas_height_px;
    return j;
  }

  static OutpaintConfig FromJson(const nlohmann::json& j) {
    OutpaintConfig c;
    try {
      c.p_r = j.at("p_r").get<double>();
      c.p_u = j.at("p_u").get<double>();
      c.p_d = j.at("p_d").get<double>();
      c.seed = j.at("seed").get<uint64_t>();
      c.coverage_threshold = j.at("coverage_threshold").get<double>();
      c.blend_width_px = j.at("blend_width_px").get<double>();
      c.min_known_fraction = j.at("min_known_fraction").get<double>();
      c.view_grid.hfov_deg = j.at("hfov_deg").get<double>();
      c.view_grid.vfov_deg = j.at("vfov_deg").get<double>();
      c.view_grid.width_px = j.at("view_width_px").get<int>();
      c.view_grid.height_px = j.at("view_height_px").get<int>();
      c.canvas_height_px = j.at("canvas_height_px").get<int>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, std::string("outpaint config: ") + e.what());
    }
    c.Validate();
    return c;
  }

  std::string Hash() const { return Sha256Hex(ToJson().dump()); }
};

enum class StepKind { kSeed, kOutpaint };

struct TraversalStep {
  ViewSpec view;
  ViewIndex prompt_source;
  StepKind kind = StepKind::kOutpaint;
  double known_fraction = 0.0;  // of view pixels, before this step
};

namespace internal {

// Sample lattice used for plan-time overlap accounting.
inline constexpr int kPlanSamples = 64;

}  // namespace internal

// Orders the views that build one panorama: the seed at (0, 0), a rightward
// ring at zero elevation until it wraps onto the seed, then one upward and
// one downward view per ring heading. Each step's prompt comes from the grid
// view nearest the solid-angle centroid of the region it newly exposes.
// Rejects configurations where a step would start from less than
// min_known_fraction known content.
inline std::vector<TraversalStep> PlanTraversal(const OutpaintConfig& config) {
  config.Validate();
  const ViewGrid& grid = config.view_grid;
  const double h_step = config.p_r * grid.hfov_deg;
  const double up_elev = std::min(90.0, config.p_u * grid.vfov_deg);
  const double down_elev = std::max(-90.0, -config.p_d * grid.vfov_deg);
  const int ring = static_cast<int>(std::ceil(360.0 / h_step - 1e-9));

  std::vector<SphericalDirection> centers;
  for (int k = 0; k < ring; ++k) centers.emplace_back(k * h_step, 0.0);
  for (int k = 0; k < ring; ++k) centers.emplace_back(k * h_step, up_elev);
  for (int k = 0; k < ring; ++k) centers.emplace_back(k * h_step, down_elev);

  std::vector<TraversalStep> plan;
  std::vector<CameraFrame> placed;
  for (size_t s = 0; s < centers.size(); ++s) {
    TraversalStep step;
    step.view = grid.Spec(centers[s]);
    step.kind = s == 0 ? StepKind::kSeed : StepKind::kOutpaint;
    const CameraFrame frame(step.view);

    constexpr int n = internal::kPlanSamples;
    int known = 0;
    Vec3 centroid;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const double u = (i + 0.5) * step.view.width_px / n - 0.5;
        const double v = (j + 0.5) * step.view.height_px / n - 0.5;
        const Vec3 ray = frame.Ray(u, v).Normalized();
        bool covered = false;
        for (const CameraFrame& prev : placed) {
          if (prev.Project(ray).in_frustum) {
            covered = true;
            break;
          }
        }
        if (covered) {
          ++known;
        } else {
          centroid = centroid + frame.RelativePixelSolidAngle(u, v) * ray;
        }
      }
    }
    step.known_fraction = static_cast<double>(known) / (n * n);
    step.prompt_source = known == n * n
                             ? NearestGridView(step.view.center)
                             : NearestGridView(SphericalDirection::FromVector(centroid));
    if (step.kind == StepKind::kOutpaint && step.known_fraction < config.min_known_fraction) {
      throw Error(ErrorCode::kPlanRejected,
                  "step " + std::to_string(s) + " at heading " +
                      std::to_string(step.view.center.heading_deg()) + ", elevation " +
                      std::to_string(step.view.center.elevation_deg()) + " starts with " +
                      std::to_string(step.known_fraction) + " known < min_known_fraction " +
                      std::to_string(config.min_known_fraction));
    }
    plan.push_back(step);
    placed.push_back(frame);
  }
  return plan;
}

// Captions for the 36 grid views of one viewpoint, ordered by ViewIndex
// ordinal.
struct ViewpointCaptions {
  ViewpointKey viewpoint;
  std::array<std::string, kViewCount> text;

  const std::string& For(const ViewIndex& index) const { return text[index.Ordinal()]; }

  static ViewpointCaptions FromStore(const CaptionStore& store, const ViewpointKey& vp) {
    ViewpointCaptions out{vp, {}};
    for (const ViewIndex& idx : AllViewIndices()) {
      const CaptionRecord* rec = store.Find({vp.scan_id, vp.viewpoint_id, idx});
      if (rec == nullptr) {
        throw Error(ErrorCode::kNotFound, "viewpoint " + vp.scan_id + "/" + vp.viewpoint_id +
                                              " lacks a caption for view " + idx.Name());
      }
      out.text[idx.Ordinal()] = rec->text;
    }
    return out;
  }
};

struct StepLog {
  int index = 0;
  StepKind kind = StepKind::kOutpaint;
  SphericalDirection center;
  ViewIndex prompt_source;
  std::string prompt;
  uint64_t seed = 0;
  double known_fraction = 0.0;
};

struct Provenance {
  std::string backend;
  std::string scan_id;
  std::string viewpoint_id;
  OutpaintConfig config;
  std::vector<StepLog> steps;
  std::string run_config_hash;  // hash of the producing pipeline run, if any

  nlohmann::json ToJson() const {
    nlohmann::json j;
    j["backend"] = backend;
    j["scan_id"] = scan_id;
    j["viewpoint_id"] = viewpoint_id;
    j["config"] = config.ToJson();
    j["config_hash"] = config.Hash();
    if (!run_config_hash.empty()) j["run_config_hash"] = run_config_hash;
    nlohmann::json steps_json = nlohmann::json::array();
    for (const StepLog& s : steps) {
      nlohmann::json e;
      e["index"] = s.index;
      e["kind"] = s.kind == StepKind::kSeed ? "seed" : "outpaint";
      e["heading_deg"] = s.center.heading_deg();
      e["elevation_deg"] = s.center.elevation_deg();
      e["prompt_source"] = {s.prompt_source.heading_index, s.prompt_source.elevation_index};
      e["prompt"] = s.prompt;
      e["seed"] = s.seed;
      e["known_fraction"] = s.known_fraction;
      steps_json.push_back(std::move(e));
    }
    j["steps"] = std::move(steps_json);
    return j;
  }

  static Provenance FromJson(const nlohmann::json& j) {
    Provenance p;
    try {
      p.backend = j.at("backend").get<std::string>();
      p.scan_id = j.at("scan_id").get<std::string>();
      p.viewpoint_id = j.at("viewpoint_id").get<std::string>();
      p.config = OutpaintConfig::FromJson(j.at("config"));
      if (j.contains("run_config_hash")) p.run_config_hash = j["run_config_hash"].get<std::string>();
      for (const auto& e : j.at("steps")) {
        StepLog s;
        s.index = e.at("index").get<int>();
        s.kind = e.at("kind").get<std::string>() == "seed" ? StepKind::kSeed : StepKind::kOutpaint;
        s.center = SphericalDirection(e.at("heading_deg").get<double>(),
                                      e.at("elevation_deg").get<double>());
        s.prompt_source = {e.at("prompt_source").at(0).get<int>(),
                           e.at("prompt_source").at(1).get<int>()};
        s.prompt = e.at("prompt").get<std::string>();
        s.seed = e.at("seed").get<uint64_t>();
        s.known_fraction = e.at("known_fraction").get<double>();
        p.steps.push_back(std::move(s));
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, std::string("provenance: ") + e.what());
    }
    return p;
  }
};

struct PanoEnvironment {
  std::string scan_id;
  std::string viewpoint_id;
  EquirectCanvas canvas;
  std::array<ViewImage, kViewCount> view_images;  // by ViewIndex ordinal
  Provenance provenance;
};

// Observation hook for each traversal step. `partial` and `reply` are null
// for the seed step.
struct StepEvent {
  int index;
  const TraversalStep& step;
  const ViewImage* partial;
  const GrayImage* mask;
  const RgbImage* reply;
  const EquirectCanvas& before;
  const EquirectCanvas& after;
};
using StepObserver = std::function<void(const StepEvent&)>;

// Raised when a backend call fails mid-traversal; carries the canvas as it
// stood before the failing step.
class PanoramaGenerationError : public Error {
 public:
  PanoramaGenerationError(const std::string& message, int failed_step, EquirectCanvas partial)
      : Error(ErrorCode::kGenerationFailed, message),
        failed_step_(failed_step),
        partial_(std::move(partial)) {}

  int failed_step() const { return failed_step_; }
  const EquirectCanvas& partial_canvas() const { return partial_; }

 private:
  int failed_step_;
  EquirectCanvas partial_;
};

inline uint64_t StepSeed(uint64_t run_seed, int step_index) {
  return DeriveSeed(run_seed, static_cast<uint64_t>(step_index));
}

// Extracts the 36 grid views. Any positive coverage counts as known here: a
// grid view whose frustum coincides with a traversal step has edge samples
// whose bilinear coverage dips below the outpainting threshold.
inline std::array<ViewImage, kViewCount> DiscretizeCanvas(const EquirectCanvas& canvas,
                                                          const ViewGrid& grid) {
  std::array<ViewImage, kViewCount> out;
  for (const ViewIndex& idx : AllViewIndices()) {
    out[idx.Ordinal()] = ExtractView(canvas, grid.Spec(idx), kDiscretizeThreshold);
    if (!out[idx.Ordinal()].AllValid()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "panorama does not cover grid view " + idx.Name());
    }
  }
  return out;
}

inline std::array<ViewImage, kViewCount> Discretize(const PanoEnvironment& env) {
  return DiscretizeCanvas(env.canvas, env.provenance.config.view_grid);
}

inline PanoEnvironment GeneratePanorama(const ViewpointCaptions& captions,
                                        const OutpaintConfig& config,
                                        GenerationBackend& backend,
                                        const StepObserver& observer = nullptr) {
  for (const ViewIndex& idx : AllViewIndices()) {
    if (NormalizeCaptionText(captions.For(idx)).empty()) {
      throw Error(ErrorCode::kNotFound, "missing caption for view " + idx.Name());
    }
  }
  const std::vector<TraversalStep> plan = PlanTraversal(config);

  PanoEnvironment env;
  env.scan_id = captions.viewpoint.scan_id;
  env.viewpoint_id = captions.viewpoint.viewpoint_id;
  env.canvas = EquirectCanvas(config.canvas_width_px(), config.canvas_height_px);
  env.provenance.backend = backend.Identity();
  env.provenance.scan_id = env.scan_id;
  env.provenance.viewpoint_id = env.viewpoint_id;
  env.provenance.config = config;

  for (size_t i = 0; i < plan.size(); ++i) {
    const TraversalStep& step = plan[i];
    StepLog log;
    log.index = static_cast<int>(i);
    log.kind = step.kind;
    log.center = step.view.center;
    log.prompt_source = step.prompt_source;
    log.prompt = captions.For(step.prompt_source);
    log.seed = StepSeed(config.seed, log.index);
    log.known_fraction = step.known_fraction;

    std::optional<EquirectCanvas> before;
    if (observer) before = env.canvas;
    ViewImage partial;
    GrayImage mask;
    RgbImage reply;
    try {
      if (step.kind == StepKind::kSeed) {
        reply = backend.Generate(log.prompt, log.seed, step.view.width_px, step.view.height_px);
      } else {
        partial = ExtractView(env.canvas, step.view, config.coverage_threshold);
        mask = partial.GenerateMask();
        reply = backend.Outpaint(partial.pixels, mask, log.prompt, log.seed);
      }
    } catch (const Error& e) {
      throw PanoramaGenerationError(
          "step " + std::to_string(i) + " of " + std::to_string(plan.size()) + " failed (" +
              e.what() + "); band coverage so far " +
              std::to_string(CoverageFraction(env.canvas, kCoveredBandLoDeg, kCoveredBandHiDeg)),
          log.index, env.canvas);
    }
    if (!reply.SameSize(step.view.width_px, step.view.height_px)) {
      throw PanoramaGenerationError("backend reply has the wrong size at step " +
                                        std::to_string(i),
                                    log.index, env.canvas);
    }
    CompositeViewInPlace(env.canvas, step.view, ViewImage::FromPixels(reply),
                         config.blend_width_px);
    env.provenance.steps.push_back(std::move(log));
    if (observer) {
      const bool seed = step.kind == StepKind::kSeed;
      observer(StepEvent{static_cast<int>(i), step, seed ? nullptr : &partial,
                         seed ? nullptr : &mask, &reply, *before, env.canvas});
    }
  }

  const double band = CoverageFraction(env.canvas, kCoveredBandLoDeg, kCoveredBandHiDeg);
  if (band < 1.0) {
    throw PanoramaGenerationError(
        "traversal left the (-60, 60) band incomplete: " + std::to_string(band),
        static_cast<int>(plan.size()), env.canvas);
  }
  env.view_images = DiscretizeCanvas(env.canvas, config.view_grid);
  return env;
}

// Baseline without outpainting: each grid view is generated independently
// from its own caption and pasted with a hard overwrite, heading-major.
inline EquirectCanvas StitchIndependentViews(const ViewpointCaptions& captions,
                                             const OutpaintConfig& config,
                                             GenerationBackend& backend) {
  EquirectCanvas canvas(config.canvas_width_px(), config.canvas_height_px);
  for (const ViewIndex& idx : AllViewIndices()) {
    const ViewSpec view = config.view_grid.Spec(idx);
    RgbImage img = backend.Generate(captions.For(idx),
                                    StepSeed(config.seed, 1000 + idx.Ordinal()),
                                    view.width_px, view.height_px);
    CompositeViewInPlace(canvas, view, ViewImage::FromPixels(std::move(img)), 0.0);
  }
  return canvas;
}

// ---------------------------------------------------------------------------
// On-disk layout of one environment directory.

inline constexpr char kPanoramaBase[] = "panorama";
inline constexpr char kProvenanceFile[] = "provenance.json";
inline constexpr char kDoneSentinel[] = "DONE";

inline std::string ViewFileName(const ViewIndex& idx) { return "view_" + idx.Name() + ".png"; }

inline std::filesystem::path EnvironmentDir(const std::filesystem::path& root,
                                            const ViewpointKey& vp) {
  return root / vp.scan_id / vp.viewpoint_id;
}

inline bool IsEnvironmentComplete(const std::filesystem::path& dir) {
  return std::filesystem::exists(dir / kDoneSentinel);
}

// Writes every artifact, then the DONE sentinel last.
inline void SaveEnvironment(const PanoEnvironment& env, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::filesystem::remove(dir / kDoneSentinel);
  SaveCanvas(env.canvas, dir / kPanoramaBase);
  WriteFileBytes(dir / kProvenanceFile, env.provenance.ToJson().dump(2) + "\n");
  for (const ViewIndex& idx : AllViewIndices()) {
    WritePng(dir / ViewFileName(idx), env.view_images[idx.Ordinal()].pixels);
  }
  WriteFileBytes(dir / kDoneSentinel, "complete\n");
}

// Problems that make `dir` unusable as an environment; empty when valid.
inline std::vector<std::string> ValidateEnvironmentDir(const std::filesystem::path& dir,
                                                       bool check_coverage = true) {
  std::vector<std::string> problems;
  if (!std::filesystem::is_directory(dir)) {
    problems.push_back(dir.string() + " is not a directory");
    return problems;
  }
  for (const std::filesystem::path& f :
       {WithSuffix(dir / kPanoramaBase, kPanoSuffix), WithSuffix(dir / kPanoramaBase, kCoverageSuffix),
        dir / std::filesystem::path(kProvenanceFile)}) {
    if (!std::filesystem::exists(f)) problems.push_back("missing " + f.filename().string());
  }
  for (const ViewIndex& idx : AllViewIndices()) {
    if (!std::filesystem::exists(dir / ViewFileName(idx))) {
      problems.push_back("missing " + ViewFileName(idx));
    }
  }
  if (!problems.empty() || !check_coverage) return problems;
  try {
    const EquirectCanvas canvas = LoadCanvas(dir / kPanoramaBase);
    const double band = CoverageFraction(canvas, kCoveredBandLoDeg, kCoveredBandHiDeg);
    if (band < 1.0) {
      problems.push_back("coverage over (-60, 60) is " + std::to_string(band) + ", expected 1");
    }
  } catch (const Error& e) {
    problems.push_back(e.what());
  }
  return problems;
}

inline PanoEnvironment LoadEnvironment(const std::filesystem::path& dir) {
  const std::vector<std::string> problems = ValidateEnvironmentDir(dir);
  if (!problems.empty()) {
    std::string msg = dir.string() + " is not a valid environment:";
    for (const std::string& p : problems) msg += " " + p + ";";
    throw Error(ErrorCode::kInvalidArgument, msg);
  }
  PanoEnvironment env;
  env.canvas = LoadCanvas(dir / kPanoramaBase);
  try {
    env.provenance = Provenance::FromJson(
        nlohmann::json::parse(ReadFileBytes(dir / kProvenanceFile)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("provenance.json: ") + e.what());
  }
  env.scan_id = env.provenance.scan_id;
  env.viewpoint_id = env.provenance.viewpoint_id;
  for (const ViewIndex& idx : AllViewIndices()) {
    env.view_images[idx.Ordinal()] = ViewImage::FromPixels(ReadPng<3>(dir / ViewFileName(idx)));
  }
  return env;
}

// Twelve zero-elevation views side by side.
inline RgbImage RenderHorizonStrip(const EquirectCanvas& canvas, const ViewGrid& grid) {
  RgbImage strip(grid.width_px * kHeadingCount, grid.height_px);
  for (int k = 0; k < kHeadingCount; ++k) {
    const ViewImage tile = ExtractView(canvas, grid.Spec(ViewIndex{k, 0}), kDiscretizeThreshold);
    for (int y = 0; y < grid.height_px; ++y) {
      for (int x = 0; x < grid.width_px; ++x) {
        const uint8_t* src = tile.pixels.pixel(x, y);
        uint8_t* dst = strip.pixel(k * grid.width_px + x, y);
        for (int c = 0; c < 3; ++c) dst[c] = src[c];
      }
    }
  }
  return strip;
}

// ---------------------------------------------------------------------------
// Worker pool over independent panoramas.

// Runs `fn(job)` for every job on `workers` threads. Jobs are claimed in
// order; each panorama's generation stays sequential inside `fn`. The first
// exception is rethrown after all workers stop.
template <typename Job, typename Fn>
void RunWorkerPool(const std::vector<Job>& jobs, int workers, Fn&& fn) {
  std::atomic<size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto loop = [&] {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        fn(jobs[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  if (n == 1) {
    loop();
  } else {
    std::vector<std::jthread> threads;
    for (int t = 0; t < n; ++t) threads.emplace_back(loop);
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace panoweave

#endif  // PANOWEAVE_OUTPAINT_ENGINE_H_
