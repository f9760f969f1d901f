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

#ifndef PANOWEAVE_PIPELINE_CONFIG_H_
#define PANOWEAVE_PIPELINE_CONFIG_H_

// File-based pipeline configuration. Every section rejects unknown keys.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>

#include "json.hpp"
#include "panoweave/env_augment.h"
#include "panoweave/error.h"
#include "panoweave/hash.h"
#include "panoweave/http_backend.h"
#include "panoweave/image_io.h"
#include "panoweave/outpaint_engine.h"

namespace panoweave {

inline constexpr char kConfigEnv[] = "PANOWEAVE_CONFIG";

enum class BackendKind { kProcedural, kHttp };

inline const char* BackendKindName(BackendKind k) {
  return k == BackendKind::kProcedural ? "procedural" : "http";
}
inline BackendKind ParseBackendKind(const std::string& s) {
  if (s == "procedural") return BackendKind::kProcedural;
  if (s == "http") return BackendKind::kHttp;
  throw Error(ErrorCode::kInvalidArgument, "unknown backend '" + s + "'");
}

struct BackendSettings {
  BackendKind kind = BackendKind::kProcedural;
  HttpBackendOptions http;
};

struct AugmentSettings {
  double ratio = 0.3;
  std::string mode = "bernoulli";
  std::optional<int> scans_n;
  uint64_t seed = 0;
  std::string variant_choice = "first";
};

struct PathSettings {
  std::string captions;
  std::string out_dir;
  std::string trajectories;
  std::string registry;
  std::string manifest;
  std::string stats;
};

struct PipelineConfig {
  BackendSettings backend;
  OutpaintConfig outpaint;
  AugmentSettings augment;
  PathSettings paths;
  int workers = 1;

  // Everything that affects generated or sampled content. Paths, worker
  // count and transport limits are excluded, so relocating or re-sharding a
  // run keeps its outputs byte-identical.
  nlohmann::json ContentJson() const;
  nlohmann::json ToJson() const;
  std::string Hash() const { return Sha256Hex(ContentJson().dump()); }
};

namespace internal {

inline void RequireKnownKeys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                             const std::string& section) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, section + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw Error(ErrorCode::kParse, "unknown config key '" + section + "." + key + "'");
  }
}

template <typename T>
void ReadOpt(const nlohmann::json& j, const char* key, T& out, const std::string& section) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, "config key '" + section + "." + key + "': " + e.what());
  }
}

}  // namespace internal

inline nlohmann::json PipelineConfig::ContentJson() const {
  nlohmann::json j;
  const HttpBackendOptions& h = backend.http;
  j["backend"] = {{"kind", BackendKindName(backend.kind)},
                  {"url", h.base_url},
                  {"steps", h.steps},
                  {"guidance", h.guidance},
                  {"known_band_px", h.known_region.band_px},
                  {"known_band_tolerance", h.known_region.band_tolerance},
                  {"known_interior_tolerance", h.known_region.interior_tolerance},
                  {"strict_known_region", h.known_region.strict}};
  j["outpaint"] = outpaint.ToJson();
  j["augment"] = {{"ratio", augment.ratio},
                  {"mode", augment.mode},
                  {"seed", augment.seed},
                  {"variant_choice", augment.variant_choice}};
  j["augment"]["scans_n"] = augment.scans_n ? nlohmann::json(*augment.scans_n) : nlohmann::json();
  return j;
}

inline nlohmann::json PipelineConfig::ToJson() const {
  nlohmann::json j = ContentJson();
  const HttpBackendOptions& h = backend.http;
  j["backend"]["timeout_ms"] = h.timeout.count();
  j["backend"]["max_attempts"] = h.retry.max_attempts;
  j["backend"]["initial_backoff_ms"] = h.retry.initial_backoff.count();
  j["backend"]["max_backoff_ms"] = h.retry.max_backoff.count();
  j["backend"]["max_width"] = h.max_width;
  j["backend"]["max_height"] = h.max_height;
  j["backend"]["max_in_flight"] = h.max_in_flight;
  j["workers"] = workers;
  j["paths"] = {{"captions", paths.captions},         {"out_dir", paths.out_dir},
                {"trajectories", paths.trajectories}, {"registry", paths.registry},
                {"manifest", paths.manifest},         {"stats", paths.stats}};
  return j;
}

inline PipelineConfig PipelineConfigFromJson(const nlohmann::json& j) {
  using internal::ReadOpt;
  using internal::RequireKnownKeys;
  PipelineConfig c;
  RequireKnownKeys(j, {"backend", "outpaint", "augment", "paths", "workers"}, "config");
  ReadOpt(j, "workers", c.workers, "config");

  if (j.contains("backend")) {
    const auto& b = j["backend"];
    RequireKnownKeys(b,
                     {"kind", "url", "timeout_ms", "max_attempts", "initial_backoff_ms",
                      "max_backoff_ms", "steps", "guidance", "max_width", "max_height",
                      "max_in_flight", "known_band_px", "known_band_tolerance",
                      "known_interior_tolerance", "strict_known_region"},
                     "backend");
    std::string kind = BackendKindName(c.backend.kind);
    ReadOpt(b, "kind", kind, "backend");
    c.backend.kind = ParseBackendKind(kind);
    HttpBackendOptions& h = c.backend.http;
    ReadOpt(b, "url", h.base_url, "backend");
    int64_t ms = h.timeout.count();
    ReadOpt(b, "timeout_ms", ms, "backend");
    h.timeout = std::chrono::milliseconds(ms);
    ReadOpt(b, "max_attempts", h.retry.max_attempts, "backend");
    ms = h.retry.initial_backoff.count();
    ReadOpt(b, "initial_backoff_ms", ms, "backend");
    h.retry.initial_backoff = std::chrono::milliseconds(ms);
    ms = h.retry.max_backoff.count();
    ReadOpt(b, "max_backoff_ms", ms, "backend");
    h.retry.max_backoff = std::chrono::milliseconds(ms);
    ReadOpt(b, "steps", h.steps, "backend");
    ReadOpt(b, "guidance", h.guidance, "backend");
    ReadOpt(b, "max_width", h.max_width, "backend");
    ReadOpt(b, "max_height", h.max_height, "backend");
    ReadOpt(b, "max_in_flight", h.max_in_flight, "backend");
    ReadOpt(b, "known_band_px", h.known_region.band_px, "backend");
    ReadOpt(b, "known_band_tolerance", h.known_region.band_tolerance, "backend");
    ReadOpt(b, "known_interior_tolerance", h.known_region.interior_tolerance, "backend");
    ReadOpt(b, "strict_known_region", h.known_region.strict, "backend");
  }

  if (j.contains("outpaint")) {
    const auto& o = j["outpaint"];
    RequireKnownKeys(o,
                     {"p_r", "p_u", "p_d", "seed", "coverage_threshold", "blend_width_px",
                      "min_known_fraction", "hfov_deg", "vfov_deg", "view_width_px",
                      "view_height_px", "canvas_height_px"},
                     "outpaint");
    OutpaintConfig& oc = c.outpaint;
    ReadOpt(o, "p_r", oc.p_r, "outpaint");
    ReadOpt(o, "p_u", oc.p_u, "outpaint");
    ReadOpt(o, "p_d", oc.p_d, "outpaint");
    ReadOpt(o, "seed", oc.seed, "outpaint");
    ReadOpt(o, "coverage_threshold", oc.coverage_threshold, "outpaint");
    ReadOpt(o, "blend_width_px", oc.blend_width_px, "outpaint");
    ReadOpt(o, "min_known_fraction", oc.min_known_fraction, "outpaint");
    ReadOpt(o, "hfov_deg", oc.view_grid.hfov_deg, "outpaint");
    ReadOpt(o, "vfov_deg", oc.view_grid.vfov_deg, "outpaint");
    ReadOpt(o, "view_width_px", oc.view_grid.width_px, "outpaint");
    ReadOpt(o, "view_height_px", oc.view_grid.height_px, "outpaint");
    ReadOpt(o, "canvas_height_px", oc.canvas_height_px, "outpaint");
  }

  if (j.contains("augment")) {
    const auto& a = j["augment"];
    RequireKnownKeys(a, {"ratio", "mode", "scans_n", "seed", "variant_choice"}, "augment");
    ReadOpt(a, "ratio", c.augment.ratio, "augment");
    ReadOpt(a, "mode", c.augment.mode, "augment");
    ReadOpt(a, "seed", c.augment.seed, "augment");
    ReadOpt(a, "variant_choice", c.augment.variant_choice, "augment");
    if (a.contains("scans_n") && !a["scans_n"].is_null()) {
      int n = 0;
      ReadOpt(a, "scans_n", n, "augment");
      c.augment.scans_n = n;
    }
  }

  if (j.contains("paths")) {
    const auto& p = j["paths"];
    RequireKnownKeys(p, {"captions", "out_dir", "trajectories", "registry", "manifest", "stats"},
                     "paths");
    ReadOpt(p, "captions", c.paths.captions, "paths");
    ReadOpt(p, "out_dir", c.paths.out_dir, "paths");
    ReadOpt(p, "trajectories", c.paths.trajectories, "paths");
    ReadOpt(p, "registry", c.paths.registry, "paths");
    ReadOpt(p, "manifest", c.paths.manifest, "paths");
    ReadOpt(p, "stats", c.paths.stats, "paths");
  }
  return c;
}

inline PipelineConfig LoadPipelineConfig(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ReadFileBytes(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return PipelineConfigFromJson(j);
}

// Explicit path, else $PANOWEAVE_CONFIG, else defaults. $PANOWEAVE_BACKEND_URL
// overrides the configured backend url.
inline PipelineConfig ResolvePipelineConfig(const std::string& explicit_path) {
  PipelineConfig c;
  std::string path = explicit_path;
  if (path.empty()) {
    if (const char* env = std::getenv(kConfigEnv)) path = env;
  }
  if (!path.empty()) c = LoadPipelineConfig(path);
  if (const char* url = std::getenv(kBackendUrlEnv); url != nullptr && *url != '\0') {
    c.backend.http.base_url = url;
  }
  return c;
}

}  // namespace panoweave

#endif  // PANOWEAVE_PIPELINE_CONFIG_H_
