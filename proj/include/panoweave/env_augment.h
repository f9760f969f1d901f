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

#ifndef PANOWEAVE_ENV_AUGMENT_H_
#define PANOWEAVE_ENV_AUGMENT_H_

// Registry of generated environments and the trajectory sampler that swaps
// a fraction of path observations for generated panoramas.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "panoweave/caption_store.h"
#include "panoweave/error.h"
#include "panoweave/hash.h"
#include "panoweave/image_io.h"
#include "panoweave/outpaint_engine.h"
#include "panoweave/spherical.h"

namespace panoweave {

// ---------------------------------------------------------------------------
// Registry.

class EnvRegistry {
 public:
  // Adds one variant; variants keep insertion order.
  void Add(const ViewpointKey& vp, std::string env_path) {
    entries_[vp].push_back(std::move(env_path));
  }

  const std::vector<std::string>* Find(const ViewpointKey& vp) const {
    auto it = entries_.find(vp);
    return it == entries_.end() ? nullptr : &it->second;
  }
  const std::vector<std::string>* Find(const std::string& scan, const std::string& vp) const {
    return Find(ViewpointKey{scan, vp});
  }

  size_t viewpoint_count() const { return entries_.size(); }
  size_t environment_count() const {
    size_t n = 0;
    for (const auto& [vp, paths] : entries_) n += paths.size();
    return n;
  }
  // Each environment discretizes into one image per grid view.
  size_t view_image_count() const { return environment_count() * kViewCount; }

  const std::map<ViewpointKey, std::vector<std::string>>& entries() const { return entries_; }

  const std::string& manifest_path() const { return manifest_path_; }
  void set_manifest_path(std::string p) { manifest_path_ = std::move(p); }

  // Every referenced directory must be a complete environment.
  void Validate() const {
    for (const auto& [vp, paths] : entries_) {
      for (const std::string& p : paths) {
        const std::vector<std::string> problems = ValidateEnvironmentDir(p);
        if (!problems.empty()) {
          throw Error(ErrorCode::kInvalidArgument,
                      "registry entry " + vp.scan_id + "/" + vp.viewpoint_id + " -> " + p +
                          ": " + problems.front());
        }
      }
    }
  }

 private:
  std::map<ViewpointKey, std::vector<std::string>> entries_;
  std::string manifest_path_;
};

// JSONL lines {"scan_id", "viewpoint_id", "env_path"}; repeated viewpoints
// add variants. Relative env paths resolve against the manifest's directory.
inline EnvRegistry LoadRegistryManifest(const std::filesystem::path& path, bool validate) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read registry manifest " + path.string());
  EnvRegistry reg;
  reg.set_manifest_path(path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      std::filesystem::path env = j.at("env_path").get<std::string>();
      if (env.is_relative()) env = path.parent_path() / env;
      reg.Add({j.at("scan_id").get<std::string>(), j.at("viewpoint_id").get<std::string>()},
              env.lexically_normal().string());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (validate) reg.Validate();
  return reg;
}

inline void WriteRegistryManifest(const EnvRegistry& reg, const std::filesystem::path& path) {
  std::string out;
  for (const auto& [vp, paths] : reg.entries()) {
    for (const std::string& p : paths) {
      nlohmann::json j;
      j["scan_id"] = vp.scan_id;
      j["viewpoint_id"] = vp.viewpoint_id;
      j["env_path"] = p;
      out += j.dump() + "\n";
    }
  }
  WriteFileBytes(path, out);
}

// Collects the complete environments under each root, laid out as
// root/scan/viewpoint/. Each root contributes one variant.
inline EnvRegistry ScanEnvironmentRoots(const std::vector<std::filesystem::path>& roots,
                                        bool validate) {
  EnvRegistry reg;
  for (const std::filesystem::path& root : roots) {
    if (!std::filesystem::is_directory(root)) {
      throw Error(ErrorCode::kNotFound, root.string() + " is not a directory");
    }
    std::vector<std::filesystem::path> dirs;
    for (const auto& scan : std::filesystem::directory_iterator(root)) {
      if (!scan.is_directory()) continue;
      for (const auto& vp : std::filesystem::directory_iterator(scan.path())) {
        if (vp.is_directory() && IsEnvironmentComplete(vp.path())) dirs.push_back(vp.path());
      }
    }
    std::sort(dirs.begin(), dirs.end());
    for (const auto& d : dirs) {
      reg.Add({d.parent_path().filename().string(), d.filename().string()}, d.string());
    }
  }
  if (validate) reg.Validate();
  return reg;
}

// A directory is scanned as environment roots; anything else is a manifest.
inline EnvRegistry LoadRegistry(const std::filesystem::path& path, bool validate) {
  if (std::filesystem::is_directory(path)) return ScanEnvironmentRoots({path}, validate);
  return LoadRegistryManifest(path, validate);
}

// ---------------------------------------------------------------------------
// Trajectories.

enum class Split { kTrain, kValSeen, kValUnseen, kTest };

inline const char* SplitName(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kValSeen:
      return "val_seen";
    case Split::kValUnseen:
      return "val_unseen";
    case Split::kTest:
      return "test";
  }
  return "train";
}

inline Split ParseSplit(const std::string& s) {
  for (Split v : {Split::kTrain, Split::kValSeen, Split::kValUnseen, Split::kTest}) {
    if (s == SplitName(v)) return v;
  }
  throw Error(ErrorCode::kParse, "unknown split '" + s + "'");
}

struct TrajectorySample {
  std::string traj_id;
  std::string instruction;
  std::string scan_id;
  std::vector<std::string> path;
  Split split = Split::kTrain;

  void Validate() const {
    if (path.empty()) throw Error(ErrorCode::kInvalidArgument, "trajectory " + traj_id + " has an empty path");
    for (size_t i = 1; i < path.size(); ++i) {
      if (path[i] == path[i - 1]) {
        throw Error(ErrorCode::kInvalidArgument,
                    "trajectory " + traj_id + " repeats viewpoint " + path[i]);
      }
    }
  }
};

// One record per line: {instruction, scan, path[], split}, plus optional
// "traj_id" or "path_id". Without either, the 0-based record index is the id.
inline std::vector<TrajectorySample> ParseTrajectories(std::istream& in,
                                                       const std::string& origin) {
  std::vector<TrajectorySample> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    TrajectorySample t;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      if (j.contains("traj_id")) {
        t.traj_id = j["traj_id"].is_string() ? j["traj_id"].get<std::string>() : j["traj_id"].dump();
      } else if (j.contains("path_id")) {
        t.traj_id = j["path_id"].is_string() ? j["path_id"].get<std::string>() : j["path_id"].dump();
      } else {
        t.traj_id = std::to_string(out.size());
      }
      t.instruction = j.at("instruction").get<std::string>();
      t.scan_id = j.at("scan").get<std::string>();
      t.path = j.at("path").get<std::vector<std::string>>();
      t.split = ParseSplit(j.value("split", std::string("train")));
      t.Validate();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, origin + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(std::move(t));
  }
  return out;
}

inline std::vector<TrajectorySample> LoadTrajectories(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read trajectories " + path.string());
  return ParseTrajectories(in, path.string());
}

// ---------------------------------------------------------------------------
// Sampling.

enum class ReplaceMode { kBernoulli, kExactCount };
enum class VariantChoice { kFirst, kUniformRandom };

inline const char* ReplaceModeName(ReplaceMode m) {
  return m == ReplaceMode::kBernoulli ? "bernoulli" : "exact_count";
}
inline ReplaceMode ParseReplaceMode(const std::string& s) {
  if (s == "bernoulli") return ReplaceMode::kBernoulli;
  if (s == "exact_count") return ReplaceMode::kExactCount;
  throw Error(ErrorCode::kInvalidArgument, "unknown mode '" + s + "'");
}
inline const char* VariantChoiceName(VariantChoice v) {
  return v == VariantChoice::kFirst ? "first" : "uniform_random";
}
inline VariantChoice ParseVariantChoice(const std::string& s) {
  if (s == "first") return VariantChoice::kFirst;
  if (s == "uniform_random") return VariantChoice::kUniformRandom;
  throw Error(ErrorCode::kInvalidArgument, "unknown variant choice '" + s + "'");
}

struct AugmentConfig {
  double ratio_m = 0.3;
  ReplaceMode mode = ReplaceMode::kBernoulli;
  std::optional<std::set<std::string>> scan_subset;
  uint64_t seed = 0;
  VariantChoice variant_choice = VariantChoice::kFirst;

  void Validate() const {
    if (!(ratio_m >= 0.0 && ratio_m <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "ratio must lie in [0, 1]");
    }
  }

  nlohmann::json ToJson() const {
    nlohmann::json j;
    j["ratio_m"] = ratio_m;
    j["mode"] = ReplaceModeName(mode);
    j["seed"] = seed;
    j["variant_choice"] = VariantChoiceName(variant_choice);
    if (scan_subset) {
      j["scan_subset"] = std::vector<std::string>(scan_subset->begin(), scan_subset->end());
    } else {
      j["scan_subset"] = nullptr;
    }
    return j;
  }
};

// Count replaced by exact_count mode for a path of `len` viewpoints.
inline size_t ExactReplaceCount(double ratio_m, size_t len) {
  return static_cast<size_t>(std::floor(ratio_m * static_cast<double>(len) + 1e-9));
}

struct Replacement {
  std::vector<bool> bitmask;            // per path position
  std::vector<std::string> env_paths;   // one per set bit, in path order
  std::vector<int> variant_indices;     // parallel to env_paths
  size_t skipped = 0;                   // drawn positions without a registry entry
  bool gated = false;                   // scan outside the subset

  std::string BitString() const {
    std::string s;
    for (bool b : bitmask) s += b ? '1' : '0';
    return s;
  }
};

inline uint64_t TrajectorySeed(uint64_t seed, const std::string& traj_id) {
  return DeriveSeed(seed, Fnv1a64(traj_id));
}

inline Replacement SampleReplacements(const TrajectorySample& traj, const AugmentConfig& config,
                                      const EnvRegistry& registry) {
  config.Validate();
  Replacement r;
  const size_t n = traj.path.size();
  r.bitmask.assign(n, false);
  if (config.scan_subset && !config.scan_subset->count(traj.scan_id)) {
    r.gated = true;
    return r;
  }
  std::mt19937_64 rng(TrajectorySeed(config.seed, traj.traj_id));

  std::vector<bool> drawn(n, false);
  if (config.mode == ReplaceMode::kBernoulli) {
    for (size_t i = 0; i < n; ++i) drawn[i] = UniformUnit(rng) < config.ratio_m;
  } else {
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    const size_t k = ExactReplaceCount(config.ratio_m, n);
    for (size_t i = 0; i < k; ++i) {
      const size_t j = i + static_cast<size_t>(UniformBelow(rng, n - i));
      std::swap(order[i], order[j]);
      drawn[order[i]] = true;
    }
  }

  for (size_t i = 0; i < n; ++i) {
    if (!drawn[i]) continue;
    const std::vector<std::string>* variants = registry.Find(traj.scan_id, traj.path[i]);
    if (variants == nullptr || variants->empty()) {
      ++r.skipped;
      continue;
    }
    int v = 0;
    if (config.variant_choice == VariantChoice::kUniformRandom) {
      v = static_cast<int>(UniformBelow(rng, variants->size()));
    }
    r.bitmask[i] = true;
    r.env_paths.push_back((*variants)[v]);
    r.variant_indices.push_back(v);
  }
  return r;
}

// Uniform n-subset of the distinct scan ids; input order does not matter.
inline std::set<std::string> SelectScanSubset(const std::vector<std::string>& all_scans, int n,
                                              uint64_t seed) {
  std::vector<std::string> scans(all_scans.begin(), all_scans.end());
  std::sort(scans.begin(), scans.end());
  scans.erase(std::unique(scans.begin(), scans.end()), scans.end());
  if (n < 0 || static_cast<size_t>(n) > scans.size()) {
    throw Error(ErrorCode::kInvalidArgument, "scan subset size " + std::to_string(n) +
                                                 " outside [0, " + std::to_string(scans.size()) +
                                                 "]");
  }
  std::mt19937_64 rng(DeriveSeed(seed, Fnv1a64("scan-subset")));
  for (int i = 0; i < n; ++i) {
    const size_t j = i + static_cast<size_t>(UniformBelow(rng, scans.size() - i));
    std::swap(scans[i], scans[j]);
  }
  return std::set<std::string>(scans.begin(), scans.begin() + n);
}

// ---------------------------------------------------------------------------
// Dataset level.

struct ScanStats {
  size_t viewpoints = 0;
  size_t replaced = 0;
  size_t skipped = 0;
};

struct AugmentStats {
  size_t trajectories = 0;
  size_t viewpoints = 0;
  size_t replaced = 0;
  size_t skipped = 0;
  size_t gated_trajectories = 0;
  std::map<std::string, ScanStats> per_scan;
  std::map<int, size_t> variant_usage;

  double global_ratio() const {
    return viewpoints == 0 ? 0.0 : static_cast<double>(replaced) / static_cast<double>(viewpoints);
  }

  nlohmann::json ToJson() const {
    nlohmann::json j;
    j["trajectories"] = trajectories;
    j["viewpoints"] = viewpoints;
    j["replaced"] = replaced;
    j["skipped"] = skipped;
    j["gated_trajectories"] = gated_trajectories;
    j["global_ratio"] = global_ratio();
    nlohmann::json scans = nlohmann::json::object();
    for (const auto& [scan, s] : per_scan) {
      scans[scan] = {{"viewpoints", s.viewpoints},
                     {"replaced", s.replaced},
                     {"skipped", s.skipped},
                     {"ratio", s.viewpoints == 0 ? 0.0
                                                 : static_cast<double>(s.replaced) /
                                                       static_cast<double>(s.viewpoints)}};
    }
    j["per_scan"] = std::move(scans);
    nlohmann::json usage = nlohmann::json::object();
    for (const auto& [v, count] : variant_usage) usage[std::to_string(v)] = count;
    j["variant_usage"] = std::move(usage);
    return j;
  }
};

struct AugmentResult {
  std::string manifest;  // JSONL, one line per trajectory in input order
  AugmentStats stats;
};

inline AugmentResult AugmentTrajectories(const std::vector<TrajectorySample>& trajectories,
                                         const AugmentConfig& config,
                                         const EnvRegistry& registry) {
  config.Validate();
  AugmentResult out;
  std::ostringstream manifest;
  for (const TrajectorySample& t : trajectories) {
    const Replacement r = SampleReplacements(t, config, registry);
    nlohmann::json line;
    line["traj_id"] = t.traj_id;
    line["bitmask"] = r.BitString();
    line["env_paths"] = r.env_paths;
    manifest << line.dump() << '\n';

    AugmentStats& s = out.stats;
    ++s.trajectories;
    s.viewpoints += t.path.size();
    s.replaced += r.env_paths.size();
    s.skipped += r.skipped;
    if (r.gated) ++s.gated_trajectories;
    ScanStats& scan = s.per_scan[t.scan_id];
    scan.viewpoints += t.path.size();
    scan.replaced += r.env_paths.size();
    scan.skipped += r.skipped;
    for (int v : r.variant_indices) ++s.variant_usage[v];
  }
  out.manifest = manifest.str();
  return out;
}

// Reads every input before writing; refuses to overwrite the trajectory file.
inline AugmentStats AugmentDataset(const std::filesystem::path& trajectories_path,
                                   const AugmentConfig& config, const EnvRegistry& registry,
                                   const std::filesystem::path& manifest_path,
                                   const std::filesystem::path& stats_path) {
  config.Validate();
  const auto same = [](const std::filesystem::path& a, const std::filesystem::path& b) {
    return std::filesystem::weakly_canonical(a) == std::filesystem::weakly_canonical(b);
  };
  if (same(trajectories_path, manifest_path) || same(trajectories_path, stats_path)) {
    throw Error(ErrorCode::kInvalidArgument, "outputs must not overwrite the trajectory file");
  }
  const std::vector<TrajectorySample> trajectories = LoadTrajectories(trajectories_path);
  AugmentResult result = AugmentTrajectories(trajectories, config, registry);
  nlohmann::json stats = result.stats.ToJson();
  stats["config"] = config.ToJson();
  WriteFileBytes(manifest_path, result.manifest);
  WriteFileBytes(stats_path, stats.dump(2) + "\n");
  return result.stats;
}

}  // namespace panoweave

#endif  // PANOWEAVE_ENV_AUGMENT_H_
