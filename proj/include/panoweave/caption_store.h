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

#ifndef PANOWEAVE_CAPTION_STORE_H_
#define PANOWEAVE_CAPTION_STORE_H_

// Per-view room descriptions keyed by (scan, viewpoint, view index).
//
// Persisted as `captions.jsonl`, one record per line:
//   {"elevation_index":0,"heading_index":3,"scan_id":"S1","source":"service",
//    "text":"a bedroom with a bed","viewpoint_id":"V1"}

#include <spdlog/spdlog.h>

#include <cctype>
#include <compare>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "panoweave/backend.h"
#include "panoweave/error.h"
#include "panoweave/image.h"
#include "panoweave/image_io.h"
#include "panoweave/spherical.h"

namespace panoweave {

enum class CaptionSource { kService, kImported };

inline const char* CaptionSourceName(CaptionSource s) {
  return s == CaptionSource::kService ? "service" : "imported";
}

struct ViewpointKey {
  std::string scan_id;
  std::string viewpoint_id;
  friend auto operator<=>(const ViewpointKey&, const ViewpointKey&) = default;
};

struct CaptionKey {
  std::string scan_id;
  std::string viewpoint_id;
  ViewIndex view_index;

  ViewpointKey viewpoint() const { return {scan_id, viewpoint_id}; }
  std::string ToString() const {
    return scan_id + "\t" + viewpoint_id + "\t" + std::to_string(view_index.heading_index) +
           "\t" + std::to_string(view_index.elevation_index);
  }
  friend auto operator<=>(const CaptionKey&, const CaptionKey&) = default;
};

struct CaptionRecord {
  std::string scan_id;
  std::string viewpoint_id;
  ViewIndex view_index;
  std::string text;
  CaptionSource source = CaptionSource::kImported;

  CaptionKey key() const { return {scan_id, viewpoint_id, view_index}; }
  friend bool operator==(const CaptionRecord&, const CaptionRecord&) = default;
};

// Trims and collapses internal whitespace runs to single spaces.
inline std::string NormalizeCaptionText(std::string_view in) {
  std::string out;
  bool pending_space = false;
  for (char ch : in) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(ch);
  }
  return out;
}

inline nlohmann::json CaptionToJson(const CaptionRecord& r) {
  nlohmann::json j;
  j["scan_id"] = r.scan_id;
  j["viewpoint_id"] = r.viewpoint_id;
  j["heading_index"] = r.view_index.heading_index;
  j["elevation_index"] = r.view_index.elevation_index;
  j["text"] = r.text;
  j["source"] = CaptionSourceName(r.source);
  return j;
}

// Throws Error(kParse) with a description; callers add the line number.
inline CaptionRecord CaptionFromJson(const nlohmann::json& j) {
  auto fail = [](const std::string& what) -> void { throw Error(ErrorCode::kParse, what); };
  if (!j.is_object()) fail("record is not a JSON object");
  for (const char* key : {"scan_id", "viewpoint_id", "text"}) {
    if (!j.contains(key) || !j[key].is_string()) fail(std::string("'") + key + "' must be a string");
  }
  for (const char* key : {"heading_index", "elevation_index"}) {
    if (!j.contains(key) || !j[key].is_number_integer()) {
      fail(std::string("'") + key + "' must be an integer");
    }
  }
  CaptionRecord r;
  r.scan_id = j["scan_id"].get<std::string>();
  r.viewpoint_id = j["viewpoint_id"].get<std::string>();
  r.view_index = {j["heading_index"].get<int>(), j["elevation_index"].get<int>()};
  if (!r.view_index.IsValid()) fail("view index out of the 12x3 grid");
  if (r.scan_id.empty() || r.viewpoint_id.empty()) fail("empty scan or viewpoint id");
  r.text = NormalizeCaptionText(j["text"].get<std::string>());
  if (r.text.empty()) fail("caption text is empty");
  if (j.contains("source")) {
    const auto& s = j["source"];
    if (s == "service") {
      r.source = CaptionSource::kService;
    } else if (s == "imported") {
      r.source = CaptionSource::kImported;
    } else {
      fail("'source' must be \"service\" or \"imported\"");
    }
  }
  return r;
}

class CaptionStore {
 public:
  // Inserts or replaces. Returns true when an existing record was replaced.
  bool Upsert(CaptionRecord record) {
    record.text = NormalizeCaptionText(record.text);
    if (record.text.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "caption text is empty");
    }
    if (!record.view_index.IsValid()) {
      throw Error(ErrorCode::kInvalidArgument, "view index out of the 12x3 grid");
    }
    CaptionKey key = record.key();
    auto [it, inserted] = records_.insert_or_assign(std::move(key), std::move(record));
    return !inserted;
  }

  size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::map<CaptionKey, CaptionRecord>& records() const { return records_; }

  const CaptionRecord* Find(const CaptionKey& key) const {
    auto it = records_.find(key);
    return it == records_.end() ? nullptr : &it->second;
  }

  // Records of one viewpoint, ordered by view index.
  std::vector<const CaptionRecord*> ViewpointRecords(const ViewpointKey& vp) const {
    std::vector<const CaptionRecord*> out;
    for (auto it = records_.lower_bound({vp.scan_id, vp.viewpoint_id, {-1, -2}});
         it != records_.end() && it->first.scan_id == vp.scan_id &&
         it->first.viewpoint_id == vp.viewpoint_id;
         ++it) {
      out.push_back(&it->second);
    }
    return out;
  }

  bool IsComplete(const ViewpointKey& vp) const {
    return ViewpointRecords(vp).size() == static_cast<size_t>(kViewCount);
  }

  std::vector<ViewpointKey> Viewpoints() const {
    std::vector<ViewpointKey> out;
    for (const auto& [key, rec] : records_) {
      ViewpointKey vp = key.viewpoint();
      if (out.empty() || out.back() != vp) out.push_back(std::move(vp));
    }
    return out;
  }

  // Duplicate keys seen by the Ingest that produced this store.
  size_t duplicate_count() const { return duplicate_count_; }
  void set_duplicate_count(size_t n) { duplicate_count_ = n; }

 private:
  std::map<CaptionKey, CaptionRecord> records_;
  size_t duplicate_count_ = 0;
};

// Parses a captions.jsonl stream. Duplicate keys resolve last-wins.
inline CaptionStore IngestCaptions(std::istream& in, const std::string& origin = "<stream>") {
  CaptionStore store;
  size_t duplicates = 0;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (NormalizeCaptionText(line).empty()) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      if (store.Upsert(CaptionFromJson(j))) ++duplicates;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse,
                  origin + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse, origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (duplicates > 0) {
    spdlog::info("{}: {} duplicate caption keys, later lines kept", origin, duplicates);
  }
  store.set_duplicate_count(duplicates);
  return store;
}

inline CaptionStore IngestCaptions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return IngestCaptions(in, path.string());
}

inline void WriteCaptions(const CaptionStore& store, std::ostream& out) {
  for (const auto& [key, rec] : store.records()) out << CaptionToJson(rec).dump() << '\n';
}

inline void WriteCaptions(const CaptionStore& store, const std::filesystem::path& path) {
  std::ostringstream buf;
  WriteCaptions(store, buf);
  WriteFileBytes(path, buf.str());
}

// Record of the grid view whose centre is nearest to `dir`, among those the
// viewpoint has. Ties go to the smaller heading index, then elevation index.
inline const CaptionRecord& NearestCaption(const CaptionStore& store, const ViewpointKey& vp,
                                           const SphericalDirection& dir) {
  const std::vector<const CaptionRecord*> candidates = store.ViewpointRecords(vp);
  if (candidates.empty()) {
    throw Error(ErrorCode::kNotFound,
                "no captions for viewpoint " + vp.scan_id + "/" + vp.viewpoint_id);
  }
  const CaptionRecord* best = nullptr;
  double best_dist = 1e300;
  for (const CaptionRecord* rec : candidates) {  // ascending view-index order
    const double d = AngularDistanceDeg(dir, rec->view_index.Center());
    if (d < best_dist - 1e-12) {
      best = rec;
      best_dist = d;
    }
  }
  return *best;
}

// ---------------------------------------------------------------------------
// Batch captioning with a resumable checkpoint.

inline constexpr char kCheckpointFileName[] = "captions.ckpt";

struct CaptionBatchResult {
  std::vector<CaptionRecord> records;
  std::vector<std::pair<CaptionKey, std::string>> failures;
  size_t skipped = 0;  // already in the checkpoint
};

inline std::set<std::string> ReadCheckpoint(const std::filesystem::path& path) {
  std::set<std::string> done;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) done.insert(line);
  }
  return done;
}

inline void AppendLine(const std::filesystem::path& path, const std::string& line) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error(ErrorCode::kIo, "cannot append to " + path.string());
  out << line << '\n';
  out.flush();
}

// Captions each image through `backend`, appending successes to `store` and to
// `store_path`, and recording finished keys in `checkpoint_path`. Keys already
// in the checkpoint are skipped. Per-item service errors are collected; an
// unreachable backend aborts the batch, leaving the checkpoint for a resume.
inline CaptionBatchResult CaptionViews(
    const std::vector<std::pair<CaptionKey, RgbImage>>& images, GenerationBackend& backend,
    CaptionStore& store, const std::filesystem::path& store_path,
    const std::filesystem::path& checkpoint_path) {
  CaptionBatchResult result;
  if (images.empty()) return result;
  const std::set<std::string> done = ReadCheckpoint(checkpoint_path);
  for (const auto& [key, image] : images) {
    if (done.count(key.ToString())) {
      ++result.skipped;
      continue;
    }
    std::string text;
    try {
      text = NormalizeCaptionText(backend.Caption(image));
      if (text.empty()) throw Error(ErrorCode::kProtocolViolation, "empty caption");
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kBackendUnavailable) throw;
      spdlog::warn("caption {} failed: {}", key.ToString(), e.what());
      result.failures.emplace_back(key, e.what());
      continue;
    }
    CaptionRecord rec{key.scan_id, key.viewpoint_id, key.view_index, text,
                      CaptionSource::kService};
    store.Upsert(rec);
    AppendLine(store_path, CaptionToJson(rec).dump());
    AppendLine(checkpoint_path, key.ToString());
    result.records.push_back(std::move(rec));
  }
  return result;
}

}  // namespace panoweave

#endif  // PANOWEAVE_CAPTION_STORE_H_
