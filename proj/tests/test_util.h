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

#ifndef PANOWEAVE_TESTS_TEST_UTIL_H_
#define PANOWEAVE_TESTS_TEST_UTIL_H_

#include <atomic>
#include <filesystem>
#include <memory>
#include <random>
#include <string>

#include "panoweave/backend.h"
#include "panoweave/caption_store.h"
#include "panoweave/outpaint_engine.h"
#include "panoweave/procedural_backend.h"

namespace panoweave::testing {

// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("panoweave-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

// Default geometry at reduced resolution.
inline OutpaintConfig SmallConfig(int view_px = 96, uint64_t seed = 1) {
  OutpaintConfig c;
  c.view_grid.width_px = view_px;
  c.view_grid.height_px = view_px;
  c.canvas_height_px = 2 * view_px;
  c.blend_width_px = view_px / 16.0;
  c.seed = seed;
  return c;
}

inline ViewpointCaptions MakeCaptions(const std::string& scan, const std::string& vp,
                                      const std::string& theme = "a quiet living room") {
  ViewpointCaptions c{{scan, vp}, {}};
  for (const ViewIndex& idx : AllViewIndices()) c.text[idx.Ordinal()] = theme + " view " + idx.Name();
  return c;
}

inline void AddCaptions(CaptionStore& store, const ViewpointCaptions& c) {
  for (const ViewIndex& idx : AllViewIndices()) {
    store.Upsert(CaptionRecord{c.viewpoint.scan_id, c.viewpoint.viewpoint_id, idx,
                               c.text[idx.Ordinal()], CaptionSource::kImported});
  }
}

// Forwards to a procedural backend, counting calls; optionally fails from a
// given call number on.
class CountingBackend : public GenerationBackend {
 public:
  explicit CountingBackend(int fail_from = -1) : fail_from_(fail_from) {}

  std::string Identity() const override { return inner_.Identity(); }
  std::vector<Capability> Capabilities() const override { return inner_.Capabilities(); }
  RgbImage Generate(const std::string& prompt, uint64_t seed, int w, int h) override {
    Tick();
    return inner_.Generate(prompt, seed, w, h);
  }
  RgbImage Outpaint(const RgbImage& image, const GrayImage& mask, const std::string& prompt,
                    uint64_t seed) override {
    Tick();
    return inner_.Outpaint(image, mask, prompt, seed);
  }
  std::string Caption(const RgbImage& image) override {
    Tick();
    return inner_.Caption(image);
  }

  int calls() const { return calls_.load(); }

 private:
  void Tick() {
    const int n = calls_++;
    if (fail_from_ >= 0 && n >= fail_from_) {
      throw Error(ErrorCode::kServiceError, "injected failure at call " + std::to_string(n));
    }
  }

  ProceduralBackend inner_;
  int fail_from_;
  std::atomic<int> calls_{0};
};

}  // namespace panoweave::testing

#endif  // PANOWEAVE_TESTS_TEST_UTIL_H_
