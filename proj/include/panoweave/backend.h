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

#ifndef PANOWEAVE_BACKEND_H_
#define PANOWEAVE_BACKEND_H_

#include <cstdint>
#include <memory>
#include <semaphore>
#include <string>
#include <vector>

#include "panoweave/error.h"
#include "panoweave/image.h"

namespace panoweave {

enum class Capability { kGenerate, kOutpaint, kCaption };

inline const char* CapabilityName(Capability c) {
  switch (c) {
    case Capability::kGenerate:
      return "generate";
    case Capability::kOutpaint:
      return "outpaint";
    case Capability::kCaption:
      return "caption";
  }
  return "unknown";
}

// Mask polarity used across the generation boundary.
inline constexpr uint8_t kMaskGenerate = 255;
inline constexpr uint8_t kMaskKeep = 0;

// Image generation boundary. Implementations must return images of exactly
// the requested (generate) or input (outpaint) dimensions; outpaint keeps the
// pixels where mask == kMaskKeep.
class GenerationBackend {
 public:
  virtual ~GenerationBackend() = default;

  // Name and version, recorded in provenance.
  virtual std::string Identity() const = 0;
  virtual std::vector<Capability> Capabilities() const = 0;

  virtual RgbImage Generate(const std::string& prompt, uint64_t seed, int width,
                            int height) = 0;
  virtual RgbImage Outpaint(const RgbImage& image, const GrayImage& mask,
                            const std::string& prompt, uint64_t seed) = 0;
  virtual std::string Caption(const RgbImage& image) {
    (void)image;
    throw Error(ErrorCode::kInvalidArgument, Identity() + " cannot caption");
  }

  bool Supports(Capability c) const {
    for (Capability have : Capabilities()) {
      if (have == c) return true;
    }
    return false;
  }
};

// Caps the number of requests in flight against a shared backend when
// several panoramas generate concurrently.
class ConcurrencyLimitedBackend : public GenerationBackend {
 public:
  ConcurrencyLimitedBackend(std::shared_ptr<GenerationBackend> inner, int max_in_flight)
      : inner_(std::move(inner)), slots_(max_in_flight) {
    if (max_in_flight <= 0) {
      throw Error(ErrorCode::kInvalidArgument, "in-flight cap must be positive");
    }
  }

  std::string Identity() const override { return inner_->Identity(); }
  std::vector<Capability> Capabilities() const override { return inner_->Capabilities(); }

  RgbImage Generate(const std::string& prompt, uint64_t seed, int width,
                    int height) override {
    Slot slot(slots_);
    return inner_->Generate(prompt, seed, width, height);
  }
  RgbImage Outpaint(const RgbImage& image, const GrayImage& mask,
                    const std::string& prompt, uint64_t seed) override {
    Slot slot(slots_);
    return inner_->Outpaint(image, mask, prompt, seed);
  }
  std::string Caption(const RgbImage& image) override {
    Slot slot(slots_);
    return inner_->Caption(image);
  }

 private:
  struct Slot {
    explicit Slot(std::counting_semaphore<>& s) : sem(s) { sem.acquire(); }
    ~Slot() { sem.release(); }
    std::counting_semaphore<>& sem;
  };

  std::shared_ptr<GenerationBackend> inner_;
  std::counting_semaphore<> slots_;
};

}  // namespace panoweave

#endif  // PANOWEAVE_BACKEND_H_
