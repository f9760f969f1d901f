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

#ifndef PANOWEAVE_HTTP_BACKEND_H_
#define PANOWEAVE_HTTP_BACKEND_H_

// Client for an external generation service speaking the JSON protocol in
// wire.h over plain HTTP.

#include <spdlog/spdlog.h>

#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include "panoweave/httplib_wrap.h"
#include "panoweave/backend.h"
#include "panoweave/canvas.h"
#include "panoweave/error.h"
#include "panoweave/retry.h"
#include "panoweave/wire.h"

namespace panoweave {

inline constexpr char kBackendUrlEnv[] = "PANOWEAVE_BACKEND_URL";

// How far a service may move pixels it was told to keep. Pixels within
// `band_px` of the generated region may drift by `band_tolerance`; others by
// `interior_tolerance`. The client re-copies every known pixel afterwards,
// so callers always see them unchanged.
struct KnownRegionTolerance {
  int band_px = 4;
  int band_tolerance = 12;
  int interior_tolerance = 12;
  bool strict = false;  // throw instead of logging on violation
};

struct HttpBackendOptions {
  std::string base_url = "http://127.0.0.1:8080";
  std::chrono::milliseconds timeout{60000};
  RetryPolicy retry;
  int steps = wire::kDefaultSteps;
  double guidance = wire::kDefaultGuidance;
  int max_width = 2048;
  int max_height = 2048;
  int max_in_flight = 4;
  KnownRegionTolerance known_region;
};

struct DriftReport {
  int max_band_drift = 0;
  int max_interior_drift = 0;
  bool violation = false;
};

// Measures how far `reply` moved the pixels `mask` marks as known.
inline DriftReport MeasureKnownDrift(const RgbImage& request, const GrayImage& mask,
                                     const RgbImage& reply,
                                     const KnownRegionTolerance& tol) {
  const int w = request.width();
  const int h = request.height();
  std::vector<uint8_t> generate(mask.pixel_count());
  for (size_t i = 0; i < generate.size(); ++i) generate[i] = mask.bytes()[i] != kMaskKeep;
  const std::vector<double> dist =
      internal::DistanceToSeeds(generate, w, h, tol.band_px + 1.0, /*wrap=*/false);
  DriftReport report;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t i = static_cast<size_t>(y) * w + x;
      if (generate[i]) continue;
      int d = 0;
      for (int c = 0; c < 3; ++c) {
        d = std::max(d, std::abs(int(request.at(x, y, c)) - int(reply.at(x, y, c))));
      }
      if (dist[i] <= tol.band_px) {
        report.max_band_drift = std::max(report.max_band_drift, d);
      } else {
        report.max_interior_drift = std::max(report.max_interior_drift, d);
      }
    }
  }
  report.violation = report.max_band_drift > tol.band_tolerance ||
                     report.max_interior_drift > tol.interior_tolerance;
  return report;
}

class HttpBackend : public GenerationBackend {
 public:
  explicit HttpBackend(HttpBackendOptions options, Sleeper sleeper = RealSleep)
      : options_(std::move(options)),
        sleeper_(std::move(sleeper)),
        slots_(std::max(1, options_.max_in_flight)) {}

  const HttpBackendOptions& options() const { return options_; }

  std::string Identity() const override {
    std::lock_guard<std::mutex> lock(mu_);
    return "http:" + options_.base_url + (model_id_.empty() ? "" : "/" + model_id_);
  }

  std::vector<Capability> Capabilities() const override {
    std::vector<Capability> out;
    for (const std::string& name : Health().capabilities) {
      if (name == "generate") out.push_back(Capability::kGenerate);
      if (name == "outpaint") out.push_back(Capability::kOutpaint);
      if (name == "caption") out.push_back(Capability::kCaption);
    }
    return out;
  }

  // GET /healthz. Throws backend-unavailable when the service is unreachable.
  wire::HealthInfo Health() const {
    auto result = RetryWithBackoff<httplib::Result>(
        options_.retry,
        [&](int) -> std::optional<httplib::Result> {
          httplib::Client client = MakeClient();
          httplib::Result res = client.Get("/healthz");
          if (!res || IsRetriableStatus(res->status)) return std::nullopt;
          return res;
        },
        sleeper_);
    if (!result) Unavailable("/healthz");
    CheckStatus(*result);
    wire::HealthInfo info = wire::DecodeHealthInfo((*result)->body);
    std::lock_guard<std::mutex> lock(mu_);
    model_id_ = info.model_id;
    return info;
  }

  RgbImage Generate(const std::string& prompt, uint64_t seed, int width,
                    int height) override {
    CheckSize(width, height);
    wire::GenerateRequest req{prompt, seed, width, height, options_.steps, options_.guidance};
    wire::ImageResponse resp = wire::DecodeImageResponse(Post("/generate", wire::Encode(req)));
    if (!resp.image.SameSize(width, height)) {
      throw Error(ErrorCode::kProtocolViolation, "/generate returned a wrongly sized image");
    }
    return std::move(resp.image);
  }

  RgbImage Outpaint(const RgbImage& image, const GrayImage& mask, const std::string& prompt,
                    uint64_t seed) override {
    if (!image.SameSize(mask)) {
      throw Error(ErrorCode::kInvalidArgument, "mask dimensions differ from image");
    }
    CheckSize(image.width(), image.height());
    wire::OutpaintRequest req{image, mask, prompt, seed, options_.steps, options_.guidance};
    wire::ImageResponse resp = wire::DecodeImageResponse(Post("/outpaint", wire::Encode(req)));
    if (!resp.image.SameSize(image)) {
      throw Error(ErrorCode::kProtocolViolation, "/outpaint returned a wrongly sized image");
    }
    const DriftReport drift = MeasureKnownDrift(image, mask, resp.image, options_.known_region);
    if (drift.violation) {
      ++drift_violations_;
      const std::string msg = "known-region drift beyond tolerance (band " +
                              std::to_string(drift.max_band_drift) + ", interior " +
                              std::to_string(drift.max_interior_drift) + ")";
      if (options_.known_region.strict) throw Error(ErrorCode::kProtocolViolation, msg);
      spdlog::warn("/outpaint: {}", msg);
    }
    RgbImage out = std::move(resp.image);
    for (size_t i = 0; i < mask.pixel_count(); ++i) {
      if (mask.bytes()[i] != kMaskKeep) continue;
      for (int c = 0; c < 3; ++c) out.bytes()[i * 3 + c] = image.bytes()[i * 3 + c];
    }
    return out;
  }

  std::string Caption(const RgbImage& image) override {
    CheckSize(image.width(), image.height());
    wire::CaptionResponse resp =
        wire::DecodeCaptionResponse(Post("/caption", wire::Encode(wire::CaptionRequest{image})));
    std::string text = NormalizeWhitespace(resp.text);
    if (text.empty()) throw Error(ErrorCode::kProtocolViolation, "/caption returned empty text");
    return text;
  }

  int drift_violations() const { return drift_violations_.load(); }

  static std::string NormalizeWhitespace(std::string_view in) {
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

 private:
  static bool IsRetriableStatus(int status) {
    return status == 502 || status == 503 || status == 504;
  }

  httplib::Client MakeClient() const {
    httplib::Client client(options_.base_url);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
        options_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    return client;
  }

  void CheckSize(int width, int height) const {
    if (width <= 0 || height <= 0) {
      throw Error(ErrorCode::kInvalidArgument, "image size must be positive");
    }
    if (width > options_.max_width || height > options_.max_height) {
      throw Error(ErrorCode::kInvalidArgument,
                  "image " + std::to_string(width) + "x" + std::to_string(height) +
                      " exceeds service limit " + std::to_string(options_.max_width) + "x" +
                      std::to_string(options_.max_height));
    }
  }

  [[noreturn]] void Unavailable(const std::string& path) const {
    throw Error(ErrorCode::kBackendUnavailable,
                options_.base_url + path + " unreachable after " +
                    std::to_string(options_.retry.max_attempts) + " attempts");
  }

  static void CheckStatus(const httplib::Result& res) {
    if (res->status >= 200 && res->status < 300) return;
    std::string detail = res->body;
    try {
      const wire::ErrorBody body = wire::DecodeErrorBody(res->body);
      detail = body.code + ": " + body.message;
    } catch (const Error&) {
      // Non-conforming error body; report it verbatim.
    }
    throw Error(ErrorCode::kServiceError,
                "HTTP " + std::to_string(res->status) + " " + detail);
  }

  std::string Post(const std::string& path, const std::string& body) {
    std::counting_semaphore<>& slots = slots_;
    slots.acquire();
    struct Release {
      std::counting_semaphore<>& s;
      ~Release() { s.release(); }
    } release{slots};

    auto result = RetryWithBackoff<httplib::Result>(
        options_.retry,
        [&](int attempt) -> std::optional<httplib::Result> {
          httplib::Client client = MakeClient();
          httplib::Result res = client.Post(path, body, "application/json");
          if (!res) {
            spdlog::debug("{} attempt {} transport error: {}", path, attempt + 1,
                          httplib::to_string(res.error()));
            return std::nullopt;
          }
          if (IsRetriableStatus(res->status)) {
            spdlog::debug("{} attempt {} got HTTP {}", path, attempt + 1, res->status);
            return std::nullopt;
          }
          return res;
        },
        sleeper_);
    if (!result) Unavailable(path);
    CheckStatus(*result);
    return (*result)->body;
  }

  HttpBackendOptions options_;
  Sleeper sleeper_;
  std::counting_semaphore<> slots_;
  std::atomic<int> drift_violations_{0};
  mutable std::mutex mu_;
  mutable std::string model_id_;
};

}  // namespace panoweave

#endif  // PANOWEAVE_HTTP_BACKEND_H_
