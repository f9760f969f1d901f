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

#ifndef PANOWEAVE_MOCK_SERVICE_H_
#define PANOWEAVE_MOCK_SERVICE_H_

// In-process HTTP service that wraps any GenerationBackend behind the wire
// protocol. Used as the golden-fixture server and for fault injection.

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "panoweave/httplib_wrap.h"
#include "panoweave/backend.h"
#include "panoweave/wire.h"

namespace panoweave {

// One-shot misbehaviours, consumed by the next matching request.
enum class Fault {
  kNone,
  kUnavailable,    // 503 with an error body (retriable)
  kServerError,    // 500 with an error body (not retriable)
  kMalformedJson,  // 200 with a body that is not JSON
  kWrongSize,      // 200 with an image of the wrong dimensions
  kEmptyCaption,   // 200 with {"text": ""}
  kDriftKnown,     // 200 with known pixels shifted by drift_amount
};

class MockGenerationService {
 public:
  explicit MockGenerationService(std::shared_ptr<GenerationBackend> backend,
                                 std::string model_id = "mock-procedural")
      : backend_(std::move(backend)), model_id_(std::move(model_id)) {
    server_.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
      Count("/healthz");
      wire::HealthInfo info;
      for (Capability c : backend_->Capabilities()) info.capabilities.push_back(CapabilityName(c));
      info.model_id = model_id_;
      info.max_width = 2048;
      info.max_height = 2048;
      res.set_content(wire::Encode(info), "application/json");
    });
    server_.Post("/generate", [this](const httplib::Request& req, httplib::Response& res) {
      Handle("/generate", res, [&] {
        const wire::GenerateRequest r = wire::DecodeGenerateRequest(req.body);
        return Reply(backend_->Generate(r.prompt, r.seed, r.width, r.height), nullptr, nullptr);
      });
    });
    server_.Post("/outpaint", [this](const httplib::Request& req, httplib::Response& res) {
      Handle("/outpaint", res, [&] {
        const wire::OutpaintRequest r = wire::DecodeOutpaintRequest(req.body);
        return Reply(backend_->Outpaint(r.image, r.mask, r.prompt, r.seed), &r.image, &r.mask);
      });
    });
    server_.Post("/caption", [this](const httplib::Request& req, httplib::Response& res) {
      Handle("/caption", res, [&] {
        const wire::CaptionRequest r = wire::DecodeCaptionRequest(req.body);
        const Fault fault = TakeFault();
        wire::CaptionResponse out{fault == Fault::kEmptyCaption ? "" : backend_->Caption(r.image),
                                  model_id_};
        if (fault == Fault::kMalformedJson) return std::string("{not json");
        return wire::Encode(out);
      });
    });
  }

  ~MockGenerationService() { Stop(); }

  MockGenerationService(const MockGenerationService&) = delete;
  MockGenerationService& operator=(const MockGenerationService&) = delete;

  // Binds to an ephemeral localhost port and serves on a background thread.
  int Start() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw Error(ErrorCode::kIo, "mock service could not bind");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port_;
  }

  // Serves on a fixed port on the calling thread until stopped.
  bool ListenBlocking(const std::string& host, int port) { return server_.listen(host, port); }

  void Stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  int port() const { return port_; }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  // Queues `fault` for the next `times` requests to generate/outpaint/caption.
  void InjectFault(Fault fault, int times = 1, int drift_amount = 20) {
    std::lock_guard<std::mutex> lock(mu_);
    fault_ = fault;
    fault_remaining_ = times;
    drift_amount_ = drift_amount;
  }

  int RequestCount(const std::string& path) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = counts_.find(path);
    return it == counts_.end() ? 0 : it->second;
  }

 private:
  void Count(const std::string& path) {
    std::lock_guard<std::mutex> lock(mu_);
    ++counts_[path];
  }

  Fault PeekFault() {
    std::lock_guard<std::mutex> lock(mu_);
    return fault_remaining_ > 0 ? fault_ : Fault::kNone;
  }

  Fault TakeFault() {
    std::lock_guard<std::mutex> lock(mu_);
    if (fault_remaining_ <= 0) return Fault::kNone;
    --fault_remaining_;
    return fault_;
  }

  template <typename Fn>
  void Handle(const std::string& path, httplib::Response& res, Fn&& fn) {
    Count(path);
    const Fault pending = PeekFault();
    if (pending == Fault::kUnavailable || pending == Fault::kServerError) {
      TakeFault();
      const bool busy = pending == Fault::kUnavailable;
      res.status = busy ? 503 : 500;
      res.set_content(wire::Encode(wire::ErrorBody{busy ? "unavailable" : "internal",
                                                   busy ? "service busy" : "injected failure"}),
                      "application/json");
      return;
    }
    try {
      res.set_content(fn(), "application/json");
    } catch (const Error& e) {
      res.status = 400;
      res.set_content(wire::Encode(wire::ErrorBody{std::string(ErrorCodeName(e.code())), e.what()}),
                      "application/json");
    }
  }

  std::string Reply(RgbImage image, const RgbImage* request, const GrayImage* mask) {
    const Fault fault = TakeFault();
    if (fault == Fault::kMalformedJson) return "{not json";
    if (fault == Fault::kWrongSize) image = RgbImage(image.width() + 1, image.height());
    if (fault == Fault::kDriftKnown && request != nullptr) {
      int amount;
      {
        std::lock_guard<std::mutex> lock(mu_);
        amount = drift_amount_;
      }
      for (size_t i = 0; i < mask->pixel_count(); ++i) {
        if (mask->bytes()[i] != kMaskKeep) continue;
        for (int c = 0; c < 3; ++c) {
          const int v = request->bytes()[i * 3 + c] + amount;
          image.bytes()[i * 3 + c] = static_cast<uint8_t>(v > 255 ? 255 : v);
        }
      }
    }
    // Latency is reported as zero so recorded responses stay byte-stable.
    return wire::Encode(wire::ImageResponse{std::move(image), model_id_, 0});
  }

  std::shared_ptr<GenerationBackend> backend_;
  std::string model_id_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;

  mutable std::mutex mu_;
  std::map<std::string, int> counts_;
  Fault fault_ = Fault::kNone;
  int fault_remaining_ = 0;
  int drift_amount_ = 20;
};

}  // namespace panoweave

#endif  // PANOWEAVE_MOCK_SERVICE_H_
