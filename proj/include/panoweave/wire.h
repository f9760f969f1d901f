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

#ifndef PANOWEAVE_WIRE_H_
#define PANOWEAVE_WIRE_H_

// JSON messages of the generation-service protocol. Images travel as
// base64-encoded PNG; masks are 8-bit grayscale with 255 = generate here and
// 0 = keep. Encoding is canonical (sorted keys, compact), so
// Encode(Decode(text)) == text for any text this module produced.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "panoweave/backend.h"
#include "panoweave/error.h"
#include "panoweave/image.h"
#include "panoweave/image_io.h"

namespace panoweave::wire {

using nlohmann::json;

inline constexpr int kDefaultSteps = 50;
inline constexpr double kDefaultGuidance = 7.5;

struct GenerateRequest {
  std::string prompt;
  uint64_t seed = 0;
  int width = 0;
  int height = 0;
  int steps = kDefaultSteps;
  double guidance = kDefaultGuidance;
  friend bool operator==(const GenerateRequest&, const GenerateRequest&) = default;
};

struct OutpaintRequest {
  RgbImage image;
  GrayImage mask;
  std::string prompt;
  uint64_t seed = 0;
  int steps = kDefaultSteps;
  double guidance = kDefaultGuidance;
  friend bool operator==(const OutpaintRequest&, const OutpaintRequest&) = default;
};

struct ImageResponse {
  RgbImage image;
  std::string model_id;
  int64_t latency_ms = 0;
  friend bool operator==(const ImageResponse&, const ImageResponse&) = default;
};

struct CaptionRequest {
  RgbImage image;
  friend bool operator==(const CaptionRequest&, const CaptionRequest&) = default;
};

struct CaptionResponse {
  std::string text;
  std::string model_id;  // optional on the wire
  friend bool operator==(const CaptionResponse&, const CaptionResponse&) = default;
};

struct ErrorBody {
  std::string code;
  std::string message;
  friend bool operator==(const ErrorBody&, const ErrorBody&) = default;
};

struct HealthInfo {
  std::vector<std::string> capabilities;
  std::string model_id;
  std::optional<int> max_width;
  std::optional<int> max_height;
  std::optional<int> max_in_flight;
  friend bool operator==(const HealthInfo&, const HealthInfo&) = default;
};

namespace internal {

[[noreturn]] inline void Violation(const std::string& what) {
  throw Error(ErrorCode::kProtocolViolation, what);
}

inline json ParseObject(const std::string& text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) Violation("body is not a JSON object");
  return j;
}

template <typename T>
T Field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) Violation(std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    Violation(std::string("field '") + key + "' has the wrong type");
  }
}

inline std::string Text(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    Violation(std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

inline uint64_t Unsigned(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_unsigned()) {
    Violation(std::string("field '") + key + "' must be an unsigned integer");
  }
  return it->get<uint64_t>();
}

inline int64_t Integer(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_integer()) {
    Violation(std::string("field '") + key + "' must be an integer");
  }
  return it->get<int64_t>();
}

inline double Real(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) {
    Violation(std::string("field '") + key + "' must be a number");
  }
  return it->get<double>();
}

template <int kChannels>
std::string ImageField(const Image<kChannels>& img) {
  return Base64Encode(EncodePng(img));
}

template <int kChannels>
Image<kChannels> ImageFrom(const json& j, const char* key) {
  const std::string b64 = Text(j, key);
  try {
    return DecodePng<kChannels>(Base64Decode(b64));
  } catch (const Error& e) {
    Violation(std::string("field '") + key + "' is not a base64 PNG: " + e.what());
  }
}

}  // namespace internal

inline std::string Encode(const GenerateRequest& r) {
  json j;
  j["prompt"] = r.prompt;
  j["seed"] = r.seed;
  j["width"] = r.width;
  j["height"] = r.height;
  j["steps"] = r.steps;
  j["guidance"] = r.guidance;
  return j.dump();
}

inline std::string Encode(const OutpaintRequest& r) {
  json j;
  j["image"] = internal::ImageField(r.image);
  j["mask"] = internal::ImageField(r.mask);
  j["prompt"] = r.prompt;
  j["seed"] = r.seed;
  j["steps"] = r.steps;
  j["guidance"] = r.guidance;
  return j.dump();
}

inline std::string Encode(const ImageResponse& r) {
  json j;
  j["image"] = internal::ImageField(r.image);
  j["model_id"] = r.model_id;
  j["latency_ms"] = r.latency_ms;
  return j.dump();
}

inline std::string Encode(const CaptionRequest& r) {
  json j;
  j["image"] = internal::ImageField(r.image);
  return j.dump();
}

inline std::string Encode(const CaptionResponse& r) {
  json j;
  j["text"] = r.text;
  if (!r.model_id.empty()) j["model_id"] = r.model_id;
  return j.dump();
}

inline std::string Encode(const ErrorBody& r) {
  json j;
  j["code"] = r.code;
  j["message"] = r.message;
  return j.dump();
}

inline std::string Encode(const HealthInfo& r) {
  json j;
  j["capabilities"] = r.capabilities;
  j["model_id"] = r.model_id;
  if (r.max_width) j["max_width"] = *r.max_width;
  if (r.max_height) j["max_height"] = *r.max_height;
  if (r.max_in_flight) j["max_in_flight"] = *r.max_in_flight;
  return j.dump();
}

inline GenerateRequest DecodeGenerateRequest(const std::string& text) {
  const json j = internal::ParseObject(text);
  GenerateRequest r;
  r.prompt = internal::Text(j, "prompt");
  r.seed = internal::Unsigned(j, "seed");
  r.width = static_cast<int>(internal::Integer(j, "width"));
  r.height = static_cast<int>(internal::Integer(j, "height"));
  r.steps = static_cast<int>(internal::Integer(j, "steps"));
  r.guidance = internal::Real(j, "guidance");
  return r;
}

inline OutpaintRequest DecodeOutpaintRequest(const std::string& text) {
  const json j = internal::ParseObject(text);
  OutpaintRequest r;
  r.image = internal::ImageFrom<3>(j, "image");
  r.mask = internal::ImageFrom<1>(j, "mask");
  if (!r.image.SameSize(r.mask)) internal::Violation("mask dimensions differ from image");
  r.prompt = internal::Text(j, "prompt");
  r.seed = internal::Unsigned(j, "seed");
  r.steps = static_cast<int>(internal::Integer(j, "steps"));
  r.guidance = internal::Real(j, "guidance");
  return r;
}

inline ImageResponse DecodeImageResponse(const std::string& text) {
  const json j = internal::ParseObject(text);
  ImageResponse r;
  r.image = internal::ImageFrom<3>(j, "image");
  r.model_id = internal::Text(j, "model_id");
  r.latency_ms = internal::Integer(j, "latency_ms");
  return r;
}

inline CaptionRequest DecodeCaptionRequest(const std::string& text) {
  const json j = internal::ParseObject(text);
  return {internal::ImageFrom<3>(j, "image")};
}

inline CaptionResponse DecodeCaptionResponse(const std::string& text) {
  const json j = internal::ParseObject(text);
  CaptionResponse r;
  r.text = internal::Text(j, "text");
  if (j.contains("model_id")) r.model_id = internal::Text(j, "model_id");
  return r;
}

inline ErrorBody DecodeErrorBody(const std::string& text) {
  const json j = internal::ParseObject(text);
  return {internal::Text(j, "code"), internal::Text(j, "message")};
}

inline HealthInfo DecodeHealthInfo(const std::string& text) {
  const json j = internal::ParseObject(text);
  HealthInfo r;
  auto caps = j.find("capabilities");
  if (caps == j.end() || !caps->is_array()) {
    internal::Violation("field 'capabilities' must be an array");
  }
  for (const json& c : *caps) {
    if (!c.is_string()) internal::Violation("capabilities must be strings");
    r.capabilities.push_back(c.get<std::string>());
  }
  r.model_id = internal::Text(j, "model_id");
  if (j.contains("max_width")) r.max_width = static_cast<int>(internal::Integer(j, "max_width"));
  if (j.contains("max_height")) r.max_height = static_cast<int>(internal::Integer(j, "max_height"));
  if (j.contains("max_in_flight")) {
    r.max_in_flight = static_cast<int>(internal::Integer(j, "max_in_flight"));
  }
  return r;
}

}  // namespace panoweave::wire

#endif  // PANOWEAVE_WIRE_H_
