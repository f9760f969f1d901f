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

#include "panoweave/http_backend.h"

#include <gtest/gtest.h>

#include <chrono>
#include <memory>
#include <vector>

#include "panoweave/image_io.h"
#include "panoweave/mock_service.h"
#include "panoweave/procedural_backend.h"

namespace panoweave {
namespace {

class HttpBackendTest : public ::testing::Test {
 protected:
  void SetUp() override {
    service_ = std::make_unique<MockGenerationService>(std::make_shared<ProceduralBackend>());
    service_->Start();
  }

  HttpBackend Client(KnownRegionTolerance tol = {}) {
    HttpBackendOptions o;
    o.base_url = service_->url();
    o.timeout = std::chrono::milliseconds(5000);
    o.known_region = tol;
    return HttpBackend(o, [this](std::chrono::milliseconds d) { sleeps_.push_back(d); });
  }

  static ErrorCode CodeOf(const std::function<void()>& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::kInvalidArgument;
  }

  std::unique_ptr<MockGenerationService> service_;
  std::vector<std::chrono::milliseconds> sleeps_;
};

TEST_F(HttpBackendTest, HealthAndIdentity) {
  HttpBackend b = Client();
  const auto info = b.Health();
  EXPECT_EQ(info.model_id, "mock-procedural");
  EXPECT_TRUE(b.Supports(Capability::kOutpaint));
  EXPECT_EQ(b.Identity(), "http:" + service_->url() + "/mock-procedural");
}

TEST_F(HttpBackendTest, GenerateMatchesGoldenFixture) {
  HttpBackend b = Client();
  const RgbImage img = b.Generate("a bright kitchen", 7, 8, 8);
  const auto golden = wire::DecodeImageResponse(ReadFileBytes(
      std::filesystem::path(PANOWEAVE_FIXTURE_DIR) / "wire" / "generate_response.json"));
  EXPECT_EQ(Sha256Hex(EncodePng(img)), Sha256Hex(EncodePng(golden.image)));
  EXPECT_EQ(img, ProceduralGenerate("a bright kitchen", 7, 8, 8));
}

TEST_F(HttpBackendTest, OutpaintOverTheWireEqualsLocal) {
  HttpBackend b = Client();
  const RgbImage in = ProceduralGenerate("left", 1, 32, 32);
  GrayImage mask(32, 32);
  for (int y = 0; y < 32; ++y)
    for (int x = 16; x < 32; ++x) *mask.pixel(x, y) = kMaskGenerate;
  EXPECT_EQ(b.Outpaint(in, mask, "right", 3), ProceduralOutpaint(in, mask, "right", 3));
  EXPECT_EQ(b.drift_violations(), 0);
}

TEST_F(HttpBackendTest, AllKnownMaskReturnsInput) {
  HttpBackend b = Client();
  const RgbImage in = ProceduralGenerate("x", 1, 16, 16);
  EXPECT_EQ(b.Outpaint(in, GrayImage(16, 16), "y", 2), in);
}

TEST_F(HttpBackendTest, DriftIsFlaggedAndKnownPixelsRecopied) {
  HttpBackend b = Client();
  const RgbImage in = ProceduralGenerate("x", 1, 16, 16);
  GrayImage mask(16, 16);
  for (int y = 0; y < 16; ++y) *mask.pixel(15, y) = kMaskGenerate;
  service_->InjectFault(Fault::kDriftKnown, 1, 30);
  const RgbImage out = b.Outpaint(in, mask, "y", 2);
  EXPECT_EQ(b.drift_violations(), 1);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 15; ++x)
      for (int c = 0; c < 3; ++c) ASSERT_EQ(out.pixel(x, y)[c], in.pixel(x, y)[c]);
}

TEST_F(HttpBackendTest, DriftWithinToleranceIsAccepted) {
  HttpBackend b = Client();
  const RgbImage in = ProceduralGenerate("x", 1, 16, 16);
  GrayImage mask(16, 16);
  for (int y = 0; y < 16; ++y) *mask.pixel(15, y) = kMaskGenerate;
  service_->InjectFault(Fault::kDriftKnown, 1, 12);
  b.Outpaint(in, mask, "y", 2);
  EXPECT_EQ(b.drift_violations(), 0);
}

TEST_F(HttpBackendTest, StrictDriftThrows) {
  HttpBackend b = Client(KnownRegionTolerance{4, 12, 12, true});
  const RgbImage in = ProceduralGenerate("x", 1, 16, 16);
  GrayImage mask(16, 16);
  *mask.pixel(0, 0) = kMaskGenerate;
  service_->InjectFault(Fault::kDriftKnown, 1, 40);
  EXPECT_EQ(CodeOf([&] { b.Outpaint(in, mask, "y", 2); }), ErrorCode::kProtocolViolation);
}

TEST_F(HttpBackendTest, RetriesUnavailableThenSucceeds) {
  HttpBackend b = Client();
  service_->InjectFault(Fault::kUnavailable, 2);
  EXPECT_EQ(b.Generate("x", 1, 8, 8), ProceduralGenerate("x", 1, 8, 8));
  EXPECT_EQ(service_->RequestCount("/generate"), 3);
  ASSERT_EQ(sleeps_.size(), 2u);
  EXPECT_EQ(sleeps_[0], std::chrono::milliseconds(200));
  EXPECT_EQ(sleeps_[1], std::chrono::milliseconds(400));
}

TEST_F(HttpBackendTest, GivesUpAfterBoundedRetries) {
  HttpBackend b = Client();
  service_->InjectFault(Fault::kUnavailable, 100);
  EXPECT_EQ(CodeOf([&] { b.Generate("x", 1, 8, 8); }), ErrorCode::kBackendUnavailable);
  EXPECT_EQ(service_->RequestCount("/generate"), 4);
}

TEST_F(HttpBackendTest, ServerErrorCarriesBody) {
  HttpBackend b = Client();
  service_->InjectFault(Fault::kServerError);
  try {
    b.Generate("x", 1, 8, 8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kServiceError);
    EXPECT_NE(std::string(e.what()).find("injected failure"), std::string::npos);
  }
  EXPECT_EQ(service_->RequestCount("/generate"), 1);
}

TEST_F(HttpBackendTest, ProtocolViolations) {
  HttpBackend b = Client();
  service_->InjectFault(Fault::kWrongSize);
  EXPECT_EQ(CodeOf([&] { b.Generate("x", 1, 8, 8); }), ErrorCode::kProtocolViolation);
  service_->InjectFault(Fault::kMalformedJson);
  EXPECT_EQ(CodeOf([&] { b.Generate("x", 1, 8, 8); }), ErrorCode::kProtocolViolation);
  service_->InjectFault(Fault::kEmptyCaption);
  EXPECT_EQ(CodeOf([&] { b.Caption(RgbImage(4, 4)); }), ErrorCode::kProtocolViolation);
}

TEST_F(HttpBackendTest, LocalRejectionsMakeNoRequest) {
  HttpBackend b = Client();
  EXPECT_EQ(CodeOf([&] { b.Generate("x", 1, 0, 8); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([&] { b.Generate("x", 1, 4096, 8); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([&] { b.Outpaint(RgbImage(8, 8), GrayImage(8, 9), "p", 1); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([&] { b.Caption(RgbImage(3000, 8)); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(service_->RequestCount("/generate"), 0);
  EXPECT_EQ(service_->RequestCount("/outpaint"), 0);
  EXPECT_EQ(service_->RequestCount("/caption"), 0);
}

TEST_F(HttpBackendTest, CaptionMatchesFixture) {
  HttpBackend b = Client();
  const auto req = wire::DecodeCaptionRequest(ReadFileBytes(
      std::filesystem::path(PANOWEAVE_FIXTURE_DIR) / "wire" / "caption_request.json"));
  const auto res = wire::DecodeCaptionResponse(ReadFileBytes(
      std::filesystem::path(PANOWEAVE_FIXTURE_DIR) / "wire" / "caption_response.json"));
  EXPECT_EQ(b.Caption(req.image), res.text);
}

TEST_F(HttpBackendTest, UnreachableServiceIsUnavailable) {
  const std::string url = service_->url();
  service_->Stop();
  HttpBackendOptions o;
  o.base_url = url;
  o.timeout = std::chrono::milliseconds(500);
  int sleeps = 0;
  HttpBackend b(o, [&](std::chrono::milliseconds) { ++sleeps; });
  EXPECT_EQ(CodeOf([&] { b.Health(); }), ErrorCode::kBackendUnavailable);
  EXPECT_EQ(sleeps, 3);
}

TEST(NormalizeWhitespaceTest, CollapsesAndTrims) {
  EXPECT_EQ(HttpBackend::NormalizeWhitespace("  a \n\t b  "), "a b");
  EXPECT_EQ(HttpBackend::NormalizeWhitespace(" \n "), "");
}

TEST(MeasureKnownDriftTest, SeparatesBandAndInterior) {
  RgbImage req(20, 1), reply(20, 1);
  GrayImage mask(20, 1);
  *mask.pixel(19, 0) = kMaskGenerate;
  reply = req;
  reply.pixel(17, 0)[0] = 10;  // 2 px from the generated column: band
  reply.pixel(2, 0)[1] = 5;    // far away: interior
  const DriftReport r = MeasureKnownDrift(req, mask, reply, KnownRegionTolerance{});
  EXPECT_EQ(r.max_band_drift, 10);
  EXPECT_EQ(r.max_interior_drift, 5);
  EXPECT_FALSE(r.violation);
}

}  // namespace
}  // namespace panoweave
