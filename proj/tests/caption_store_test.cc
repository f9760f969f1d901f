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

#include "panoweave/caption_store.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "panoweave/mock_service.h"
#include "panoweave/http_backend.h"
#include "test_util.h"

namespace panoweave {
namespace {

using testing::CountingBackend;
using testing::TempDir;

std::string Line(const std::string& scan, const std::string& vp, int h, int e,
                  const std::string& text) {
  nlohmann::json j{{"scan_id", scan}, {"viewpoint_id", vp}, {"heading_index", h},
                   {"elevation_index", e}, {"text", text}};
  return j.dump();
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidArgument;
}

TEST(CaptionIngestTest, ParsesAndNormalizes) {
  std::istringstream in(Line("s1", "v1", 0, 0, "  a  kitchen\n") + "\n\n" +
                        Line("s1", "v1", 11, 1, "ceiling fan") + "\n");
  const CaptionStore store = IngestCaptions(in);
  ASSERT_EQ(store.size(), 2u);
  const CaptionRecord* r = store.Find({"s1", "v1", {0, 0}});
  ASSERT_NE(r, nullptr);
  EXPECT_EQ(r->text, "a kitchen");
  EXPECT_EQ(r->source, CaptionSource::kImported);
  EXPECT_EQ(store.duplicate_count(), 0u);
}

TEST(CaptionIngestTest, DuplicatesAreLastWins) {
  std::istringstream in(Line("s", "v", 3, -1, "first") + "\n" + Line("s", "v", 3, -1, "second") +
                        "\n" + Line("s", "v", 3, -1, "third") + "\n");
  const CaptionStore store = IngestCaptions(in);
  EXPECT_EQ(store.size(), 1u);
  EXPECT_EQ(store.duplicate_count(), 2u);
  EXPECT_EQ(store.Find({"s", "v", {3, -1}})->text, "third");
}

TEST(CaptionIngestTest, EmptyInputGivesEmptyStore) {
  std::istringstream in("");
  EXPECT_TRUE(IngestCaptions(in).empty());
}

TEST(CaptionIngestTest, ErrorsCarryLineNumbers) {
  const std::vector<std::string> bad = {
      "{not json",
      Line("s", "v", 12, 0, "x"),
      Line("s", "v", 0, 2, "x"),
      Line("s", "v", 0, 0, "   "),
      Line("", "v", 0, 0, "x"),
      R"({"scan_id":"s","viewpoint_id":"v","heading_index":0,"elevation_index":0})",
      R"({"scan_id":"s","viewpoint_id":"v","heading_index":"0","elevation_index":0,"text":"t"})",
      R"({"scan_id":"s","viewpoint_id":"v","heading_index":0,"elevation_index":0,"text":"t","source":"x"})",
  };
  for (const std::string& b : bad) {
    std::istringstream in(Line("s", "v", 0, 0, "ok") + "\n" + b + "\n");
    try {
      IngestCaptions(in, "caps.jsonl");
      ADD_FAILURE() << b;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kParse);
      EXPECT_NE(std::string(e.what()).find("caps.jsonl:2:"), std::string::npos) << e.what();
    }
  }
}

TEST(CaptionIngestTest, MissingFileIsIoError) {
  EXPECT_EQ(CodeOf([] { IngestCaptions(std::filesystem::path("/nonexistent/caps.jsonl")); }),
            ErrorCode::kIo);
}

TEST(CaptionStoreTest, RoundTripThroughFile) {
  TempDir tmp;
  CaptionStore store;
  testing::AddCaptions(store, testing::MakeCaptions("scanA", "vp1"));
  store.Upsert({"scanA", "vp2", {4, 1}, "stairs", CaptionSource::kService});
  WriteCaptions(store, tmp / "caps.jsonl");
  const CaptionStore back = IngestCaptions(tmp / "caps.jsonl");
  EXPECT_EQ(back.records(), store.records());
  EXPECT_TRUE(back.IsComplete({"scanA", "vp1"}));
  EXPECT_FALSE(back.IsComplete({"scanA", "vp2"}));
  EXPECT_EQ(back.Viewpoints().size(), 2u);
}

TEST(CaptionStoreTest, UpsertValidates) {
  CaptionStore store;
  EXPECT_EQ(CodeOf([&] { store.Upsert({"s", "v", {0, 0}, " ", CaptionSource::kImported}); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([&] { store.Upsert({"s", "v", {-1, 0}, "x", CaptionSource::kImported}); }),
            ErrorCode::kInvalidArgument);
}

// Oracle: the grid centre with the largest dot product against the query.
ViewIndex BruteNearest(const std::vector<ViewIndex>& have, const SphericalDirection& d) {
  ViewIndex best = have.front();
  double best_dot = -2;
  const Vec3 q = d.ToVector();
  for (const ViewIndex& idx : have) {
    const double dot = q.Dot(idx.Center().ToVector());
    if (dot > best_dot + 1e-12) {
      best_dot = dot;
      best = idx;
    }
  }
  return best;
}

TEST(NearestCaptionTest, MatchesBruteForceOnRandomDirections) {
  CaptionStore store;
  std::mt19937_64 rng(11);
  std::vector<ViewIndex> have;
  for (const ViewIndex& idx : AllViewIndices()) {
    if (rng() % 3 == 0) continue;  // sparse viewpoint
    have.push_back(idx);
    store.Upsert({"s", "v", idx, "view " + idx.Name(), CaptionSource::kImported});
  }
  std::uniform_real_distribution<double> hd(0, 360), ed(-90, 90);
  for (int i = 0; i < 2000; ++i) {
    const SphericalDirection d(hd(rng), ed(rng));
    EXPECT_EQ(NearestCaption(store, {"s", "v"}, d).view_index, BruteNearest(have, d));
  }
}

TEST(NearestCaptionTest, TieGoesToSmallerHeadingIndex) {
  CaptionStore store;
  testing::AddCaptions(store, testing::MakeCaptions("s", "v"));
  EXPECT_EQ(NearestCaption(store, {"s", "v"}, SphericalDirection(15, 0)).view_index,
            (ViewIndex{0, 0}));
  EXPECT_EQ(NearestCaption(store, {"s", "v"}, SphericalDirection(345, 0)).view_index,
            (ViewIndex{0, 0}));
  EXPECT_EQ(NearestCaption(store, {"s", "v"}, SphericalDirection(200, 44)).view_index,
            (ViewIndex{7, 1}));
}

TEST(NearestCaptionTest, UnknownViewpointIsNotFound) {
  CaptionStore store;
  EXPECT_EQ(CodeOf([&] { NearestCaption(store, {"s", "v"}, SphericalDirection(0, 0)); }),
            ErrorCode::kNotFound);
}

std::vector<std::pair<CaptionKey, RgbImage>> Batch(int n) {
  std::vector<std::pair<CaptionKey, RgbImage>> out;
  for (int i = 0; i < n; ++i) {
    out.emplace_back(CaptionKey{"s", "v", {i, 0}},
                     ProceduralGenerate("img " + std::to_string(i), i, 16, 16));
  }
  return out;
}

TEST(CaptionViewsTest, CaptionsBatchThroughMockServiceAndResumes) {
  TempDir tmp;
  MockGenerationService service(std::make_shared<ProceduralBackend>());
  service.Start();
  HttpBackendOptions o;
  o.base_url = service.url();
  HttpBackend backend(o, [](std::chrono::milliseconds) {});

  CaptionStore store;
  const auto images = Batch(3);
  const auto first = CaptionViews(images, backend, store, tmp / "c.jsonl", tmp / "c.ckpt");
  EXPECT_EQ(first.records.size(), 3u);
  EXPECT_TRUE(first.failures.empty());
  EXPECT_EQ(service.RequestCount("/caption"), 3);
  for (const auto& [key, img] : images) {
    const CaptionRecord* r = store.Find(key);
    ASSERT_NE(r, nullptr);
    EXPECT_EQ(r->text, ProceduralCaption(img));
    EXPECT_EQ(r->source, CaptionSource::kService);
  }
  EXPECT_EQ(IngestCaptions(tmp / "c.jsonl").records(), store.records());

  const auto second = CaptionViews(images, backend, store, tmp / "c.jsonl", tmp / "c.ckpt");
  EXPECT_EQ(second.skipped, 3u);
  EXPECT_EQ(service.RequestCount("/caption"), 3);
}

TEST(CaptionViewsTest, PartialFailureIsCollectedAndRetriedOnResume) {
  TempDir tmp;
  CaptionStore store;
  CountingBackend flaky(/*fail_from=*/2);
  const auto images = Batch(3);
  const auto r = CaptionViews(images, flaky, store, tmp / "c.jsonl", tmp / "c.ckpt");
  EXPECT_EQ(r.records.size(), 2u);
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(r.failures[0].first.view_index, (ViewIndex{2, 0}));

  CountingBackend healthy;
  const auto again = CaptionViews(images, healthy, store, tmp / "c.jsonl", tmp / "c.ckpt");
  EXPECT_EQ(again.skipped, 2u);
  EXPECT_EQ(again.records.size(), 1u);
  EXPECT_EQ(healthy.calls(), 1);
  EXPECT_EQ(store.size(), 3u);
}

TEST(CaptionViewsTest, EmptyBatchMakesNoCalls) {
  TempDir tmp;
  CaptionStore store;
  CountingBackend backend;
  const auto r = CaptionViews({}, backend, store, tmp / "c.jsonl", tmp / "c.ckpt");
  EXPECT_TRUE(r.records.empty());
  EXPECT_EQ(backend.calls(), 0);
  EXPECT_FALSE(std::filesystem::exists(tmp / "c.ckpt"));
}

TEST(CaptionViewsTest, UnreachableBackendAbortsBatch) {
  TempDir tmp;
  HttpBackendOptions o;
  {
    MockGenerationService service(std::make_shared<ProceduralBackend>());
    service.Start();
    o.base_url = service.url();
  }
  o.timeout = std::chrono::milliseconds(300);
  HttpBackend backend(o, [](std::chrono::milliseconds) {});
  CaptionStore store;
  EXPECT_EQ(CodeOf([&] { CaptionViews(Batch(2), backend, store, tmp / "c.jsonl", tmp / "c.ckpt"); }),
            ErrorCode::kBackendUnavailable);
  EXPECT_TRUE(store.empty());
}

}  // namespace
}  // namespace panoweave
