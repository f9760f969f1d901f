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

#include "panoweave/pipeline_config.h"

#include <gtest/gtest.h>

#include <cstdlib>

#include "test_util.h"

namespace panoweave {
namespace {

using testing::TempDir;

// Sets an environment variable for the lifetime of the object.
class ScopedEnv {
 public:
  ScopedEnv(const char* name, const std::string& value) : name_(name) {
    if (const char* old = std::getenv(name)) old_ = old;
    ::setenv(name, value.c_str(), 1);
  }
  ~ScopedEnv() {
    if (old_) {
      ::setenv(name_, old_->c_str(), 1);
    } else {
      ::unsetenv(name_);
    }
  }

 private:
  const char* name_;
  std::optional<std::string> old_;
};

TEST(PipelineConfigTest, DefaultsMatchEngineDefaults) {
  const PipelineConfig c;
  EXPECT_EQ(c.backend.kind, BackendKind::kProcedural);
  EXPECT_EQ(c.outpaint.ToJson(), OutpaintConfig{}.ToJson());
  EXPECT_EQ(c.outpaint.canvas_width_px(), 2048);
  EXPECT_EQ(c.outpaint.view_grid.width_px, 512);
  EXPECT_DOUBLE_EQ(c.outpaint.p_r, 0.5);
  EXPECT_EQ(c.workers, 1);
}

TEST(PipelineConfigTest, JsonRoundTrip) {
  PipelineConfig c;
  c.backend.kind = BackendKind::kHttp;
  c.backend.http.base_url = "http://gpu:9000";
  c.backend.http.retry.max_attempts = 6;
  c.backend.http.known_region.strict = true;
  c.outpaint.p_r = 0.4;
  c.outpaint.seed = 99;
  c.outpaint.view_grid.width_px = 256;
  c.augment.ratio = 0.7;
  c.augment.mode = "exact_count";
  c.augment.scans_n = 30;
  c.augment.variant_choice = "uniform_random";
  c.paths.captions = "caps.jsonl";
  c.workers = 3;
  const PipelineConfig back = PipelineConfigFromJson(c.ToJson());
  EXPECT_EQ(back.ToJson(), c.ToJson());
  EXPECT_EQ(back.Hash(), c.Hash());
}

TEST(PipelineConfigTest, PartialFileKeepsDefaults) {
  const PipelineConfig c =
      PipelineConfigFromJson(nlohmann::json::parse(R"({"outpaint":{"seed":4}})"));
  EXPECT_EQ(c.outpaint.seed, 4u);
  EXPECT_DOUBLE_EQ(c.outpaint.p_r, 0.5);
  EXPECT_FALSE(c.augment.scans_n.has_value());
}

TEST(PipelineConfigTest, UnknownKeysRejectedPerSection) {
  for (const char* text : {
           R"({"bogus":1})",
           R"({"backend":{"kind":"http","colour":"red"}})",
           R"({"outpaint":{"pr":0.5}})",
           R"({"augment":{"ratio_m":0.5}})",
           R"({"paths":{"output":"x"}})",
       }) {
    try {
      PipelineConfigFromJson(nlohmann::json::parse(text));
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kParse);
      EXPECT_NE(std::string(e.what()).find("unknown config key"), std::string::npos);
    }
  }
}

TEST(PipelineConfigTest, WrongTypesAndValuesRejected) {
  EXPECT_THROW(PipelineConfigFromJson(nlohmann::json::parse(R"({"outpaint":{"p_r":"half"}})")),
               Error);
  EXPECT_THROW(PipelineConfigFromJson(nlohmann::json::parse(R"({"backend":{"kind":"cloud"}})")),
               Error);
  EXPECT_THROW(PipelineConfigFromJson(nlohmann::json::parse(R"([1])")), Error);
}

TEST(PipelineConfigTest, HashIgnoresPathsAndExecutionButTracksContent) {
  PipelineConfig a;
  PipelineConfig b = a;
  b.paths.out_dir = "/elsewhere";
  b.paths.captions = "/other/caps.jsonl";
  b.workers = 8;
  b.backend.http.timeout = std::chrono::milliseconds(5);
  b.backend.http.retry.max_attempts = 9;
  EXPECT_EQ(a.Hash(), b.Hash());
  b.outpaint.seed = 1;
  EXPECT_NE(a.Hash(), b.Hash());
  PipelineConfig c = a;
  c.augment.ratio = 0.5;
  EXPECT_NE(a.Hash(), c.Hash());
  EXPECT_EQ(a.Hash().size(), 64u);
}

TEST(PipelineConfigTest, LoadFromFile) {
  TempDir tmp;
  WriteFileBytes(tmp / "c.json", R"({"workers":2,"augment":{"scans_n":10}})");
  const PipelineConfig c = LoadPipelineConfig(tmp / "c.json");
  EXPECT_EQ(c.workers, 2);
  EXPECT_EQ(c.augment.scans_n, 10);
  WriteFileBytes(tmp / "bad.json", "{");
  EXPECT_THROW(LoadPipelineConfig(tmp / "bad.json"), Error);
  EXPECT_THROW(LoadPipelineConfig(tmp / "missing.json"), Error);
}

TEST(PipelineConfigTest, ResolutionOrder) {
  TempDir tmp;
  WriteFileBytes(tmp / "env.json", R"({"workers":5})");
  WriteFileBytes(tmp / "explicit.json", R"({"workers":7})");
  {
    ::unsetenv(kConfigEnv);
    EXPECT_EQ(ResolvePipelineConfig("").workers, 1);
  }
  {
    ScopedEnv env(kConfigEnv, (tmp / "env.json").string());
    EXPECT_EQ(ResolvePipelineConfig("").workers, 5);
    EXPECT_EQ(ResolvePipelineConfig((tmp / "explicit.json").string()).workers, 7);
  }
  {
    ScopedEnv url(kBackendUrlEnv, "http://override:1");
    EXPECT_EQ(ResolvePipelineConfig((tmp / "explicit.json").string()).backend.http.base_url,
              "http://override:1");
  }
}

}  // namespace
}  // namespace panoweave
