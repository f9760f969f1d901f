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

#include "panoweave/canvas.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "panoweave/procedural_backend.h"
#include "test_util.h"

namespace panoweave {
namespace {

// Smooth field continuous across the heading wrap.
double Field(int c, double h_deg, double e_deg) {
  const double h = h_deg * kDegToRad;
  const double e = e_deg * kDegToRad;
  return 128.0 + 50.0 * std::sin(h + c) * std::cos(e) + 40.0 * std::sin(e + 0.5 * c);
}

EquirectCanvas PaintField(int w, int h) {
  EquirectCanvas canvas(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto d = canvas.PixelDirection(x, y);
      uint8_t* p = canvas.mutable_pixels().pixel(x, y);
      for (int c = 0; c < 3; ++c) {
        p[c] = internal::ToByte(Field(c, d.heading_deg(), d.elevation_deg()));
      }
    }
  }
  std::fill(canvas.mutable_coverage().begin(), canvas.mutable_coverage().end(), 1.0f);
  return canvas;
}

ViewImage Smooth(int px, const std::string& prompt) {
  return ViewImage::FromPixels(ProceduralGenerate(prompt, 3, px, px));
}

TEST(EquirectCanvasTest, EmptyCanvasIsBlackAndUncovered) {
  const EquirectCanvas c(64, 32);
  for (uint8_t b : c.pixels().bytes()) EXPECT_EQ(b, 0);
  for (float v : c.coverage()) EXPECT_EQ(v, 0.0f);
  EXPECT_THROW(EquirectCanvas(64, 64), Error);
  EXPECT_THROW(EquirectCanvas(RgbImage(4, 2), std::vector<float>(8, 1.5f)), Error);
}

TEST(ExtractViewTest, EmptyCanvasGivesNothing) {
  const EquirectCanvas c(256, 128);
  const ViewImage v = ExtractView(c, ViewGrid{60, 60, 32, 32}.Spec(SphericalDirection(10, 20)));
  EXPECT_EQ(v.ValidCount(), 0u);
  for (uint8_t b : v.pixels.bytes()) EXPECT_EQ(b, 0);
}

TEST(ExtractViewTest, FullCanvasGivesEverything) {
  const EquirectCanvas c = PaintField(256, 128);
  for (double e : {-60.0, 0.0, 75.0}) {
    EXPECT_TRUE(ExtractView(c, ViewGrid{60, 60, 32, 32}.Spec(SphericalDirection(350, e))).AllValid());
  }
}

TEST(ExtractViewTest, MatchesAnalyticField) {
  const EquirectCanvas c = PaintField(2048, 1024);
  const ViewSpec spec{SphericalDirection(355, 10), 60, 60, 128, 128};
  const ViewImage v = ExtractView(c, spec);
  ASSERT_TRUE(v.AllValid());
  int worst = 0;
  for (int y = 0; y < 128; ++y) {
    for (int x = 0; x < 128; ++x) {
      const auto d = ViewPxToDir(spec, x, y);
      for (int ch = 0; ch < 3; ++ch) {
        const int want = static_cast<int>(std::lround(Field(ch, d.heading_deg(), d.elevation_deg())));
        worst = std::max(worst, std::abs(want - v.pixels.pixel(x, y)[ch]));
      }
    }
  }
  EXPECT_LE(worst, 2);
}

TEST(ExtractViewTest, ThresholdControlsValidity) {
  EquirectCanvas c = PaintField(256, 128);
  for (float& v : c.mutable_coverage()) v = 0.4f;
  const ViewSpec spec = ViewGrid{60, 60, 16, 16}.Spec(SphericalDirection(0, 0));
  EXPECT_EQ(ExtractView(c, spec, 0.5).ValidCount(), 0u);
  EXPECT_TRUE(ExtractView(c, spec, 0.4).AllValid());
  EXPECT_THROW(ExtractView(c, spec, 1.5), Error);
}

TEST(CompositeViewTest, RoundTripThroughEmptyCanvas) {
  const ViewSpec spec{SphericalDirection(40, 15), 60, 60, 128, 128};
  const ViewImage img = Smooth(128, "round trip");
  EquirectCanvas c(1024, 512);
  CompositeViewInPlace(c, spec, img);
  const ViewImage back = ExtractView(c, spec);
  size_t good = 0;
  for (int y = 0; y < 128; ++y) {
    for (int x = 0; x < 128; ++x) {
      if (!back.valid(x, y)) continue;
      bool ok = true;
      for (int ch = 0; ch < 3; ++ch) {
        ok = ok && std::abs(int(back.pixels.pixel(x, y)[ch]) - int(img.pixels.pixel(x, y)[ch])) <= 2;
      }
      good += ok;
    }
  }
  EXPECT_GE(good, static_cast<size_t>(0.99 * 128 * 128));
}

TEST(CompositeViewTest, DisjointViewLeavesFirstUntouched) {
  const ViewGrid g{60, 60, 64, 64};
  EquirectCanvas c(512, 256);
  CompositeViewInPlace(c, g.Spec(SphericalDirection(0, 0)), Smooth(64, "a"));
  const EquirectCanvas before = c;
  CompositeViewInPlace(c, g.Spec(SphericalDirection(180, 0)), Smooth(64, "b"));
  const CameraFrame first(g.Spec(SphericalDirection(0, 0)));
  for (int y = 0; y < c.height(); ++y) {
    for (int x = 0; x < c.width(); ++x) {
      if (before.coverage(x, y) == 0.0f) continue;
      for (int ch = 0; ch < 3; ++ch) {
        ASSERT_EQ(c.pixels().pixel(x, y)[ch], before.pixels().pixel(x, y)[ch]);
      }
    }
  }
}

TEST(CompositeViewTest, ZeroBlendIsHardOverwrite) {
  const ViewGrid g{60, 60, 64, 64};
  const ViewSpec second = g.Spec(SphericalDirection(30, 0));
  const ViewImage img = Smooth(64, "second");
  EquirectCanvas c(512, 256);
  CompositeViewInPlace(c, g.Spec(SphericalDirection(0, 0)), Smooth(64, "first"), 0.0);
  CompositeViewInPlace(c, second, img, 0.0);
  EquirectCanvas alone(512, 256);
  CompositeViewInPlace(alone, second, img, 0.0);
  for (size_t i = 0; i < alone.coverage().size(); ++i) {
    if (alone.coverage()[i] == 0.0f) continue;
    for (int ch = 0; ch < 3; ++ch) {
      ASSERT_LE(std::abs(int(c.pixels().bytes()[i * 3 + ch]) - int(alone.pixels().bytes()[i * 3 + ch])), 2);
    }
  }
}

TEST(CompositeViewTest, MonotoneCoverageAndLocality) {
  const ViewGrid g{60, 60, 48, 48};
  EquirectCanvas c(384, 192);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> h(0, 360), e(-50, 50);
  for (int step = 0; step < 6; ++step) {
    const ViewSpec spec = g.Spec(SphericalDirection(h(rng), e(rng)));
    const EquirectCanvas before = c;
    CompositeViewInPlace(c, spec, Smooth(48, std::to_string(step)), 6.0);
    const CameraFrame frame(spec);
    for (int y = 0; y < c.height(); ++y) {
      for (int x = 0; x < c.width(); ++x) {
        ASSERT_GE(c.coverage(x, y), before.coverage(x, y));
        if (frame.Project(c.PixelDirection(x, y).ToVector()).in_frustum) continue;
        ASSERT_EQ(c.coverage(x, y), before.coverage(x, y));
        for (int ch = 0; ch < 3; ++ch) {
          ASSERT_EQ(c.pixels().pixel(x, y)[ch], before.pixels().pixel(x, y)[ch]);
        }
      }
    }
  }
}

TEST(CompositeViewTest, RejectsPartialOrMismatchedImage) {
  EquirectCanvas c(128, 64);
  const ViewSpec spec = ViewGrid{60, 60, 16, 16}.Spec(SphericalDirection());
  ViewImage partial = Smooth(16, "x");
  partial.validity[5] = 0;
  EXPECT_THROW(CompositeViewInPlace(c, spec, partial), Error);
  EXPECT_THROW(CompositeViewInPlace(c, spec, Smooth(17, "x")), Error);
  EXPECT_THROW(CompositeViewInPlace(c, spec, Smooth(16, "x"), -1.0), Error);
}

TEST(CoverageFractionTest, Trivial) {
  EquirectCanvas c(256, 128);
  EXPECT_EQ(CoverageFraction(c, -90, 90), 0.0);
  EXPECT_EQ(CoverageFraction(c, -10, 10), 0.0);
  std::fill(c.mutable_coverage().begin(), c.mutable_coverage().end(), 1.0f);
  EXPECT_DOUBLE_EQ(CoverageFraction(c, -90, 90), 1.0);
  EXPECT_THROW(CoverageFraction(c, 10, 10), Error);
  EXPECT_THROW(CoverageFraction(c, -91, 10), Error);
}

TEST(CoverageFractionTest, SixtyDegreeBandIsSinSixty) {
  EquirectCanvas c(2048, 1024);
  for (int y = 0; y < c.height(); ++y) {
    const double e = 90.0 - (y + 0.5) / c.height() * 180.0;
    if (std::abs(e) > 60.0) continue;
    for (int x = 0; x < c.width(); ++x) c.mutable_coverage()[y * c.width() + x] = 1.0f;
  }
  // Integral of cos over [-60, 60] divided by the integral over [-90, 90].
  const double oracle = (2 * std::sin(std::numbers::pi / 3)) / 2.0;
  EXPECT_NEAR(CoverageFraction(c, -90, 90), oracle, 0.002);
  EXPECT_DOUBLE_EQ(CoverageFraction(c, -60, 60), 1.0);
}

TEST(CoverageFractionTest, ThirtySixGridViewsFillTheBand) {
  const ViewGrid g{60, kDefaultVfovDeg, 96, 96};
  EquirectCanvas c(512, 256);
  for (const ViewIndex& idx : AllViewIndices()) {
    CompositeViewInPlace(c, g.Spec(idx), Smooth(96, idx.Name()), 4.0);
  }
  EXPECT_DOUBLE_EQ(CoverageFraction(c, -60, 60), 1.0);
  const double whole = CoverageFraction(c, -90, 90);
  EXPECT_GE(whole, 0.85);
  EXPECT_LE(whole, 0.88);
}

TEST(SeamEnergyTest, EmptyCanvasHasNoSignal) {
  EXPECT_FALSE(SeamEnergy(EquirectCanvas(64, 32)).has_value());
}

TEST(SeamEnergyTest, ContinuousFieldIsSmooth) {
  const auto s = SeamEnergy(PaintField(1024, 512));
  ASSERT_TRUE(s.has_value());
  EXPECT_LT(*s, 0.01);
}

TEST(SeamEnergyTest, BlackWhiteHalves) {
  EquirectCanvas c(64, 32);
  for (int y = 0; y < 32; ++y) {
    for (int x = 32; x < 64; ++x) {
      uint8_t* p = c.mutable_pixels().pixel(x, y);
      p[0] = p[1] = p[2] = 255;
    }
  }
  std::fill(c.mutable_coverage().begin(), c.mutable_coverage().end(), 1.0f);
  // Oracle: column 0 is black, column W-1 is white, every row.
  double sum = 0;
  for (int y = 0; y < 32; ++y) {
    double row = 0;
    for (int ch = 0; ch < 3; ++ch) {
      row += std::abs(c.pixels().pixel(0, y)[ch] - c.pixels().pixel(63, y)[ch]) / 255.0;
    }
    sum += row / 3;
  }
  EXPECT_DOUBLE_EQ(*SeamEnergy(c), sum / 32);
  EXPECT_DOUBLE_EQ(*SeamEnergy(c), 1.0);
}

TEST(DistanceToSeedsTest, MatchesBruteForce) {
  std::mt19937_64 rng(12);
  const int w = 40, h = 17;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<uint8_t> seeds(w * h, 0);
    const int n = 1 + trial % 5;
    for (int k = 0; k < n; ++k) seeds[rng() % seeds.size()] = 1;
    for (bool wrap : {false, true}) {
      const auto d = internal::DistanceToSeeds(seeds, w, h, 1e9, wrap);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          double best = std::numeric_limits<double>::infinity();
          for (int sy = 0; sy < h; ++sy) {
            for (int sx = 0; sx < w; ++sx) {
              if (!seeds[sy * w + sx]) continue;
              double dx = std::abs(sx - x);
              if (wrap) dx = std::min(dx, w - dx);
              best = std::min(best, std::hypot(dx, double(sy - y)));
            }
          }
          ASSERT_NEAR(d[y * w + x], best, 1e-9) << x << "," << y << " wrap " << wrap;
        }
      }
    }
  }
}

TEST(CanvasPersistenceTest, SaveLoadRoundTrip) {
  testing::TempDir dir;
  EquirectCanvas c(128, 64);
  CompositeViewInPlace(c, ViewGrid{60, 60, 32, 32}.Spec(SphericalDirection(100, 0)), Smooth(32, "p"));
  SaveCanvas(c, dir / "pano");
  EXPECT_TRUE(std::filesystem::exists(dir / "pano.pano.png"));
  EXPECT_TRUE(std::filesystem::exists(dir / "pano.cov.png"));
  const EquirectCanvas back = LoadCanvas(dir / "pano");
  EXPECT_EQ(back.pixels(), c.pixels());
  for (size_t i = 0; i < c.coverage().size(); ++i) {
    ASSERT_NEAR(back.coverage()[i], c.coverage()[i], 0.5 / 255 + 1e-6);
  }
  std::filesystem::remove(dir / "pano.cov.png");
  EXPECT_THROW(LoadCanvas(dir / "pano"), Error);
}

}  // namespace
}  // namespace panoweave
