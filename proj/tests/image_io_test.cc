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

#include "panoweave/image_io.h"

#include <gtest/gtest.h>

#include <random>
#include <string>

#include "panoweave/image.h"
#include "test_util.h"

namespace panoweave {
namespace {

RgbImage Noise(int w, int h, uint64_t seed) {
  RgbImage img(w, h);
  std::mt19937_64 rng(seed);
  for (auto& b : img.bytes()) b = static_cast<uint8_t>(rng());
  return img;
}

TEST(PngTest, RgbRoundTripIsLossless) {
  const RgbImage img = Noise(37, 19, 1);
  EXPECT_EQ(DecodePng<3>(EncodePng(img)), img);
}

TEST(PngTest, GrayRoundTripIsLossless) {
  GrayImage g(16, 9);
  for (size_t i = 0; i < g.pixel_count(); ++i) g.bytes()[i] = static_cast<uint8_t>(i * 7);
  EXPECT_EQ(DecodePng<1>(EncodePng(g)), g);
}

TEST(PngTest, EncodingIsDeterministic) {
  const RgbImage img = Noise(64, 64, 2);
  EXPECT_EQ(EncodePng(img), EncodePng(img));
}

TEST(PngTest, RejectsGarbage) {
  EXPECT_THROW(DecodePng<3>("not a png at all"), Error);
  EXPECT_THROW(DecodePng<3>(""), Error);
}

TEST(PngTest, FileRoundTrip) {
  testing::TempDir dir;
  const RgbImage img = Noise(8, 8, 3);
  WritePng(dir / "sub/img.png", img);
  EXPECT_EQ(ReadPng<3>(dir / "sub/img.png"), img);
  EXPECT_THROW(ReadPng<3>(dir / "missing.png"), Error);
}

TEST(Base64Test, KnownVectors) {
  EXPECT_EQ(Base64Encode(""), "");
  EXPECT_EQ(Base64Encode("f"), "Zg==");
  EXPECT_EQ(Base64Encode("fo"), "Zm8=");
  EXPECT_EQ(Base64Encode("foo"), "Zm9v");
  EXPECT_EQ(Base64Encode("foobar"), "Zm9vYmFy");
  EXPECT_EQ(Base64Decode("Zg=="), "f");
  EXPECT_EQ(Base64Decode("Zm8="), "fo");
  EXPECT_EQ(Base64Decode("Zm9vYmFy"), "foobar");
}

TEST(Base64Test, RoundTripBinary) {
  std::mt19937_64 rng(4);
  for (int len = 0; len < 40; ++len) {
    std::string s(len, '\0');
    for (char& c : s) c = static_cast<char>(rng());
    EXPECT_EQ(Base64Decode(Base64Encode(s)), s) << len;
  }
}

TEST(Base64Test, RejectsMalformed) {
  EXPECT_THROW(Base64Decode("abc"), Error);
  EXPECT_THROW(Base64Decode("ab!d"), Error);
}

TEST(FileBytesTest, WriteIsAtomicReplace) {
  testing::TempDir dir;
  WriteFileBytes(dir / "a.txt", "one");
  WriteFileBytes(dir / "a.txt", "two");
  EXPECT_EQ(ReadFileBytes(dir / "a.txt"), "two");
  int files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir.path())) {
    (void)e;
    ++files;
  }
  EXPECT_EQ(files, 1);
}

}  // namespace
}  // namespace panoweave
