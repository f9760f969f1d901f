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

#ifndef PANOWEAVE_IMAGE_H_
#define PANOWEAVE_IMAGE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "panoweave/error.h"

namespace panoweave {

// Interleaved 8-bit image, row-major.
template <int kChannels>
class Image {
 public:
  static_assert(kChannels >= 1 && kChannels <= 4);
  static constexpr int channels = kChannels;

  Image() = default;
  Image(int width, int height, uint8_t fill = 0) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
      throw Error(ErrorCode::kInvalidArgument, "image dimensions must be positive");
    }
    data_.assign(static_cast<size_t>(width) * height * kChannels, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }
  size_t pixel_count() const { return static_cast<size_t>(width_) * height_; }

  uint8_t* pixel(int x, int y) {
    return data_.data() + (static_cast<size_t>(y) * width_ + x) * kChannels;
  }
  const uint8_t* pixel(int x, int y) const {
    return data_.data() + (static_cast<size_t>(y) * width_ + x) * kChannels;
  }
  uint8_t& at(int x, int y, int c = 0) { return pixel(x, y)[c]; }
  uint8_t at(int x, int y, int c = 0) const { return pixel(x, y)[c]; }

  std::span<uint8_t> bytes() { return data_; }
  std::span<const uint8_t> bytes() const { return data_; }
  int row_stride() const { return width_ * kChannels; }

  bool SameSize(int w, int h) const { return width_ == w && height_ == h; }
  template <int kOther>
  bool SameSize(const Image<kOther>& o) const {
    return SameSize(o.width(), o.height());
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<uint8_t> data_;
};

using RgbImage = Image<3>;
using GrayImage = Image<1>;

// Largest per-channel absolute difference; images must be the same size.
template <int kChannels>
int MaxAbsDiff(const Image<kChannels>& a, const Image<kChannels>& b) {
  if (!a.SameSize(b)) {
    throw Error(ErrorCode::kInvalidArgument, "image size mismatch");
  }
  int worst = 0;
  auto pa = a.bytes();
  auto pb = b.bytes();
  for (size_t i = 0; i < pa.size(); ++i) {
    const int d = pa[i] > pb[i] ? pa[i] - pb[i] : pb[i] - pa[i];
    if (d > worst) worst = d;
  }
  return worst;
}

}  // namespace panoweave

#endif  // PANOWEAVE_IMAGE_H_
