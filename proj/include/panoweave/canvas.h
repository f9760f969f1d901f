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

#ifndef PANOWEAVE_CANVAS_H_
#define PANOWEAVE_CANVAS_H_

// The equirectangular panorama under construction: RGB pixels plus a
// per-pixel coverage value in [0, 1]. Views are pulled out of it with
// coverage-weighted bilinear sampling and pushed back with an
// inverse-mapping, mask-aware feathered composite.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "panoweave/error.h"
#include "panoweave/image.h"
#include "panoweave/image_io.h"
#include "panoweave/spherical.h"

namespace panoweave {

// Coverage at or above this counts as fully written.
inline constexpr float kFullyCovered = 0.999f;
inline constexpr double kDefaultCoverageThreshold = 0.5;
inline constexpr double kDefaultBlendWidthPx = 32.0;
inline constexpr int kDefaultCanvasHeight = 1024;

struct ViewImage {
  RgbImage pixels;
  std::vector<uint8_t> validity;  // one flag per pixel, row-major

  ViewImage() = default;
  ViewImage(int width, int height)
      : pixels(width, height), validity(pixels.pixel_count(), 0) {}

  // A fully valid image wrapping generated pixels.
  static ViewImage FromPixels(RgbImage img) {
    ViewImage out;
    out.validity.assign(img.pixel_count(), 1);
    out.pixels = std::move(img);
    return out;
  }

  int width() const { return pixels.width(); }
  int height() const { return pixels.height(); }
  bool valid(int x, int y) const {
    return validity[static_cast<size_t>(y) * width() + x] != 0;
  }
  size_t ValidCount() const {
    return static_cast<size_t>(std::count(validity.begin(), validity.end(), 1));
  }
  bool AllValid() const { return ValidCount() == validity.size(); }
  double ValidFraction() const {
    return validity.empty() ? 0.0
                            : static_cast<double>(ValidCount()) / validity.size();
  }

  // 255 where content must be generated, 0 where it is known.
  GrayImage GenerateMask() const {
    GrayImage mask(width(), height());
    auto out = mask.bytes();
    for (size_t i = 0; i < validity.size(); ++i) out[i] = validity[i] ? 0 : 255;
    return mask;
  }

  friend bool operator==(const ViewImage&, const ViewImage&) = default;
};

class EquirectCanvas {
 public:
  EquirectCanvas() = default;

  // An empty (all-sentinel, zero-coverage) canvas.
  EquirectCanvas(int width, int height) : pixels_(width, height, 0) {
    CheckEquirectDims(width, height);
    coverage_.assign(pixels_.pixel_count(), 0.0f);
  }

  EquirectCanvas(RgbImage pixels, std::vector<float> coverage)
      : pixels_(std::move(pixels)), coverage_(std::move(coverage)) {
    CheckEquirectDims(pixels_.width(), pixels_.height());
    if (coverage_.size() != pixels_.pixel_count()) {
      throw Error(ErrorCode::kInvalidArgument, "coverage size mismatch");
    }
    for (float c : coverage_) {
      if (!(c >= 0.0f && c <= 1.0f)) {
        throw Error(ErrorCode::kInvalidArgument, "coverage outside [0, 1]");
      }
    }
  }

  int width() const { return pixels_.width(); }
  int height() const { return pixels_.height(); }
  const RgbImage& pixels() const { return pixels_; }
  RgbImage& mutable_pixels() { return pixels_; }
  const std::vector<float>& coverage() const { return coverage_; }
  std::vector<float>& mutable_coverage() { return coverage_; }

  float coverage(int x, int y) const {
    return coverage_[static_cast<size_t>(y) * width() + x];
  }

  // Direction through the centre of pixel (x, y).
  SphericalDirection PixelDirection(int x, int y) const {
    return EquirectPxToDir(x + 0.5, y + 0.5, width(), height());
  }

  friend bool operator==(const EquirectCanvas&, const EquirectCanvas&) = default;

 private:
  RgbImage pixels_;
  std::vector<float> coverage_;
};

namespace internal {

// Per-row / per-column trig for pixel-centre directions.
struct EquirectTables {
  std::vector<double> sin_h, cos_h, sin_e, cos_e;

  EquirectTables(int w, int h) : sin_h(w), cos_h(w), sin_e(h), cos_e(h) {
    for (int x = 0; x < w; ++x) {
      const double a = (x + 0.5) / w * 360.0 * kDegToRad;
      sin_h[x] = std::sin(a);
      cos_h[x] = std::cos(a);
    }
    for (int y = 0; y < h; ++y) {
      const double a = (90.0 - (y + 0.5) / h * 180.0) * kDegToRad;
      sin_e[y] = std::sin(a);
      cos_e[y] = std::cos(a);
    }
  }

  Vec3 Direction(int x, int y) const {
    return {cos_e[y] * sin_h[x], sin_e[y], cos_e[y] * cos_h[x]};
  }
};

inline uint8_t ToByte(double v) {
  return static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

struct CoverageSample {
  double rgb[3] = {0.0, 0.0, 0.0};
  double coverage = 0.0;
};

// Bilinear sample at continuous equirect coordinates, colours weighted by
// coverage so unwritten sentinel pixels never bleed into known content.
inline CoverageSample SampleCanvas(const EquirectCanvas& canvas, double x, double y) {
  const int w = canvas.width();
  const int h = canvas.height();
  const double fx = x - 0.5;
  const double fy = std::clamp(y - 0.5, 0.0, static_cast<double>(h - 1));
  const double x0f = std::floor(fx);
  const double y0f = std::floor(fy);
  const double tx = fx - x0f;
  const double ty = fy - y0f;
  int x0 = static_cast<int>(x0f) % w;
  if (x0 < 0) x0 += w;
  const int x1 = (x0 + 1) % w;
  const int y0 = static_cast<int>(y0f);
  const int y1 = std::min(y0 + 1, h - 1);

  const int xs[4] = {x0, x1, x0, x1};
  const int ys[4] = {y0, y0, y1, y1};
  const double ws[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};

  CoverageSample s;
  for (int k = 0; k < 4; ++k) {
    const double wc = ws[k] * canvas.coverage(xs[k], ys[k]);
    if (wc <= 0.0) continue;
    const uint8_t* p = canvas.pixels().pixel(xs[k], ys[k]);
    for (int c = 0; c < 3; ++c) s.rgb[c] += wc * p[c];
    s.coverage += wc;
  }
  if (s.coverage > 0.0) {
    for (double& c : s.rgb) c /= s.coverage;
  }
  return s;
}

// Bilinear sample of a view image with edge clamping.
inline void SampleView(const RgbImage& img, double u, double v, double rgb[3]) {
  const double fu = std::clamp(u, 0.0, static_cast<double>(img.width() - 1));
  const double fv = std::clamp(v, 0.0, static_cast<double>(img.height() - 1));
  const int u0 = static_cast<int>(fu);
  const int v0 = static_cast<int>(fv);
  const int u1 = std::min(u0 + 1, img.width() - 1);
  const int v1 = std::min(v0 + 1, img.height() - 1);
  const double tu = fu - u0;
  const double tv = fv - v0;
  const uint8_t* p00 = img.pixel(u0, v0);
  const uint8_t* p10 = img.pixel(u1, v0);
  const uint8_t* p01 = img.pixel(u0, v1);
  const uint8_t* p11 = img.pixel(u1, v1);
  for (int c = 0; c < 3; ++c) {
    rgb[c] = (1 - tu) * (1 - tv) * p00[c] + tu * (1 - tv) * p10[c] +
             (1 - tu) * tv * p01[c] + tu * tv * p11[c];
  }
}

// 1-D squared Euclidean distance transform (Felzenszwalb & Huttenlocher).
// Infinite entries of `f` contribute no parabola.
inline void DistanceTransform1d(const std::vector<double>& f, std::vector<double>& d,
                                std::vector<int>& v, std::vector<double>& z) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(f.size());
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    double s = 0.0;
    while (k >= 0) {
      s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) /
          (2.0 * q - 2.0 * v[k]);
      if (s > z[k]) break;
      --k;
    }
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
    } else {
      ++k;
      v[k] = q;
      z[k] = s;
    }
    z[k + 1] = kInf;
  }
  if (k < 0) {
    std::fill(d.begin(), d.end(), kInf);
    return;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double diff = q - v[k];
    d[q] = diff * diff + f[v[k]];
  }
}

// Euclidean distance (in pixels) from every pixel to the nearest seed,
// optionally wrapping horizontally. With wrap, distances beyond `cap` may be
// overestimated but never fall below cap.
inline std::vector<double> DistanceToSeeds(const std::vector<uint8_t>& seeds, int w,
                                           int h, double cap, bool wrap) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const int pad = wrap ? std::min(w, static_cast<int>(std::ceil(cap)) + 2) : 0;
  std::vector<double> cols(static_cast<size_t>(w) * h);
  {
    std::vector<double> f(h), d(h), z(h + 1);
    std::vector<int> v(h);
    for (int x = 0; x < w; ++x) {
      for (int y = 0; y < h; ++y) f[y] = seeds[static_cast<size_t>(y) * w + x] ? 0.0 : kInf;
      DistanceTransform1d(f, d, v, z);
      for (int y = 0; y < h; ++y) cols[static_cast<size_t>(y) * w + x] = d[y];
    }
  }
  std::vector<double> out(static_cast<size_t>(w) * h);
  const int n = w + 2 * pad;
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  for (int y = 0; y < h; ++y) {
    for (int i = 0; i < n; ++i) {
      int x = (i - pad) % w;
      if (x < 0) x += w;
      f[i] = cols[static_cast<size_t>(y) * w + x];
    }
    DistanceTransform1d(f, d, v, z);
    for (int x = 0; x < w; ++x) out[static_cast<size_t>(y) * w + x] = std::sqrt(d[x + pad]);
  }
  return out;
}

}  // namespace internal

inline ViewImage ExtractView(const EquirectCanvas& canvas, const ViewSpec& view,
                             double coverage_threshold = kDefaultCoverageThreshold) {
  if (!(coverage_threshold >= 0.0 && coverage_threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "coverage threshold outside [0, 1]");
  }
  const CameraFrame frame(view);
  const int w = canvas.width();
  const int h = canvas.height();
  ViewImage out(view.width_px, view.height_px);
  for (int v = 0; v < view.height_px; ++v) {
    for (int u = 0; u < view.width_px; ++u) {
      const Vec3 ray = frame.Ray(u, v);
      double heading = std::atan2(ray.x, ray.z) * kRadToDeg;
      if (heading < 0) heading += 360.0;
      const double elev = std::atan2(ray.y, std::hypot(ray.x, ray.z)) * kRadToDeg;
      const auto s = internal::SampleCanvas(canvas, heading / 360.0 * w,
                                            (90.0 - elev) / 180.0 * h);
      if (s.coverage > 0.0 && s.coverage >= coverage_threshold) {
        uint8_t* p = out.pixels.pixel(u, v);
        for (int c = 0; c < 3; ++c) p[c] = internal::ToByte(s.rgb[c]);
        out.validity[static_cast<size_t>(v) * view.width_px + u] = 1;
      }
    }
  }
  return out;
}

// Composites a fully generated view into `canvas`.
//
// Canvas pixels whose centre ray falls inside the view frustum sample the
// view bilinearly. Pixels never covered before take the new content outright.
// Previously covered pixels keep their content unless they lie within
// `blend_width_px` canvas pixels of the region this view newly fills; there
// the new content fades in linearly, further attenuated within
// `blend_width_px` view pixels of the frustum edge. blend_width_px = 0 is a
// hard overwrite of the whole frustum.
inline void CompositeViewInPlace(EquirectCanvas& canvas, const ViewSpec& view,
                                 const ViewImage& img,
                                 double blend_width_px = kDefaultBlendWidthPx) {
  if (!img.pixels.SameSize(view.width_px, view.height_px)) {
    throw Error(ErrorCode::kInvalidArgument, "view image does not match view spec");
  }
  if (!img.AllValid()) {
    throw Error(ErrorCode::kInvalidArgument,
                "only fully generated view images can be composited");
  }
  if (!(blend_width_px >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "blend width must be non-negative");
  }
  const CameraFrame frame(view);
  const int w = canvas.width();
  const int h = canvas.height();
  const internal::EquirectTables tables(w, h);

  struct Hit {
    size_t index;
    double u, v;
  };
  std::vector<Hit> hits;
  std::vector<uint8_t> newly_filled(static_cast<size_t>(w) * h, 0);
  bool any_new = false;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const ViewPixel p = frame.Project(tables.Direction(x, y));
      if (!p.in_frustum) continue;
      const size_t i = static_cast<size_t>(y) * w + x;
      hits.push_back({i, p.u, p.v});
      if (canvas.coverage()[i] < kFullyCovered) {
        newly_filled[i] = 1;
        any_new = true;
      }
    }
  }

  std::vector<double> dist;
  if (blend_width_px > 0.0 && any_new) {
    dist = internal::DistanceToSeeds(newly_filled, w, h, blend_width_px, /*wrap=*/true);
  }

  auto& coverage = canvas.mutable_coverage();
  auto pixels = canvas.mutable_pixels().bytes();
  for (const Hit& hit : hits) {
    const double old_cov = coverage[hit.index];
    double mix = 1.0;  // weight of new content over the old colour
    if (old_cov > 0.0) {
      double fade = 1.0;
      if (blend_width_px > 0.0) {
        const double edge =
            std::clamp(frame.EdgeDistance(hit.u, hit.v) / blend_width_px, 0.0, 1.0);
        const double overlap =
            dist.empty() ? 1.0 : std::clamp(dist[hit.index] / blend_width_px, 0.0, 1.0);
        fade = edge * (1.0 - overlap);
      }
      mix = fade + (1.0 - fade) * (1.0 - old_cov);
      if (mix <= 0.0) continue;
    }
    double rgb[3];
    internal::SampleView(img.pixels, hit.u, hit.v, rgb);
    uint8_t* p = pixels.data() + hit.index * 3;
    for (int c = 0; c < 3; ++c) {
      p[c] = internal::ToByte((1.0 - mix) * p[c] + mix * rgb[c]);
    }
    coverage[hit.index] = static_cast<float>(std::max(old_cov, mix));
  }
}

inline EquirectCanvas CompositeView(EquirectCanvas canvas, const ViewSpec& view,
                                    const ViewImage& img,
                                    double blend_width_px = kDefaultBlendWidthPx) {
  CompositeViewInPlace(canvas, view, img, blend_width_px);
  return canvas;
}

// Solid-angle weighted fraction of the elevation band [lo, hi] that is
// fully covered. Rows are assigned to the band by their centre elevation.
inline double CoverageFraction(const EquirectCanvas& canvas, double lo_deg,
                               double hi_deg) {
  if (!(lo_deg < hi_deg && lo_deg >= -90.0 && hi_deg <= 90.0)) {
    throw Error(ErrorCode::kInvalidArgument, "elevation band must satisfy -90 <= lo < hi <= 90");
  }
  const int w = canvas.width();
  const int h = canvas.height();
  double covered = 0.0;
  double total = 0.0;
  for (int y = 0; y < h; ++y) {
    const double elev = 90.0 - (y + 0.5) / h * 180.0;
    if (elev < lo_deg || elev > hi_deg) continue;
    const double weight = std::cos(elev * kDegToRad);
    int count = 0;
    for (int x = 0; x < w; ++x) count += canvas.coverage(x, y) >= kFullyCovered;
    covered += weight * count;
    total += weight * w;
  }
  return total > 0.0 ? covered / total : 0.0;
}

// Mean absolute colour step across the wraparound column (x = W-1 to x = 0)
// over rows covered at both ends, normalized to [0, 1]. Empty when no row
// qualifies.
inline std::optional<double> SeamEnergy(const EquirectCanvas& canvas) {
  const int w = canvas.width();
  double sum = 0.0;
  int rows = 0;
  for (int y = 0; y < canvas.height(); ++y) {
    if (canvas.coverage(0, y) < kFullyCovered || canvas.coverage(w - 1, y) < kFullyCovered) {
      continue;
    }
    const uint8_t* a = canvas.pixels().pixel(0, y);
    const uint8_t* b = canvas.pixels().pixel(w - 1, y);
    double row = 0.0;
    for (int c = 0; c < 3; ++c) row += std::abs(int(a[c]) - int(b[c]));
    sum += row / (3.0 * 255.0);
    ++rows;
  }
  if (rows == 0) return std::nullopt;
  return sum / rows;
}

// ---------------------------------------------------------------------------
// Persistence: `<base>.pano.png` (RGB) + `<base>.cov.png` (8-bit coverage).

inline constexpr char kPanoSuffix[] = ".pano.png";
inline constexpr char kCoverageSuffix[] = ".cov.png";

inline std::filesystem::path WithSuffix(const std::filesystem::path& base,
                                        const char* suffix) {
  std::filesystem::path p = base;
  p += suffix;
  return p;
}

inline GrayImage CoverageImage(const EquirectCanvas& canvas) {
  GrayImage cov(canvas.width(), canvas.height());
  auto out = cov.bytes();
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<uint8_t>(std::lround(canvas.coverage()[i] * 255.0f));
  }
  return cov;
}

inline void SaveCanvas(const EquirectCanvas& canvas, const std::filesystem::path& base) {
  WritePng(WithSuffix(base, kPanoSuffix), canvas.pixels());
  WritePng(WithSuffix(base, kCoverageSuffix), CoverageImage(canvas));
}

inline EquirectCanvas LoadCanvas(const std::filesystem::path& base) {
  RgbImage rgb = ReadPng<3>(WithSuffix(base, kPanoSuffix));
  GrayImage cov = ReadPng<1>(WithSuffix(base, kCoverageSuffix));
  if (!rgb.SameSize(cov)) {
    throw Error(ErrorCode::kParse, "panorama and coverage images differ in size");
  }
  std::vector<float> coverage(cov.pixel_count());
  auto in = cov.bytes();
  for (size_t i = 0; i < coverage.size(); ++i) coverage[i] = in[i] / 255.0f;
  return EquirectCanvas(std::move(rgb), std::move(coverage));
}

}  // namespace panoweave

#endif  // PANOWEAVE_CANVAS_H_
