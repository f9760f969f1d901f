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

#ifndef PANOWEAVE_SPHERICAL_H_
#define PANOWEAVE_SPHERICAL_H_

// Directions on the unit sphere, the equirectangular pixel mapping, and the
// gnomonic (pinhole) projection between a zero-roll camera and the sphere.
//
// Conventions:
//   * heading is measured clockwise (rightward) from a fixed reference and
//     lives in [0, 360); elevation is positive upward, in [-90, 90].
//   * In the 3-vector frame x points right of heading 0, y points up and z
//     along heading 0 at the horizon.
//   * Equirectangular: x = heading / 360 * W, y = (90 - elevation) / 180 * H.
//   * View pixels use pixel-index coordinates: pixel i covers the continuous
//     span [i, i + 1) and is sampled at its centre, so the optical axis sits
//     at (W/2 - 0.5, H/2 - 0.5) and the frustum spans [-0.5, W - 0.5].

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <numbers>
#include <string>

#include "panoweave/error.h"

namespace panoweave {

inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

inline double NormalizeHeading(double heading_deg) {
  double h = std::fmod(heading_deg, 360.0);
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h = 0.0;  // fmod of tiny negatives can round up to 360
  return h;
}

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(const Vec3& a, const Vec3& b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend Vec3 operator-(const Vec3& a, const Vec3& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
  }
  friend Vec3 operator*(double s, const Vec3& a) {
    return {s * a.x, s * a.y, s * a.z};
  }
  double Dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 Cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double Norm() const { return std::sqrt(Dot(*this)); }
  Vec3 Normalized() const { return (1.0 / Norm()) * *this; }
};

class SphericalDirection {
 public:
  SphericalDirection() = default;

  // Heading is wrapped into [0, 360). Elevation outside [-90, 90] is an
  // error; use Rotate() for clamping semantics.
  SphericalDirection(double heading_deg, double elevation_deg)
      : heading_deg_(NormalizeHeading(heading_deg)),
        elevation_deg_(elevation_deg) {
    if (!(elevation_deg >= -90.0 && elevation_deg <= 90.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "elevation out of [-90, 90]: " + std::to_string(elevation_deg));
    }
  }

  double heading_deg() const { return heading_deg_; }
  double elevation_deg() const { return elevation_deg_; }

  Vec3 ToVector() const {
    const double h = heading_deg_ * kDegToRad;
    const double e = elevation_deg_ * kDegToRad;
    return {std::cos(e) * std::sin(h), std::sin(e), std::cos(e) * std::cos(h)};
  }

  static SphericalDirection FromVector(const Vec3& v) {
    const Vec3 n = v.Normalized();
    const double e =
        std::atan2(n.y, std::hypot(n.x, n.z)) * kRadToDeg;
    const double h = std::atan2(n.x, n.z) * kRadToDeg;
    return SphericalDirection(h, std::clamp(e, -90.0, 90.0));
  }

  friend bool operator==(const SphericalDirection&,
                         const SphericalDirection&) = default;

 private:
  double heading_deg_ = 0.0;
  double elevation_deg_ = 0.0;
};

// Great-circle distance in degrees.
inline double AngularDistanceDeg(const SphericalDirection& a,
                                 const SphericalDirection& b) {
  const Vec3 va = a.ToVector();
  const Vec3 vb = b.ToVector();
  return std::atan2(va.Cross(vb).Norm(), va.Dot(vb)) * kRadToDeg;
}

struct RotateResult {
  SphericalDirection direction;
  bool clamped = false;
};

inline RotateResult Rotate(const SphericalDirection& dir, double d_heading,
                           double d_elevation) {
  const double e = dir.elevation_deg() + d_elevation;
  const double clamped_e = std::clamp(e, -90.0, 90.0);
  return {SphericalDirection(dir.heading_deg() + d_heading, clamped_e),
          clamped_e != e};
}

// ---------------------------------------------------------------------------
// Equirectangular mapping.

struct EquirectPoint {
  double x = 0.0;
  double y = 0.0;
};

inline void CheckEquirectDims(int canvas_w, int canvas_h) {
  if (canvas_h <= 0 || canvas_w != 2 * canvas_h) {
    throw Error(ErrorCode::kInvalidArgument,
                "equirectangular canvas must be 2:1, got " +
                    std::to_string(canvas_w) + "x" + std::to_string(canvas_h));
  }
}

inline EquirectPoint DirToEquirectPx(const SphericalDirection& dir,
                                     int canvas_w, int canvas_h) {
  CheckEquirectDims(canvas_w, canvas_h);
  double x = dir.heading_deg() / 360.0 * canvas_w;
  if (x >= canvas_w) x = 0.0;
  return {x, (90.0 - dir.elevation_deg()) / 180.0 * canvas_h};
}

inline SphericalDirection EquirectPxToDir(double x, double y, int canvas_w,
                                          int canvas_h) {
  CheckEquirectDims(canvas_w, canvas_h);
  if (!(x >= 0.0 && x < canvas_w && y >= 0.0 && y <= canvas_h)) {
    throw Error(ErrorCode::kInvalidArgument,
                "equirectangular pixel out of range: (" + std::to_string(x) +
                    ", " + std::to_string(y) + ")");
  }
  return SphericalDirection(x / canvas_w * 360.0, 90.0 - y / canvas_h * 180.0);
}

// ---------------------------------------------------------------------------
// Perspective views.

inline constexpr double kDefaultHfovDeg = 60.0;
inline constexpr double kDefaultVfovDeg = 62.0;
inline constexpr int kDefaultViewPx = 512;

struct ViewSpec {
  SphericalDirection center;
  double hfov_deg = kDefaultHfovDeg;
  double vfov_deg = kDefaultVfovDeg;
  int width_px = kDefaultViewPx;
  int height_px = kDefaultViewPx;

  void Validate() const {
    if (!(hfov_deg > 0.0 && hfov_deg < 180.0 && vfov_deg > 0.0 &&
          vfov_deg < 180.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "field of view must lie strictly inside (0, 180)");
    }
    if (width_px <= 0 || height_px <= 0) {
      throw Error(ErrorCode::kInvalidArgument, "view dimensions must be positive");
    }
  }

  friend bool operator==(const ViewSpec&, const ViewSpec&) = default;
};

struct ViewPixel {
  double u = 0.0;
  double v = 0.0;
  bool in_frustum = false;
};

// Precomputed camera basis for bulk projection. Zero roll: `right` stays in
// the horizontal plane.
class CameraFrame {
 public:
  explicit CameraFrame(const ViewSpec& view) : view_(view) {
    view.Validate();
    const double h = view.center.heading_deg() * kDegToRad;
    const double e = view.center.elevation_deg() * kDegToRad;
    forward_ = {std::cos(e) * std::sin(h), std::sin(e), std::cos(e) * std::cos(h)};
    right_ = {std::cos(h), 0.0, -std::sin(h)};
    up_ = {-std::sin(e) * std::sin(h), std::cos(e), -std::sin(e) * std::cos(h)};
    tan_half_h_ = std::tan(0.5 * view.hfov_deg * kDegToRad);
    tan_half_v_ = std::tan(0.5 * view.vfov_deg * kDegToRad);
    half_w_ = 0.5 * view.width_px;
    half_h_ = 0.5 * view.height_px;
  }

  const ViewSpec& view() const { return view_; }

  // Unnormalized ray through pixel-index coordinates (u, v).
  Vec3 Ray(double u, double v) const {
    const double px = (u + 0.5 - half_w_) / half_w_ * tan_half_h_;
    const double py = -(v + 0.5 - half_h_) / half_h_ * tan_half_v_;
    return forward_ + px * right_ + py * up_;
  }

  ViewPixel Project(const Vec3& dir) const {
    const double z = dir.Dot(forward_);
    if (!(z > 0.0)) return {std::nan(""), std::nan(""), false};
    const double px = dir.Dot(right_) / z;
    const double py = dir.Dot(up_) / z;
    ViewPixel out;
    out.u = px / tan_half_h_ * half_w_ + half_w_ - 0.5;
    out.v = -py / tan_half_v_ * half_h_ + half_h_ - 0.5;
    out.in_frustum = out.u >= -0.5 && out.u <= view_.width_px - 0.5 &&
                     out.v >= -0.5 && out.v <= view_.height_px - 0.5;
    return out;
  }

  // Distance in view pixels from (u, v) to the nearest frustum edge.
  double EdgeDistance(double u, double v) const {
    return std::min({u + 0.5, view_.width_px - 0.5 - u, v + 0.5,
                     view_.height_px - 0.5 - v});
  }

  // Solid angle subtended by a pixel relative to the optical-axis pixel.
  double RelativePixelSolidAngle(double u, double v) const {
    const double px = (u + 0.5 - half_w_) / half_w_ * tan_half_h_;
    const double py = -(v + 0.5 - half_h_) / half_h_ * tan_half_v_;
    const double r2 = 1.0 + px * px + py * py;
    return 1.0 / (r2 * std::sqrt(r2));
  }

 private:
  ViewSpec view_;
  Vec3 forward_, right_, up_;
  double tan_half_h_ = 0.0, tan_half_v_ = 0.0;
  double half_w_ = 0.0, half_h_ = 0.0;
};

inline SphericalDirection ViewPxToDir(const ViewSpec& view, double u, double v) {
  return SphericalDirection::FromVector(CameraFrame(view).Ray(u, v));
}

inline ViewPixel DirToViewPx(const ViewSpec& view, const SphericalDirection& dir) {
  return CameraFrame(view).Project(dir.ToVector());
}

// ---------------------------------------------------------------------------
// The 12 x 3 discretization grid.

inline constexpr int kHeadingCount = 12;
inline constexpr int kElevationCount = 3;
inline constexpr int kViewCount = kHeadingCount * kElevationCount;
inline constexpr double kGridStepDeg = 30.0;

struct ViewIndex {
  int heading_index = 0;    // [0, 12)
  int elevation_index = 0;  // {-1, 0, +1}

  bool IsValid() const {
    return heading_index >= 0 && heading_index < kHeadingCount &&
           elevation_index >= -1 && elevation_index <= 1;
  }

  SphericalDirection Center() const {
    return SphericalDirection(heading_index * kGridStepDeg,
                              elevation_index * kGridStepDeg);
  }

  // Dense position in [0, 36): heading-major.
  int Ordinal() const {
    return heading_index * kElevationCount + (elevation_index + 1);
  }

  std::string Name() const {
    return std::to_string(heading_index) + "_" + std::to_string(elevation_index);
  }

  friend auto operator<=>(const ViewIndex&, const ViewIndex&) = default;
};

inline ViewIndex ViewIndexFromOrdinal(int ordinal) {
  return {ordinal / kElevationCount, ordinal % kElevationCount - 1};
}

inline std::array<ViewIndex, kViewCount> AllViewIndices() {
  std::array<ViewIndex, kViewCount> out;
  for (int i = 0; i < kViewCount; ++i) out[i] = ViewIndexFromOrdinal(i);
  return out;
}

// Field of view and resolution shared by every view of the grid.
struct ViewGrid {
  double hfov_deg = kDefaultHfovDeg;
  double vfov_deg = kDefaultVfovDeg;
  int width_px = kDefaultViewPx;
  int height_px = kDefaultViewPx;

  ViewSpec Spec(const SphericalDirection& center) const {
    return ViewSpec{center, hfov_deg, vfov_deg, width_px, height_px};
  }
  ViewSpec Spec(const ViewIndex& index) const { return Spec(index.Center()); }

  friend bool operator==(const ViewGrid&, const ViewGrid&) = default;
};

// Grid view whose centre is angularly nearest to `dir`. Ties go to the
// smaller heading index, then the smaller elevation index.
inline ViewIndex NearestGridView(const SphericalDirection& dir) {
  ViewIndex best;
  double best_dist = 1e300;
  for (const ViewIndex& idx : AllViewIndices()) {
    const double d = AngularDistanceDeg(dir, idx.Center());
    // Indices are visited in ascending order, so strict improvement keeps
    // the smaller index on ties.
    if (d < best_dist - 1e-12) {
      best = idx;
      best_dist = d;
    }
  }
  return best;
}

}  // namespace panoweave

#endif  // PANOWEAVE_SPHERICAL_H_
