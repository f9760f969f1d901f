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

#ifndef PANOWEAVE_PROCEDURAL_BACKEND_H_
#define PANOWEAVE_PROCEDURAL_BACKEND_H_

// Deterministic offline stand-in for a diffusion service. Images are smooth
// low-frequency colour fields keyed on (prompt, seed); outpainting copies
// known pixels exactly and fills the rest with the field plus a harmonic
// correction that meets the known pixels continuously at the mask boundary.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "panoweave/backend.h"
#include "panoweave/canvas.h"
#include "panoweave/hash.h"
#include "panoweave/image.h"

namespace panoweave {

namespace internal {

struct FieldWave {
  double fx, fy;  // cycles per image
  double amplitude;
  double phase;
};

struct FieldParams {
  std::array<double, 3> base;
  std::array<std::array<FieldWave, 4>, 3> waves;
};

inline FieldParams MakeFieldParams(const std::string& prompt, uint64_t seed) {
  std::mt19937_64 rng(DeriveSeed(seed, Fnv1a64(prompt)));
  FieldParams p;
  for (int c = 0; c < 3; ++c) {
    p.base[c] = 80.0 + 95.0 * UniformUnit(rng);
    for (FieldWave& wave : p.waves[c]) {
      wave.fx = 2.0 * UniformUnit(rng) - 1.0;
      wave.fy = 2.0 * UniformUnit(rng) - 1.0;
      wave.amplitude = 8.0 + 12.0 * UniformUnit(rng);
      wave.phase = 2.0 * std::numbers::pi * UniformUnit(rng);
    }
  }
  return p;
}

// Field value in 8-bit units at pixel (x, y), before rounding.
inline double FieldValue(const FieldParams& p, int c, int x, int y, int w, int h) {
  double v = p.base[c];
  const double nx = (x + 0.5) / w;
  const double ny = (y + 0.5) / h;
  for (const FieldWave& wave : p.waves[c]) {
    v += wave.amplitude *
         std::sin(2.0 * std::numbers::pi * (wave.fx * nx + wave.fy * ny) + wave.phase);
  }
  return v;
}

}  // namespace internal

inline RgbImage ProceduralGenerate(const std::string& prompt, uint64_t seed, int width,
                                   int height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "requested image size must be positive");
  }
  const internal::FieldParams params = internal::MakeFieldParams(prompt, seed);
  RgbImage img(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      uint8_t* p = img.pixel(x, y);
      for (int c = 0; c < 3; ++c) {
        p[c] = internal::ToByte(internal::FieldValue(params, c, x, y, width, height));
      }
    }
  }
  return img;
}

inline RgbImage ProceduralOutpaint(const RgbImage& image, const GrayImage& mask,
                                   const std::string& prompt, uint64_t seed) {
  if (!image.SameSize(mask)) {
    throw Error(ErrorCode::kInvalidArgument, "mask dimensions differ from image");
  }
  const int w = image.width();
  const int h = image.height();
  const size_t n = image.pixel_count();

  // Unknown pixels get a dense index into the linear system.
  std::vector<int> slot(n, -1);
  int unknowns = 0;
  for (size_t i = 0; i < n; ++i) {
    if (mask.bytes()[i] != kMaskKeep) slot[i] = unknowns++;
  }
  if (unknowns == 0) return image;

  const internal::FieldParams params = internal::MakeFieldParams(prompt, seed);
  auto field = [&](int c, int x, int y) {
    return internal::FieldValue(params, c, x, y, w, h);
  };

  // Discrete Laplace equation for the correction term on unknown pixels:
  // Dirichlet data (known - field) on known neighbours, zero-flux at the image
  // border. The small diagonal shift pins components with no known neighbour
  // to a zero correction.
  constexpr double kShift = 1e-9;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<size_t>(unknowns) * 5);
  Eigen::MatrixX3d rhs = Eigen::MatrixX3d::Zero(unknowns, 3);
  constexpr int kDx[4] = {1, -1, 0, 0};
  constexpr int kDy[4] = {0, 0, 1, -1};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int row = slot[static_cast<size_t>(y) * w + x];
      if (row < 0) continue;
      double degree = kShift;
      for (int k = 0; k < 4; ++k) {
        const int nx = x + kDx[k];
        const int ny = y + kDy[k];
        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
        degree += 1.0;
        const int col = slot[static_cast<size_t>(ny) * w + nx];
        if (col >= 0) {
          triplets.emplace_back(row, col, -1.0);
        } else {
          const uint8_t* known = image.pixel(nx, ny);
          for (int c = 0; c < 3; ++c) rhs(row, c) += known[c] - field(c, nx, ny);
        }
      }
      triplets.emplace_back(row, row, degree);
    }
  }

  Eigen::MatrixX3d correction = Eigen::MatrixX3d::Zero(unknowns, 3);
  if (rhs.cwiseAbs().maxCoeff() > 0.0) {
    Eigen::SparseMatrix<double> a(unknowns, unknowns);
    a.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorCode::kGenerationFailed, "harmonic fill factorization failed");
    }
    correction = solver.solve(rhs);
  }

  RgbImage out = image;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int row = slot[static_cast<size_t>(y) * w + x];
      if (row < 0) continue;
      uint8_t* p = out.pixel(x, y);
      for (int c = 0; c < 3; ++c) {
        p[c] = internal::ToByte(field(c, x, y) + correction(row, c));
      }
    }
  }
  return out;
}

// Short deterministic description derived from image content.
inline std::string ProceduralCaption(const RgbImage& image) {
  static constexpr const char* kRooms[] = {"bedroom", "kitchen", "living room",
                                           "hallway", "bathroom", "office"};
  static constexpr const char* kObjects[] = {"a bed and a dresser", "a wooden table",
                                             "a large window", "a sofa and a lamp",
                                             "a white sink", "a bookshelf"};
  const auto bytes = image.bytes();
  const uint64_t key = Fnv1a64(std::string_view(
      reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  return std::string("a ") + kRooms[key % 6] + " with " + kObjects[(key >> 8) % 6];
}

class ProceduralBackend : public GenerationBackend {
 public:
  static constexpr char kIdentity[] = "procedural-field/1";

  std::string Identity() const override { return kIdentity; }
  std::vector<Capability> Capabilities() const override {
    return {Capability::kGenerate, Capability::kOutpaint, Capability::kCaption};
  }
  RgbImage Generate(const std::string& prompt, uint64_t seed, int width,
                    int height) override {
    return ProceduralGenerate(prompt, seed, width, height);
  }
  RgbImage Outpaint(const RgbImage& image, const GrayImage& mask,
                    const std::string& prompt, uint64_t seed) override {
    return ProceduralOutpaint(image, mask, prompt, seed);
  }
  std::string Caption(const RgbImage& image) override { return ProceduralCaption(image); }
};

}  // namespace panoweave

#endif  // PANOWEAVE_PROCEDURAL_BACKEND_H_
