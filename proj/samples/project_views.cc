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

// Projects an equirectangular image into perspective views and back.
//
//   project_views <panorama.png> <heading> <elevation> [fov] [out.png]
//
// Without arguments, builds a synthetic latitude/longitude grid panorama.

#include <cstdlib>
#include <iostream>

#include "panoweave/canvas.h"
#include "panoweave/image_io.h"

int main(int argc, char** argv) {
  using namespace panoweave;
  EquirectCanvas canvas(1024, 512);
  if (argc > 1) {
    const RgbImage img = ReadPng<3>(argv[1]);
    if (img.width() != 2 * img.height()) {
      std::cerr << "panorama must be 2:1\n";
      return 1;
    }
    canvas = EquirectCanvas(img.width(), img.height());
    canvas.mutable_pixels() = img;
    std::fill(canvas.mutable_coverage().begin(), canvas.mutable_coverage().end(), 1.0f);
  } else {
    for (int y = 0; y < canvas.height(); ++y) {
      for (int x = 0; x < canvas.width(); ++x) {
        const SphericalDirection d = canvas.PixelDirection(x, y);
        const bool line = std::fmod(d.heading_deg(), 30.0) < 1.0 ||
                          std::fmod(d.elevation_deg() + 90.0, 30.0) < 1.0;
        uint8_t* p = canvas.mutable_pixels().pixel(x, y);
        p[0] = line ? 255 : static_cast<uint8_t>(d.heading_deg() / 360.0 * 200);
        p[1] = line ? 255 : static_cast<uint8_t>((d.elevation_deg() + 90.0) / 180.0 * 200);
        p[2] = line ? 255 : 60;
      }
    }
    std::fill(canvas.mutable_coverage().begin(), canvas.mutable_coverage().end(), 1.0f);
  }

  ViewSpec view;
  view.center = SphericalDirection(argc > 2 ? std::atof(argv[2]) : 45.0, argc > 3 ? std::atof(argv[3]) : 20.0);
  view.hfov_deg = view.vfov_deg = argc > 4 ? std::atof(argv[4]) : 90.0;
  view.width_px = view.height_px = 256;
  const std::string out = argc > 5 ? argv[5] : "view.png";

  const ViewImage img = ExtractView(canvas, view);
  WritePng(out, img.pixels);

  // Round trip of the view's corner pixel through the sphere.
  const SphericalDirection corner = ViewPxToDir(view, 0, 0);
  const ViewPixel back = DirToViewPx(view, corner);
  const EquirectPoint eq = DirToEquirectPx(corner, canvas.width(), canvas.height());
  std::cout << "corner (0,0) -> heading " << corner.heading_deg() << ", elevation "
            << corner.elevation_deg() << " -> equirect (" << eq.x << ", " << eq.y
            << ") -> view (" << back.u << ", " << back.v << ")\n"
            << "wrote " << out << " (" << img.ValidFraction() * 100 << "% valid)\n";

  EquirectCanvas back_canvas(canvas.width(), canvas.height());
  CompositeViewInPlace(back_canvas, view, ViewImage::FromPixels(img.pixels), 0.0);
  std::cout << "view covers " << CoverageFraction(back_canvas, -90, 90) * 100
            << "% of the sphere\n";
  return 0;
}
