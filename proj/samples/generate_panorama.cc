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

// Generates one panorama from a theme with the procedural backend and writes
// the environment directory plus a horizon-strip preview.
//
//   generate_panorama [out_dir] [view_px] [seed]

#include <cstdlib>
#include <iostream>

#include "panoweave/outpaint_engine.h"
#include "panoweave/procedural_backend.h"

int main(int argc, char** argv) {
  using namespace panoweave;
  const std::filesystem::path out = argc > 1 ? argv[1] : "sample_env";
  const int view_px = argc > 2 ? std::atoi(argv[2]) : 128;
  const uint64_t seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 1;

  OutpaintConfig config;
  config.view_grid.width_px = config.view_grid.height_px = view_px;
  config.canvas_height_px = 2 * view_px;
  config.blend_width_px = view_px / 16.0;
  config.seed = seed;

  ViewpointCaptions captions{{"sample_scan", "sample_vp"}, {}};
  for (const ViewIndex& idx : AllViewIndices()) {
    const char* what = idx.elevation_index > 0 ? "the ceiling" : idx.elevation_index < 0 ? "the floor" : "a wall";
    captions.text[idx.Ordinal()] = std::string("a sunlit living room, looking at ") + what;
  }

  ProceduralBackend backend;
  try {
    const PanoEnvironment env = GeneratePanorama(
        captions, config, backend, [](const StepEvent& ev) {
          std::cout << "step " << ev.index + 1 << "/36  heading "
                    << ev.step.view.center.heading_deg() << "  elevation "
                    << ev.step.view.center.elevation_deg() << "  known "
                    << ev.step.known_fraction << '\n';
        });
    SaveEnvironment(env, out);
    WritePng(out / "horizon_strip.png", RenderHorizonStrip(env.canvas, config.view_grid));
    std::cout << "band coverage " << CoverageFraction(env.canvas, -60, 60) << ", sphere coverage "
              << CoverageFraction(env.canvas, -90, 90) << ", seam energy "
              << SeamEnergy(env.canvas).value_or(-1) << '\n'
              << "wrote " << out.string() << '\n';
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}
