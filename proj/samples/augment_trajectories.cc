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

// Samples environment replacements for a trajectory file against a registry
// and prints the per-trajectory bitmasks.
//
//   augment_trajectories [trajectories.jsonl] [registry.jsonl] [ratio] [mode]

#include <cstdlib>
#include <iostream>

#include "panoweave/env_augment.h"

int main(int argc, char** argv) {
  using namespace panoweave;
  const std::filesystem::path data = PANOWEAVE_SAMPLE_DATA;
  const std::filesystem::path traj_path = argc > 1 ? argv[1] : data / "trajectories.jsonl";
  const std::filesystem::path reg_path = argc > 2 ? argv[2] : data / "registry.jsonl";

  AugmentConfig config;
  config.ratio_m = argc > 3 ? std::atof(argv[3]) : 0.5;
  config.mode = argc > 4 ? ParseReplaceMode(argv[4]) : ReplaceMode::kBernoulli;
  config.seed = 2024;
  config.variant_choice = VariantChoice::kUniformRandom;

  try {
    const auto trajectories = LoadTrajectories(traj_path);
    const EnvRegistry registry = LoadRegistryManifest(reg_path, /*validate=*/false);
    std::cout << registry.environment_count() << " environments, " << registry.view_image_count()
              << " view images\n";
    for (const auto& t : trajectories) {
      const Replacement r = SampleReplacements(t, config, registry);
      std::cout << t.traj_id << "  " << r.BitString() << "  (" << t.instruction << ")\n";
      for (size_t k = 0; k < r.env_paths.size(); ++k) {
        std::cout << "    variant " << r.variant_indices[k] << ": " << r.env_paths[k] << '\n';
      }
    }
    const AugmentStats stats = AugmentTrajectories(trajectories, config, registry).stats;
    std::cout << stats.ToJson().dump(2) << '\n';
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}
