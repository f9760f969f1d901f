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

// Serves the generation wire protocol backed by the procedural generator, for
// running the http backend end to end without a model service.

#include <spdlog/spdlog.h>

#include <memory>
#include <string>

#include "CLI11.hpp"
#include "panoweave/mock_service.h"
#include "panoweave/procedural_backend.h"

int main(int argc, char** argv) {
  CLI::App app{"Procedural generation service speaking the panoweave wire protocol",
               "panoweave-mock-server"};
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string model_id = "mock-procedural";
  app.add_option("--host", host, "bind address");
  app.add_option("--port", port, "bind port");
  app.add_option("--model-id", model_id, "model id reported to clients");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  panoweave::MockGenerationService service(std::make_shared<panoweave::ProceduralBackend>(),
                                           model_id);
  spdlog::info("serving on http://{}:{}", host, port);
  return service.ListenBlocking(host, port) ? 0 : 1;
}
