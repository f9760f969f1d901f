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

// Records request/response bodies exchanged with the mock service into a
// fixture directory. Usage: record-wire-fixtures <out_dir>

#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include "panoweave/image_io.h"
#include "panoweave/mock_service.h"
#include "panoweave/procedural_backend.h"
#include "panoweave/wire.h"

namespace {

using namespace panoweave;

void Save(const std::filesystem::path& dir, const std::string& name, const std::string& body) {
  WriteFileBytes(dir / (name + ".json"), body);
  std::cout << name << ".json " << body.size() << " bytes\n";
}

std::string Post(httplib::Client& cli, const std::string& path, const std::string& body) {
  auto res = cli.Post(path, body, "application/json");
  if (!res) throw Error(ErrorCode::kBackendUnavailable, "no response from " + path);
  return res->body;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: record-wire-fixtures <out_dir>\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);

  MockGenerationService service(std::make_shared<ProceduralBackend>());
  service.Start();
  httplib::Client cli(service.url());

  const std::string gen_req = wire::Encode(wire::GenerateRequest{"a bright kitchen", 7, 8, 8});
  Save(dir, "generate_request", gen_req);
  const std::string gen_res = Post(cli, "/generate", gen_req);
  Save(dir, "generate_response", gen_res);

  wire::OutpaintRequest op;
  op.image = wire::DecodeImageResponse(gen_res).image;
  op.mask = GrayImage(8, 8);
  for (int y = 0; y < 8; ++y) {
    for (int x = 4; x < 8; ++x) *op.mask.pixel(x, y) = kMaskGenerate;
  }
  op.prompt = "a bright kitchen";
  op.seed = 8;
  const std::string op_req = wire::Encode(op);
  Save(dir, "outpaint_request", op_req);
  Save(dir, "outpaint_response", Post(cli, "/outpaint", op_req));

  const std::string cap_req = wire::Encode(wire::CaptionRequest{op.image});
  Save(dir, "caption_request", cap_req);
  Save(dir, "caption_response", Post(cli, "/caption", cap_req));

  service.InjectFault(Fault::kUnavailable);
  Save(dir, "error_unavailable", Post(cli, "/generate", gen_req));
  service.InjectFault(Fault::kServerError);
  Save(dir, "error_internal", Post(cli, "/generate", gen_req));

  auto health = cli.Get("/healthz");
  if (!health) return 1;
  Save(dir, "healthz", health->body);
  service.Stop();
  return 0;
}
