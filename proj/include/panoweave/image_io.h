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

#ifndef PANOWEAVE_IMAGE_IO_H_
#define PANOWEAVE_IMAGE_IO_H_

#include <openssl/evp.h>
#include <png.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>

#include "panoweave/error.h"
#include "panoweave/image.h"

namespace panoweave {

namespace internal {

template <int kChannels>
constexpr png_uint_32 PngFormat() {
  static_assert(kChannels == 1 || kChannels == 3);
  return kChannels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
}

}  // namespace internal

template <int kChannels>
std::string EncodePng(const Image<kChannels>& img) {
  if (img.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot encode empty image");
  png_image desc;
  std::memset(&desc, 0, sizeof(desc));
  desc.version = PNG_IMAGE_VERSION;
  desc.width = static_cast<png_uint_32>(img.width());
  desc.height = static_cast<png_uint_32>(img.height());
  desc.format = internal::PngFormat<kChannels>();

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&desc, nullptr, &size, 0, img.bytes().data(),
                                 img.row_stride(), nullptr)) {
    throw Error(ErrorCode::kIo, std::string("png sizing failed: ") + desc.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&desc, out.data(), &size, 0, img.bytes().data(),
                                 img.row_stride(), nullptr)) {
    throw Error(ErrorCode::kIo, std::string("png encode failed: ") + desc.message);
  }
  out.resize(size);
  return out;
}

template <int kChannels>
Image<kChannels> DecodePng(std::string_view bytes) {
  png_image desc;
  std::memset(&desc, 0, sizeof(desc));
  desc.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&desc, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::kParse, std::string("png decode failed: ") + desc.message);
  }
  desc.format = internal::PngFormat<kChannels>();
  Image<kChannels> img(static_cast<int>(desc.width), static_cast<int>(desc.height));
  if (!png_image_finish_read(&desc, nullptr, img.bytes().data(), img.row_stride(),
                             nullptr)) {
    png_image_free(&desc);
    throw Error(ErrorCode::kParse, std::string("png decode failed: ") + desc.message);
  }
  return img;
}

inline std::string ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Writes via a temporary sibling and rename so readers never observe a
// half-written file.
inline void WriteFileBytes(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::kIo, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

template <int kChannels>
void WritePng(const std::filesystem::path& path, const Image<kChannels>& img) {
  WriteFileBytes(path, EncodePng(img));
}

template <int kChannels>
Image<kChannels> ReadPng(const std::filesystem::path& path) {
  return DecodePng<kChannels>(ReadFileBytes(path));
}

inline std::string Base64Encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<size_t>(n));
  return out;
}

inline std::string Base64Decode(std::string_view text) {
  if (text.size() % 4 != 0) {
    throw Error(ErrorCode::kParse, "base64 length is not a multiple of 4");
  }
  std::string out(3 * (text.size() / 4), '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw Error(ErrorCode::kParse, "invalid base64 payload");
  // EVP_DecodeBlock counts padding as zero bytes.
  size_t padding = 0;
  if (!text.empty() && text.back() == '=') ++padding;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++padding;
  out.resize(static_cast<size_t>(n) - padding);
  return out;
}

}  // namespace panoweave

#endif  // PANOWEAVE_IMAGE_IO_H_
