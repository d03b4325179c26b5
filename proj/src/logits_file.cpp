/* Copyright 2026 The ptsim Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "ptsim/logits_file.h"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "ptsim/errors.h"

namespace ptsim {

namespace {

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t GetU32(std::string_view bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + i]))
         << (8 * i);
  }
  return v;
}

}  // namespace

std::string EncodeLogits(const Tensor<float>& logits) {
  if (logits.rank() != 2) {
    throw DimensionError("logits file needs a rank-2 tensor, got " +
                         ShapeToString(logits.shape()));
  }
  std::string out;
  out.reserve(8 + 4 * logits.size());
  PutU32(out, static_cast<std::uint32_t>(logits.dim(0)));
  PutU32(out, static_cast<std::uint32_t>(logits.dim(1)));
  for (float v : logits.data()) PutU32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

Tensor<float> DecodeLogits(std::string_view bytes) {
  if (bytes.size() < 8) throw InputError("logits file shorter than its header");
  const auto seq = static_cast<std::int32_t>(GetU32(bytes, 0));
  const auto vocab = static_cast<std::int32_t>(GetU32(bytes, 4));
  if (seq <= 0 || vocab <= 0) {
    throw InputError("logits file header has non-positive dimensions");
  }
  const std::size_t count = static_cast<std::size_t>(seq) * vocab;
  if (bytes.size() != 8 + 4 * count) {
    throw InputError("logits file holds " + std::to_string(bytes.size()) +
                     " bytes, header implies " + std::to_string(8 + 4 * count));
  }
  std::vector<float> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = std::bit_cast<float>(GetU32(bytes, 8 + 4 * i));
  }
  return Tensor<float>({static_cast<std::size_t>(seq),
                        static_cast<std::size_t>(vocab)},
                       std::move(data));
}

void WriteLogitsFile(const std::filesystem::path& path,
                     const Tensor<float>& logits) {
  const std::string bytes = EncodeLogits(logits);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

Tensor<float> ReadLogitsFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return DecodeLogits(buf.str());
}

}  // namespace ptsim
