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

// Golden-logit files: an 8-byte header of two little-endian int32 values
// (seq, vocab) followed by seq * vocab little-endian IEEE-754 binary32 values
// in row-major order.

#ifndef PTSIM_LOGITS_FILE_H_
#define PTSIM_LOGITS_FILE_H_

#include <filesystem>
#include <string>
#include <string_view>

#include "ptsim/tensor.h"

namespace ptsim {

std::string EncodeLogits(const Tensor<float>& logits);
Tensor<float> DecodeLogits(std::string_view bytes);

void WriteLogitsFile(const std::filesystem::path& path,
                     const Tensor<float>& logits);
Tensor<float> ReadLogitsFile(const std::filesystem::path& path);

}  // namespace ptsim

#endif  // PTSIM_LOGITS_FILE_H_
