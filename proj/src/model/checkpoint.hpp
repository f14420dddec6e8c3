/* Copyright (c) 2026 The hogformer-cpp Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "model/model.hpp"

namespace hogformer::model {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct OptimizerState {
  std::int64_t t = 0;
  std::map<std::string, std::vector<float>> m;
  std::map<std::string, std::vector<float>> v;
};

struct CheckpointExtras {
  std::int64_t step = 0;
  std::optional<OptimizerState> optimizer;
};

struct LoadedCheckpoint {
  Model<float> model;
  CheckpointExtras extras;
};

// Layout: "HOGF", u32 version, u64 header length, JSON header, then raw
// little-endian float32 blobs at the manifest offsets (relative to the end of
// the header). Each blob carries a CRC-32.
std::vector<std::uint8_t> serialize_checkpoint(Model<float>& m, const CheckpointExtras& extras = {});
// `expected`, when given, must match the stored config exactly.
LoadedCheckpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes,
                                        const ModelConfig* expected = nullptr);

void save_checkpoint(Model<float>& m, const std::string& path, const CheckpointExtras& extras = {});
LoadedCheckpoint load_checkpoint(const std::string& path, const ModelConfig* expected = nullptr);

}  // namespace hogformer::model
