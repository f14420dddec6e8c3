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
#include <string>
#include <vector>

#include "data/degrade.hpp"
#include "tensor/tensor.hpp"

namespace hogformer::data {

struct ManifestEntry {
  std::string id;
  std::string clean_path;  // absolute, or relative to the manifest's directory
  DegradationSpec spec;

  bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  // Directory relative clean paths resolve against.
  std::string base_dir = ".";

  std::string resolve(const ManifestEntry& e) const;
};

struct ImageSample {
  std::string id;
  Tensor<float> clean;
  Tensor<float> degraded;
  DegradationSpec spec;
};

inline constexpr const char* kSpecsFile = "specs.json";
inline constexpr const char* kManifestFile = "manifest.json";

// Every PNG/PPM in `root` (sorted by file name) crossed with the spec list in
// root/specs.json (a JSON array; absent means a single identity spec). Each
// entry's seed is derived from the spec seed and the image index.
Manifest build_manifest(const std::string& root);

nlohmann::json to_json(const Manifest& m);
// Throws ConfigError on schema problems; `base_dir` is used for relative
// paths. Does not touch the file system.
Manifest manifest_from_json(const nlohmann::json& j, const std::string& base_dir);

// Relative clean paths are rewritten against the directory of `path`.
void write_manifest(const Manifest& m, const std::string& path);
// Reads and validates: every clean_path must exist (ConfigError listing the
// dangling ones).
Manifest read_manifest(const std::string& path);
void validate_paths(const Manifest& m);

// Loads the clean image and applies the entry's degradation.
ImageSample load_sample(const Manifest& m, std::size_t index);

struct CorpusOptions {
  int images = 20;
  std::int64_t height = 64;
  std::int64_t width = 64;
  std::uint64_t seed = 0;
  std::vector<DegradationSpec> specs;  // empty: the six weather/noise kinds with defaults
};

// Writes synthetic clean PNGs plus specs.json into `dir` (created if
// needed), then builds and writes dir/manifest.json. Returns the manifest.
Manifest make_corpus(const std::string& dir, const CorpusOptions& options);

}  // namespace hogformer::data
