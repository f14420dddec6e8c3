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
#include "diagnostics/hog_profile.hpp"

#include <filesystem>
#include <fstream>
#include <map>

#include "common/errors.hpp"

namespace hogformer::diagnostics {

std::vector<hog::LabeledCorpus> manifest_corpora(const data::Manifest& m) {
  std::vector<hog::LabeledCorpus> out;
  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    const auto sample = data::load_sample(m, i);
    const std::string label = data::kind_name(sample.spec.kind);
    auto [it, fresh] = slot.emplace(label, out.size());
    if (fresh) out.push_back({label, {}, {}});
    auto& c = out[it->second];
    c.descriptors.push_back(hog::hog_descriptor(sample.degraded));
    c.ids.push_back(sample.id);
  }
  return out;
}

hog::ProfileReport profile_manifest(const data::Manifest& m) { return hog::profile_corpora(manifest_corpora(m)); }

void write_profile(const hog::ProfileReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& text) {
    const auto path = (std::filesystem::path(dir) / name).string();
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!(f << text)) throw IoError("cannot write " + path);
  };
  put("signatures.csv", hog::signatures_csv(report));
  put("distances.csv", hog::distance_matrix_csv(report));
  put("profile.json", hog::report_json(report).dump(2) + "\n");
}

}  // namespace hogformer::diagnostics
