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

#include <string>

#include "data/manifest.hpp"
#include "hog/profile.hpp"

namespace hogformer::diagnostics {

// Descriptors of every degraded manifest sample, grouped by degradation kind
// in order of first appearance.
std::vector<hog::LabeledCorpus> manifest_corpora(const data::Manifest& m);

hog::ProfileReport profile_manifest(const data::Manifest& m);

// signatures.csv, distances.csv and profile.json in `dir` (created if needed).
void write_profile(const hog::ProfileReport& report, const std::string& dir);

}  // namespace hogformer::diagnostics
