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
#include <vector>

#include <json.hpp>

#include "tensor/tensor.hpp"

namespace hogformer::hog {

using Descriptor = std::vector<double>;

// L2-normalized mean over cells of the soft cell histogram of a (3, H, W)
// image; extents are reflect-padded up to a cell multiple. An image without
// gradients maps to the zero vector.
Descriptor hog_descriptor(const Tensor<float>& image_chw, int cell = 8, int n_bin = 9);

struct DegradationSignature {
  std::string label;
  Descriptor centroid;      // mean descriptor
  double dispersion = 0.0;  // mean L2 distance of members to the centroid
  std::size_t count = 0;
};

// Throws InputError for an empty class.
DegradationSignature degradation_signature(const std::vector<Descriptor>& members, const std::string& label);

struct LabeledCorpus {
  std::string label;
  std::vector<Descriptor> descriptors;
  std::vector<std::string> ids;  // optional, parallel to descriptors
};

struct ProfileReport {
  std::vector<DegradationSignature> signatures;
  std::vector<std::vector<double>> distances;  // centroid distance matrix
  // Leave-one-out nearest-centroid confusion: rows true class, columns predicted.
  std::vector<std::vector<int>> confusion;
  double accuracy = 0.0;
  // Class pairs whose centroid distance exceeds both classes' dispersions.
  int separated_pairs = 0;
  int total_pairs = 0;
};

// Needs >= 2 classes with >= 2 members each.
ProfileReport profile_corpora(const std::vector<LabeledCorpus>& classes);

std::string distance_matrix_csv(const ProfileReport& report);
// label,count,dispersion,bin_0..bin_{n-1} (centroid).
std::string signatures_csv(const ProfileReport& report);
nlohmann::json report_json(const ProfileReport& report);

}  // namespace hogformer::hog
