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

#include "hog/profile.hpp"

#include <cmath>
#include <sstream>

#include "common/errors.hpp"
#include "hog/hog.hpp"
#include "tensor/ops.hpp"

namespace hogformer::hog {

namespace {

double l2(const Descriptor& a, const Descriptor& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

Descriptor mean_of(const std::vector<Descriptor>& xs, std::size_t skip = static_cast<std::size_t>(-1)) {
  Descriptor m(xs.front().size(), 0.0);
  std::size_t n = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i == skip) continue;
    for (std::size_t k = 0; k < m.size(); ++k) m[k] += xs[i][k];
    ++n;
  }
  for (auto& v : m) v /= static_cast<double>(n);
  return m;
}

}  // namespace

Descriptor hog_descriptor(const Tensor<float>& image_chw, int cell, int n_bin) {
  if (image_chw.rank() != 3) throw InputError("hog_descriptor: expected (C, H, W), got " + shape_str(image_chw.shape()));
  NoGradGuard no_grad;
  const std::int64_t C = image_chw.dim(0), H = image_chw.dim(1), W = image_chw.dim(2);
  std::vector<double> v(image_chw.data().begin(), image_chw.data().end());
  auto x = Tensor<double>::from_data({1, C, H, W}, std::move(v));
  const int pad_h = static_cast<int>((cell - H % cell) % cell);
  const int pad_w = static_cast<int>((cell - W % cell) % cell);
  if (pad_h || pad_w) x = ops::pad_reflect(x, 0, pad_h, 0, pad_w);
  const auto hist = soft_cell_histogram(x, cell, n_bin);
  const auto h = hist.data();
  const std::size_t cells = h.size() / static_cast<std::size_t>(n_bin);
  Descriptor d(static_cast<std::size_t>(n_bin), 0.0);
  for (std::size_t c = 0; c < cells; ++c)
    for (int b = 0; b < n_bin; ++b) d[static_cast<std::size_t>(b)] += h[c * n_bin + b];
  double norm = 0;
  for (auto& e : d) {
    e /= static_cast<double>(cells);
    norm += e * e;
  }
  norm = std::sqrt(norm);
  if (norm > 0) {
    for (auto& e : d) e /= norm;
  }
  return d;
}

DegradationSignature degradation_signature(const std::vector<Descriptor>& members, const std::string& label) {
  if (members.empty()) throw InputError("degradation class '" + label + "' is empty");
  DegradationSignature s;
  s.label = label;
  s.count = members.size();
  s.centroid = mean_of(members);
  for (const auto& m : members) s.dispersion += l2(m, s.centroid);
  s.dispersion /= static_cast<double>(members.size());
  return s;
}

ProfileReport profile_corpora(const std::vector<LabeledCorpus>& classes) {
  if (classes.size() < 2) throw InputError("profiling needs at least two classes");
  for (const auto& c : classes) {
    if (c.descriptors.size() < 2) {
      throw InputError("class '" + c.label + "' has " + std::to_string(c.descriptors.size()) +
                       " images; at least 2 are required");
    }
  }
  ProfileReport r;
  const std::size_t K = classes.size();
  for (const auto& c : classes) r.signatures.push_back(degradation_signature(c.descriptors, c.label));
  r.distances.assign(K, std::vector<double>(K, 0.0));
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = 0; j < K; ++j) r.distances[i][j] = l2(r.signatures[i].centroid, r.signatures[j].centroid);
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = i + 1; j < K; ++j) {
      ++r.total_pairs;
      if (r.distances[i][j] > std::max(r.signatures[i].dispersion, r.signatures[j].dispersion)) ++r.separated_pairs;
    }

  r.confusion.assign(K, std::vector<int>(K, 0));
  int correct = 0, total = 0;
  for (std::size_t c = 0; c < K; ++c) {
    for (std::size_t i = 0; i < classes[c].descriptors.size(); ++i) {
      const Descriptor own = mean_of(classes[c].descriptors, i);
      std::size_t best = c;
      double best_d = l2(classes[c].descriptors[i], own);
      for (std::size_t k = 0; k < K; ++k) {
        if (k == c) continue;
        const double d = l2(classes[c].descriptors[i], r.signatures[k].centroid);
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      ++r.confusion[c][best];
      correct += best == c;
      ++total;
    }
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(total);
  return r;
}

std::string distance_matrix_csv(const ProfileReport& r) {
  std::ostringstream out;
  out.precision(9);
  out << "class";
  for (const auto& s : r.signatures) out << "," << s.label;
  out << "\n";
  for (std::size_t i = 0; i < r.signatures.size(); ++i) {
    out << r.signatures[i].label;
    for (double d : r.distances[i]) out << "," << d;
    out << "\n";
  }
  return out.str();
}

std::string signatures_csv(const ProfileReport& r) {
  std::ostringstream out;
  out.precision(9);
  out << "label,count,dispersion";
  const std::size_t bins = r.signatures.empty() ? 0 : r.signatures.front().centroid.size();
  for (std::size_t b = 0; b < bins; ++b) out << ",bin_" << b;
  out << "\n";
  for (const auto& s : r.signatures) {
    out << s.label << "," << s.count << "," << s.dispersion;
    for (double c : s.centroid) out << "," << c;
    out << "\n";
  }
  return out.str();
}

nlohmann::json report_json(const ProfileReport& r) {
  nlohmann::json sigs = nlohmann::json::array();
  std::vector<std::string> labels;
  for (const auto& s : r.signatures) {
    sigs.push_back({{"label", s.label}, {"centroid", s.centroid}, {"dispersion", s.dispersion}, {"count", s.count}});
    labels.push_back(s.label);
  }
  return {{"signatures", sigs},
          {"labels", labels},
          {"distances", r.distances},
          {"confusion", r.confusion},
          {"accuracy", r.accuracy},
          {"separated_pairs", r.separated_pairs},
          {"total_pairs", r.total_pairs}};
}

}  // namespace hogformer::hog
