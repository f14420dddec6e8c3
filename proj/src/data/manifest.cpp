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

#include "data/manifest.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "common/errors.hpp"
#include "common/rng.hpp"
#include "data/image_io.hpp"
#include "data/synth.hpp"

namespace hogformer::data {

namespace fs = std::filesystem;

namespace {

bool is_image_file(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".ppm";
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw IoError("write failed for '" + path + "'");
}

}  // namespace

std::string Manifest::resolve(const ManifestEntry& e) const {
  const fs::path p(e.clean_path);
  return p.is_absolute() ? p.string() : (fs::path(base_dir) / p).string();
}

Manifest build_manifest(const std::string& root) {
  if (!fs::is_directory(root)) throw ConfigError("manifest root '" + root + "' is not a directory");
  std::vector<std::string> images;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_regular_file() && is_image_file(e.path())) images.push_back(e.path().filename().string());
  }
  std::sort(images.begin(), images.end());

  std::vector<DegradationSpec> specs;
  const fs::path spec_path = fs::path(root) / kSpecsFile;
  if (fs::exists(spec_path)) {
    const auto j = read_json_file(spec_path.string());
    if (!j.is_array()) throw ConfigError("'" + spec_path.string() + "' must hold a JSON array of specs");
    for (const auto& s : j) specs.push_back(spec_from_json(s));
  } else {
    specs.push_back(default_spec(DegradationKind::kIdentity));
  }

  Manifest m;
  m.base_dir = root;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string stem = fs::path(images[i]).stem().string();
    std::map<std::string, int> seen;
    for (const auto& spec : specs) {
      ManifestEntry e;
      const std::string kind = kind_name(spec.kind);
      const int k = seen[kind]++;
      e.id = stem + "__" + kind + (k > 0 ? "_" + std::to_string(k) : "");
      e.clean_path = images[i];
      e.spec = spec;
      e.spec.seed = mix_seed(spec.seed, i);
      m.entries.push_back(std::move(e));
    }
  }
  return m;
}

nlohmann::json to_json(const Manifest& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : m.entries) {
    entries.push_back({{"id", e.id}, {"clean_path", e.clean_path}, {"spec", to_json(e.spec)}});
  }
  return {{"version", 1}, {"entries", entries}};
}

Manifest manifest_from_json(const nlohmann::json& j, const std::string& base_dir) {
  if (!j.is_object() || !j.contains("entries") || !j["entries"].is_array()) {
    throw ConfigError("manifest must be an object with an 'entries' array");
  }
  if (j.value("version", 1) != 1) throw ConfigError("unsupported manifest version " + j["version"].dump());
  Manifest m;
  m.base_dir = base_dir;
  for (const auto& e : j["entries"]) {
    if (!e.is_object() || !e.contains("id") || !e.contains("clean_path") || !e["id"].is_string() ||
        !e["clean_path"].is_string()) {
      throw ConfigError("manifest entry needs string 'id' and 'clean_path': " + e.dump());
    }
    ManifestEntry me;
    me.id = e["id"].get<std::string>();
    me.clean_path = e["clean_path"].get<std::string>();
    me.spec = e.contains("spec") ? spec_from_json(e["spec"]) : default_spec(DegradationKind::kIdentity);
    m.entries.push_back(std::move(me));
  }
  return m;
}

void write_manifest(const Manifest& m, const std::string& path) {
  Manifest out = m;
  const fs::path target = fs::weakly_canonical(fs::absolute(fs::path(path)).parent_path());
  for (auto& e : out.entries) {
    if (fs::path(e.clean_path).is_absolute()) continue;
    const fs::path source = fs::weakly_canonical(fs::absolute(m.resolve(e)));
    e.clean_path = source.lexically_relative(target).generic_string();
  }
  out.base_dir = target.string();
  write_text(path, to_json(out).dump(2) + "\n");
}

void validate_paths(const Manifest& m) {
  std::vector<std::string> missing;
  for (const auto& e : m.entries) {
    if (!fs::is_regular_file(m.resolve(e))) missing.push_back(e.id + " -> " + m.resolve(e));
  }
  if (missing.empty()) return;
  std::string msg = "manifest has " + std::to_string(missing.size()) + " dangling path(s):";
  for (std::size_t i = 0; i < missing.size() && i < 10; ++i) msg += " " + missing[i] + ";";
  msg.pop_back();
  throw ConfigError(msg);
}

Manifest read_manifest(const std::string& path) {
  const auto base = fs::path(path).parent_path();
  auto m = manifest_from_json(read_json_file(path), base.empty() ? "." : base.string());
  validate_paths(m);
  return m;
}

ImageSample load_sample(const Manifest& m, std::size_t index) {
  if (index >= m.entries.size()) throw BoundsError("manifest index " + std::to_string(index) + " out of range");
  const auto& e = m.entries[index];
  ImageSample s;
  s.id = e.id;
  s.spec = e.spec;
  s.clean = load_image(m.resolve(e));
  s.degraded = degrade(s.clean, e.spec);
  return s;
}

Manifest make_corpus(const std::string& dir, const CorpusOptions& o) {
  if (o.images < 0) throw ConfigError("corpus image count must be >= 0");
  fs::create_directories(dir);
  for (int i = 0; i < o.images; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "clean_%03d.png", i);
    save_image(synth_clean(o.height, o.width, mix_seed(o.seed, static_cast<std::uint64_t>(i))),
               (fs::path(dir) / name).string());
  }
  std::vector<DegradationSpec> specs = o.specs;
  if (specs.empty()) {
    for (auto k : {DegradationKind::kNoise, DegradationKind::kBlur, DegradationKind::kRain, DegradationKind::kHaze,
                   DegradationKind::kLowlight, DegradationKind::kSnow}) {
      specs.push_back(default_spec(k, o.seed));
    }
  }
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : specs) arr.push_back(to_json(s));
  write_text((fs::path(dir) / kSpecsFile).string(), arr.dump(2) + "\n");
  auto m = build_manifest(dir);
  m.base_dir = dir;
  write_manifest(m, (fs::path(dir) / kManifestFile).string());
  return m;
}

}  // namespace hogformer::data
