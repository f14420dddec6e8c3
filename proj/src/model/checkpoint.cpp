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

#include "model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>

#include <zlib.h>

#include "common/errors.hpp"

namespace hogformer::model {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'H', 'O', 'G', 'F'};

std::uint32_t crc_of(const float* data, std::size_t count) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(count * sizeof(float))));
}

template <typename U>
void put(std::vector<std::uint8_t>& out, U value) {
  std::uint8_t b[sizeof(U)];
  std::memcpy(b, &value, sizeof(U));
  out.insert(out.end(), b, b + sizeof(U));
}

template <typename U>
U get(const std::vector<std::uint8_t>& in, std::size_t offset) {
  U v;
  std::memcpy(&v, in.data() + offset, sizeof(U));
  return v;
}

struct Blob {
  std::string name;
  Shape shape;
  const float* data;
  std::size_t count;
};

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(Model<float>& m, const CheckpointExtras& extras) {
  std::vector<Blob> blobs;
  m.visit([&](const std::string& name, Tensor<float>& t) {
    blobs.push_back({name, t.shape(), t.data().data(), t.data().size()});
  });
  if (extras.optimizer) {
    const auto& opt = *extras.optimizer;
    const std::size_t n_params = blobs.size();
    for (std::size_t i = 0; i < n_params; ++i) {
      const Blob p = blobs[i];
      for (const auto* table : {&opt.m, &opt.v}) {
        const auto it = table->find(p.name);
        if (it == table->end()) continue;
        if (it->second.size() != p.count) throw CheckpointError("optimizer moment size mismatch for " + p.name);
        blobs.push_back({(table == &opt.m ? "adam.m." : "adam.v.") + p.name, p.shape, it->second.data(),
                         it->second.size()});
      }
    }
  }

  nlohmann::json manifest = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& b : blobs) {
    const std::uint64_t length = b.count * sizeof(float);
    manifest.push_back({{"name", b.name},
                        {"shape", b.shape},
                        {"offset", offset},
                        {"length", length},
                        {"crc32", crc_of(b.data, b.count)}});
    offset += length;
  }
  nlohmann::json header = {{"format", "hogformer-checkpoint"},
                           {"config", to_json(m.config)},
                           {"step", extras.step},
                           {"params", manifest}};
  if (extras.optimizer) header["optimizer"] = {{"t", extras.optimizer->t}};
  const std::string text = header.dump();

  std::vector<std::uint8_t> out;
  out.reserve(16 + text.size() + offset);
  out.insert(out.end(), kMagic, kMagic + 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& b : blobs) {
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(b.data);
    out.insert(out.end(), bytes, bytes + b.count * sizeof(float));
  }
  return out;
}

LoadedCheckpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes, const ModelConfig* expected) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw CheckpointError("not a checkpoint: bad magic");
  }
  const auto version = get<std::uint32_t>(bytes, 4);
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version) + " (this build reads " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  const auto header_len = get<std::uint64_t>(bytes, 8);
  if (header_len > bytes.size() - 16) throw CheckpointError("truncated checkpoint header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(header_len));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint header: ") + e.what());
  }
  if (!header.is_object() || !header.contains("config") || !header.contains("params") ||
      !header["params"].is_array()) {
    throw CheckpointError("corrupt checkpoint header: missing config or params");
  }

  ModelConfig cfg;
  try {
    cfg = config_from_json(header["config"]);
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("checkpoint config echo is invalid: ") + e.what());
  }
  if (expected != nullptr) {
    const auto diff = config_differences(*expected, cfg);
    if (!diff.empty()) {
      std::string msg = "config conflict between checkpoint and requested model:";
      for (const auto& k : diff) {
        msg += " " + k + " (checkpoint " + to_json(cfg)[k].dump() + ", requested " + to_json(*expected)[k].dump() + ")";
      }
      throw CheckpointError(msg);
    }
  }

  LoadedCheckpoint out{build_model<float>(cfg, 0), {}};
  std::map<std::string, Tensor<float>*> params;
  out.model.visit([&](const std::string& name, Tensor<float>& t) { params[name] = &t; });
  const std::size_t payload = 16 + header_len;
  std::set<std::string> seen;
  OptimizerState opt;
  for (const auto& entry : header["params"]) {
    std::string name;
    Shape shape;
    std::uint64_t offset = 0, length = 0;
    std::uint32_t crc = 0;
    try {
      name = entry.at("name").get<std::string>();
      shape = entry.at("shape").get<Shape>();
      offset = entry.at("offset").get<std::uint64_t>();
      length = entry.at("length").get<std::uint64_t>();
      crc = entry.at("crc32").get<std::uint32_t>();
    } catch (const nlohmann::json::exception&) {
      throw CheckpointError("corrupt checkpoint header: malformed manifest entry " + entry.dump());
    }
    std::string base = name;
    std::map<std::string, std::vector<float>>* moments = nullptr;
    if (name.rfind("adam.m.", 0) == 0) {
      base = name.substr(7);
      moments = &opt.m;
    } else if (name.rfind("adam.v.", 0) == 0) {
      base = name.substr(7);
      moments = &opt.v;
    }
    const auto it = params.find(base);
    if (it == params.end()) throw CheckpointError("unknown parameter '" + name + "' in checkpoint");
    if (!seen.insert(name).second) throw CheckpointError("duplicate parameter '" + name + "' in checkpoint");
    Tensor<float>& target = *it->second;
    if (shape != target.shape() || length != static_cast<std::uint64_t>(target.numel()) * sizeof(float)) {
      throw CheckpointError("parameter '" + name + "' has shape " + shape_str(shape) + ", model expects " +
                            shape_str(target.shape()));
    }
    if (offset > bytes.size() - payload || length > bytes.size() - payload - offset) {
      throw CheckpointError("truncated blob for parameter '" + name + "'");
    }
    std::vector<float> values(static_cast<std::size_t>(target.numel()));
    std::memcpy(values.data(), bytes.data() + payload + offset, length);
    if (crc_of(values.data(), values.size()) != crc) {
      throw CheckpointError("checksum mismatch for parameter '" + name + "'");
    }
    if (moments != nullptr) {
      (*moments)[base] = std::move(values);
    } else {
      std::copy(values.begin(), values.end(), target.data_mut().begin());
    }
  }
  for (const auto& [name, t] : params) {
    if (!seen.count(name)) throw CheckpointError("checkpoint is missing parameter '" + name + "'");
  }
  out.extras.step = header.value("step", std::int64_t{0});
  if (header.contains("optimizer")) {
    opt.t = header["optimizer"].value("t", std::int64_t{0});
    out.extras.optimizer = std::move(opt);
  }
  return out;
}

void save_checkpoint(Model<float>& m, const std::string& path, const CheckpointExtras& extras) {
  const auto bytes = serialize_checkpoint(m, extras);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + tmp + "' for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed for '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place at '" + path + "': " + ec.message());
}

LoadedCheckpoint load_checkpoint(const std::string& path, const ModelConfig* expected) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot open checkpoint '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes, expected);
}

}  // namespace hogformer::model
