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

#include "data/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "common/errors.hpp"
#include "common/rng.hpp"

namespace hogformer::data {

namespace {

struct KindInfo {
  DegradationKind kind;
  const char* name;
  std::vector<const char*> keys;
};

const std::vector<KindInfo>& kinds() {
  static const std::vector<KindInfo> k = {
      {DegradationKind::kIdentity, "identity", {}},
      {DegradationKind::kNoise, "noise", {"sigma"}},
      {DegradationKind::kBlur, "blur", {"sigma"}},
      {DegradationKind::kRain, "rain", {"count", "length", "angle", "intensity", "width"}},
      {DegradationKind::kHaze, "haze", {"t", "airlight", "depth_near", "depth_far"}},
      {DegradationKind::kLowlight, "lowlight", {"gamma", "gain"}},
      {DegradationKind::kSnow, "snow", {"density", "size", "intensity"}},
  };
  return k;
}

const KindInfo& info(DegradationKind kind) {
  for (const auto& k : kinds()) {
    if (k.kind == kind) return k;
  }
  throw Error("unknown degradation kind");
}

void require_image(const Tensor<float>& x) {
  if (x.rank() != 3 || x.dim(0) != 3) {
    throw InputError("degrade: expected a (3, H, W) image, got " + shape_str(x.shape()));
  }
}

std::int64_t reflect(std::int64_t i, std::int64_t n) {
  if (n == 1) return 0;
  const std::int64_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

float clip01(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

// Adds a white layer (H x W, already in [0, inf)) to every channel.
Tensor<float> add_layer(const Tensor<float>& x, const std::vector<double>& layer, bool screen) {
  const std::int64_t H = x.dim(1), W = x.dim(2);
  std::vector<float> out(x.data().begin(), x.data().end());
  for (int c = 0; c < 3; ++c)
    for (std::int64_t i = 0; i < H * W; ++i) {
      const double v = out[static_cast<std::size_t>(c * H * W + i)];
      const double a = layer[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(c * H * W + i)] = clip01(screen ? v + (1.0 - v) * std::min(a, 1.0) : v + a);
    }
  return Tensor<float>::from_data(x.shape(), std::move(out));
}

Tensor<float> rain(const Tensor<float>& x, const DegradationSpec& s) {
  const std::int64_t H = x.dim(1), W = x.dim(2);
  Rng rng(s.seed);
  std::vector<double> layer(static_cast<std::size_t>(H * W), 0.0);
  const double theta = s.rain_angle * std::numbers::pi / 180.0;
  const double dx = std::cos(theta), dy = std::sin(theta);
  const auto count = static_cast<std::int64_t>(std::llround(s.rain_count * static_cast<double>(H * W) / 4096.0));
  const double reach = 3.0 * s.rain_width + 1.0;
  for (std::int64_t k = 0; k < count; ++k) {
    const double len = s.rain_length * rng.uniform(0.6, 1.2);
    const double cx = rng.uniform(-0.5 * len, W + 0.5 * len);
    const double cy = rng.uniform(-0.5 * len, H + 0.5 * len);
    const double amp = s.rain_intensity * rng.uniform(0.5, 1.0);
    const double x0 = cx - 0.5 * len * dx, y0 = cy - 0.5 * len * dy;
    const auto xlo = static_cast<std::int64_t>(std::floor(std::min(x0, x0 + len * dx) - reach));
    const auto xhi = static_cast<std::int64_t>(std::ceil(std::max(x0, x0 + len * dx) + reach));
    const auto ylo = static_cast<std::int64_t>(std::floor(std::min(y0, y0 + len * dy) - reach));
    const auto yhi = static_cast<std::int64_t>(std::ceil(std::max(y0, y0 + len * dy) + reach));
    for (std::int64_t y = std::max<std::int64_t>(0, ylo); y <= std::min(H - 1, yhi); ++y)
      for (std::int64_t xx = std::max<std::int64_t>(0, xlo); xx <= std::min(W - 1, xhi); ++xx) {
        const double px = xx - x0, py = y - y0;
        const double along = std::clamp(px * dx + py * dy, 0.0, len);
        const double ex = px - along * dx, ey = py - along * dy;
        const double d2 = ex * ex + ey * ey;
        auto& v = layer[static_cast<std::size_t>(y * W + xx)];
        v = std::max(v, amp * std::exp(-d2 / (2.0 * s.rain_width * s.rain_width)));
      }
  }
  return add_layer(x, layer, false);
}

Tensor<float> snow(const Tensor<float>& x, const DegradationSpec& s) {
  const std::int64_t H = x.dim(1), W = x.dim(2);
  Rng rng(s.seed);
  std::vector<double> layer(static_cast<std::size_t>(H * W), 0.0);
  const auto count = static_cast<std::int64_t>(std::llround(s.snow_density * static_cast<double>(H * W)));
  for (std::int64_t k = 0; k < count; ++k) {
    const double r = s.snow_size * rng.uniform(0.5, 1.5);
    const double cx = rng.uniform(-r, W + r), cy = rng.uniform(-r, H + r);
    const double amp = s.snow_intensity * rng.uniform(0.6, 1.0);
    const auto ylo = static_cast<std::int64_t>(std::floor(cy - r - 1)), yhi = static_cast<std::int64_t>(std::ceil(cy + r + 1));
    const auto xlo = static_cast<std::int64_t>(std::floor(cx - r - 1)), xhi = static_cast<std::int64_t>(std::ceil(cx + r + 1));
    for (std::int64_t y = std::max<std::int64_t>(0, ylo); y <= std::min(H - 1, yhi); ++y)
      for (std::int64_t xx = std::max<std::int64_t>(0, xlo); xx <= std::min(W - 1, xhi); ++xx) {
        const double d = std::hypot(xx - cx, y - cy);
        // Solid core with a one-pixel anti-aliased rim.
        const double a = amp * std::clamp(r + 0.5 - d, 0.0, 1.0);
        auto& v = layer[static_cast<std::size_t>(y * W + xx)];
        v = std::max(v, a);
      }
  }
  return add_layer(x, layer, true);
}

Tensor<float> haze(const Tensor<float>& x, const DegradationSpec& s) {
  const std::int64_t H = x.dim(1), W = x.dim(2);
  std::vector<float> out(x.data().begin(), x.data().end());
  for (std::int64_t y = 0; y < H; ++y) {
    // Depth ramps linearly from far (top) to near (bottom); t = t0^depth.
    const double f = H > 1 ? static_cast<double>(y) / static_cast<double>(H - 1) : 1.0;
    const double depth = s.haze_depth_far + (s.haze_depth_near - s.haze_depth_far) * f;
    const double t = s.haze_t == 0.0 ? 0.0 : std::pow(s.haze_t, depth);
    for (int c = 0; c < 3; ++c)
      for (std::int64_t xx = 0; xx < W; ++xx) {
        auto& v = out[static_cast<std::size_t>((c * H + y) * W + xx)];
        v = clip01(v * t + s.haze_airlight * (1.0 - t));
      }
  }
  return Tensor<float>::from_data(x.shape(), std::move(out));
}

}  // namespace

const char* kind_name(DegradationKind kind) { return info(kind).name; }

DegradationKind kind_from_name(const std::string& name) {
  for (const auto& k : kinds()) {
    if (name == k.name) return k.kind;
  }
  throw ConfigError("unknown degradation kind '" + name +
                    "' (expected identity, noise, blur, rain, haze, lowlight or snow)");
}

void DegradationSpec::validate() const {
  std::vector<std::string> bad;
  auto check = [&](bool ok, const char* field, double v, const char* bounds) {
    if (!ok) bad.push_back(std::string(field) + "=" + std::to_string(v) + " outside " + bounds);
  };
  switch (kind) {
    case DegradationKind::kIdentity:
      break;
    case DegradationKind::kNoise:
      check(noise_sigma >= 0 && noise_sigma <= 1, "sigma", noise_sigma, "[0, 1]");
      break;
    case DegradationKind::kBlur:
      check(blur_sigma > 0 && blur_sigma <= 10, "sigma", blur_sigma, "(0, 10]");
      break;
    case DegradationKind::kRain:
      check(rain_count >= 0 && rain_count <= 10000, "count", rain_count, "[0, 10000]");
      check(rain_length >= 1 && rain_length <= 256, "length", rain_length, "[1, 256]");
      check(rain_angle >= 0 && rain_angle <= 180, "angle", rain_angle, "[0, 180]");
      check(rain_intensity >= 0 && rain_intensity <= 1, "intensity", rain_intensity, "[0, 1]");
      check(rain_width >= 0.2 && rain_width <= 5, "width", rain_width, "[0.2, 5]");
      break;
    case DegradationKind::kHaze:
      check(haze_t >= 0 && haze_t <= 1, "t", haze_t, "[0, 1]");
      check(haze_airlight >= 0 && haze_airlight <= 1, "airlight", haze_airlight, "[0, 1]");
      check(haze_depth_near >= 0 && haze_depth_near <= 4, "depth_near", haze_depth_near, "[0, 4]");
      check(haze_depth_far >= 0 && haze_depth_far <= 4, "depth_far", haze_depth_far, "[0, 4]");
      break;
    case DegradationKind::kLowlight:
      check(lowlight_gamma >= 1 && lowlight_gamma <= 5, "gamma", lowlight_gamma, "[1, 5]");
      check(lowlight_gain > 0 && lowlight_gain <= 1, "gain", lowlight_gain, "(0, 1]");
      break;
    case DegradationKind::kSnow:
      check(snow_density >= 0 && snow_density <= 0.2, "density", snow_density, "[0, 0.2]");
      check(snow_size >= 0.3 && snow_size <= 10, "size", snow_size, "[0.3, 10]");
      check(snow_intensity >= 0 && snow_intensity <= 1, "intensity", snow_intensity, "[0, 1]");
      break;
  }
  if (bad.empty()) return;
  std::string msg = std::string(kind_name(kind)) + " spec out of range:";
  for (const auto& b : bad) msg += " " + b + ";";
  msg.pop_back();
  throw BoundsError(msg);
}

DegradationSpec default_spec(DegradationKind kind, std::uint64_t seed) {
  DegradationSpec s;
  s.kind = kind;
  s.seed = seed;
  return s;
}

nlohmann::json to_json(const DegradationSpec& s) {
  nlohmann::json j = {{"kind", kind_name(s.kind)}, {"seed", s.seed}};
  switch (s.kind) {
    case DegradationKind::kIdentity:
      break;
    case DegradationKind::kNoise:
      j["sigma"] = s.noise_sigma;
      break;
    case DegradationKind::kBlur:
      j["sigma"] = s.blur_sigma;
      break;
    case DegradationKind::kRain:
      j["count"] = s.rain_count;
      j["length"] = s.rain_length;
      j["angle"] = s.rain_angle;
      j["intensity"] = s.rain_intensity;
      j["width"] = s.rain_width;
      break;
    case DegradationKind::kHaze:
      j["t"] = s.haze_t;
      j["airlight"] = s.haze_airlight;
      j["depth_near"] = s.haze_depth_near;
      j["depth_far"] = s.haze_depth_far;
      break;
    case DegradationKind::kLowlight:
      j["gamma"] = s.lowlight_gamma;
      j["gain"] = s.lowlight_gain;
      break;
    case DegradationKind::kSnow:
      j["density"] = s.snow_density;
      j["size"] = s.snow_size;
      j["intensity"] = s.snow_intensity;
      break;
  }
  return j;
}

DegradationSpec spec_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw ConfigError("degradation spec must be an object with a string 'kind': " + j.dump());
  }
  DegradationSpec s = default_spec(kind_from_name(j["kind"].get<std::string>()));
  const auto& keys = info(s.kind).keys;
  std::set<std::string> allowed(keys.begin(), keys.end());
  allowed.insert("kind");
  allowed.insert("seed");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) {
      throw ConfigError("degradation spec key '" + k + "' is not valid for kind '" + kind_name(s.kind) + "'");
    }
    if (k != "kind" && !v.is_number()) throw ConfigError("degradation spec key '" + k + "' must be a number");
  }
  auto num = [&](const char* key, double& out) {
    if (j.contains(key)) out = j[key].get<double>();
  };
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("degradation spec 'seed' must be a non-negative integer");
    s.seed = j["seed"].get<std::uint64_t>();
  }
  switch (s.kind) {
    case DegradationKind::kIdentity:
      break;
    case DegradationKind::kNoise:
      num("sigma", s.noise_sigma);
      break;
    case DegradationKind::kBlur:
      num("sigma", s.blur_sigma);
      break;
    case DegradationKind::kRain: {
      double count = s.rain_count;
      num("count", count);
      if (count != std::floor(count)) throw ConfigError("rain 'count' must be an integer");
      if (count < -1e9 || count > 1e9) throw BoundsError("rain count=" + std::to_string(count) + " outside [0, 10000]");
      s.rain_count = static_cast<int>(count);
      num("length", s.rain_length);
      num("angle", s.rain_angle);
      num("intensity", s.rain_intensity);
      num("width", s.rain_width);
      break;
    }
    case DegradationKind::kHaze:
      num("t", s.haze_t);
      num("airlight", s.haze_airlight);
      num("depth_near", s.haze_depth_near);
      num("depth_far", s.haze_depth_far);
      break;
    case DegradationKind::kLowlight:
      num("gamma", s.lowlight_gamma);
      num("gain", s.lowlight_gain);
      break;
    case DegradationKind::kSnow:
      num("density", s.snow_density);
      num("size", s.snow_size);
      num("intensity", s.snow_intensity);
      break;
  }
  s.validate();
  return s;
}

Tensor<float> gaussian_blur(const Tensor<float>& x, double sigma) {
  require_image(x);
  const std::int64_t H = x.dim(1), W = x.dim(2);
  const auto radius = static_cast<std::int64_t>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0;
  for (std::int64_t i = -radius; i <= radius; ++i) {
    k[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
    sum += k[static_cast<std::size_t>(i + radius)];
  }
  for (auto& v : k) v /= sum;
  const auto in = x.data();
  std::vector<double> tmp(in.size());
  std::vector<float> out(in.size());
  for (int c = 0; c < 3; ++c) {
    const std::int64_t base = c * H * W;
    for (std::int64_t y = 0; y < H; ++y)
      for (std::int64_t xx = 0; xx < W; ++xx) {
        double s = 0;
        for (std::int64_t i = -radius; i <= radius; ++i) {
          s += k[static_cast<std::size_t>(i + radius)] * in[base + y * W + reflect(xx + i, W)];
        }
        tmp[static_cast<std::size_t>(base + y * W + xx)] = s;
      }
    for (std::int64_t y = 0; y < H; ++y)
      for (std::int64_t xx = 0; xx < W; ++xx) {
        double s = 0;
        for (std::int64_t i = -radius; i <= radius; ++i) {
          s += k[static_cast<std::size_t>(i + radius)] * tmp[static_cast<std::size_t>(base + reflect(y + i, H) * W + xx)];
        }
        out[static_cast<std::size_t>(base + y * W + xx)] = clip01(s);
      }
  }
  return Tensor<float>::from_data(x.shape(), std::move(out));
}

Tensor<float> degrade(const Tensor<float>& clean, const DegradationSpec& spec) {
  require_image(clean);
  spec.validate();
  switch (spec.kind) {
    case DegradationKind::kIdentity:
      return clean.detach().clone_leaf(false);
    case DegradationKind::kNoise: {
      Rng rng(spec.seed);
      std::vector<float> out(clean.data().begin(), clean.data().end());
      for (auto& v : out) v = clip01(v + spec.noise_sigma * rng.normal());
      return Tensor<float>::from_data(clean.shape(), std::move(out));
    }
    case DegradationKind::kBlur:
      return gaussian_blur(clean, spec.blur_sigma);
    case DegradationKind::kRain:
      return rain(clean, spec);
    case DegradationKind::kHaze:
      return haze(clean, spec);
    case DegradationKind::kLowlight: {
      std::vector<float> out(clean.data().begin(), clean.data().end());
      for (auto& v : out) v = clip01(spec.lowlight_gain * std::pow(std::max(0.0f, v), spec.lowlight_gamma));
      return Tensor<float>::from_data(clean.shape(), std::move(out));
    }
    case DegradationKind::kSnow:
      return snow(clean, spec);
  }
  throw Error("unhandled degradation kind");
}

}  // namespace hogformer::data
