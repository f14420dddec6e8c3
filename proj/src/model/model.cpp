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

#include "model/model.hpp"

#include <numeric>

#include "common/errors.hpp"
#include "tensor/ops.hpp"

namespace hogformer::model {

template <typename T>
void Model<T>::visit(const blocks::ParamVisitor<T>& fn) {
  fn("stem", stem);
  for (std::size_t l = 0; l < encoder.size(); ++l) {
    for (std::size_t b = 0; b < encoder[l].size(); ++b) {
      encoder[l][b].visit("encoder." + std::to_string(l) + "." + std::to_string(b) + ".", fn);
    }
    if (l < down.size()) fn("down." + std::to_string(l), down[l]);
  }
  for (std::size_t i = decoder.size(); i-- > 0;) {
    const std::string l = std::to_string(i);
    fn("up." + l, up[i]);
    if (!skip_fuse.empty()) fn("skip." + l, skip_fuse[i]);
    for (std::size_t b = 0; b < decoder[i].size(); ++b) {
      decoder[i][b].visit("decoder." + l + "." + std::to_string(b) + ".", fn);
    }
    fn("coarse." + l + ".pointwise", coarse[i].pointwise);
    fn("coarse." + l + ".depthwise", coarse[i].depthwise);
    fn("coarse." + l + ".fuse", coarse[i].fuse);
  }
  fn("head", head);
}

template <typename T>
std::int64_t Model<T>::param_count() {
  std::int64_t n = 0;
  visit([&](const std::string&, Tensor<T>& t) { n += t.numel(); });
  return n;
}

template <typename T>
Model<T> build_model(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  blocks::Initializer<T> init(seed);
  const auto opt = cfg.block_options();
  Model<T> m;
  m.config = cfg;
  m.stem = init.conv({cfg.width(0), 3, 3, 3});
  const int L = cfg.levels;
  for (int l = 0; l < L; ++l) {
    const std::int64_t c = cfg.width(l);
    std::vector<blocks::HogtbParams<T>> stack;
    for (int b = 0; b < cfg.blocks_per_level[static_cast<std::size_t>(l)]; ++b) {
      stack.push_back(blocks::make_hogtb<T>(c, cfg.heads_per_level[static_cast<std::size_t>(l)], opt, init));
    }
    m.encoder.push_back(std::move(stack));
    if (l < L - 1) m.down.push_back(init.conv({2 * c, 4 * c, 1, 1}));
  }
  m.up.resize(static_cast<std::size_t>(L - 1));
  m.decoder.resize(static_cast<std::size_t>(L - 1));
  m.coarse.resize(static_cast<std::size_t>(L - 1));
  if (cfg.skip_fusion == SkipFusion::kConcat) m.skip_fuse.resize(static_cast<std::size_t>(L - 1));
  for (int l = L - 2; l >= 0; --l) {
    const auto i = static_cast<std::size_t>(l);
    const std::int64_t c = cfg.width(l);
    m.up[i] = init.conv({4 * c, 2 * c, 1, 1});
    if (!m.skip_fuse.empty()) m.skip_fuse[i] = init.conv({c, 2 * c, 1, 1});
    for (int b = 0; b < cfg.blocks_per_level[i]; ++b) {
      m.decoder[i].push_back(blocks::make_hogtb<T>(c, cfg.heads_per_level[i], opt, init));
    }
    m.coarse[i].pointwise = init.conv({c, c, 1, 1});
    m.coarse[i].depthwise = init.conv({c, 1, 3, 3});
    m.coarse[i].fuse = init.conv({c, 2 * c, 1, 1});
  }
  m.head = init.constant({3, cfg.width(0), 3, 3}, T(0));
  return m;
}

template <typename To, typename From>
Model<To> convert_model(Model<From>& m) {
  std::vector<Tensor<From>*> src;
  m.visit([&](const std::string&, Tensor<From>& t) { src.push_back(&t); });
  Model<To> out = build_model<To>(m.config, 0);
  std::size_t i = 0;
  out.visit([&](const std::string& name, Tensor<To>& t) {
    const auto s = src.at(i++)->data();
    if (static_cast<std::int64_t>(s.size()) != t.numel()) {
      throw Error("convert_model: size mismatch at " + name);
    }
    auto d = t.data_mut();
    for (std::size_t k = 0; k < s.size(); ++k) d[k] = static_cast<To>(s[k]);
  });
  return out;
}

namespace {

bool extent_ok(const ModelConfig& cfg, std::int64_t hp, std::int64_t wp) {
  const bool hog_used = cfg.ldrconv || cfg.dhogsa;
  for (int l = 0; l < cfg.levels; ++l) {
    const std::int64_t h = hp >> l, w = wp >> l;
    if (hog_used && (h < 3 || w < 3)) return false;
    if (cfg.dhogsa && (h * w) % cfg.heads_per_level[static_cast<std::size_t>(l)] != 0) return false;
  }
  return true;
}

}  // namespace

Padding padded_extent(const ModelConfig& cfg, std::int64_t height, std::int64_t width) {
  const std::int64_t step = std::lcm(std::int64_t{1} << (cfg.levels - 1), static_cast<std::int64_t>(cfg.ldr_patch));
  const std::int64_t h0 = (height + step - 1) / step * step;
  const std::int64_t w0 = (width + step - 1) / step * step;
  Padding best{-1, -1};
  for (std::int64_t a = 0; a <= 16; ++a)
    for (std::int64_t b = 0; b <= 16; ++b) {
      const std::int64_t hp = h0 + a * step, wp = w0 + b * step;
      if (best.height > 0 && hp * wp >= best.height * best.width) continue;
      if (extent_ok(cfg, hp, wp)) best = {hp, wp};
    }
  if (best.height < 0) {
    throw ConfigError("no padded extent satisfies the level constraints for " + std::to_string(height) +
                      "x" + std::to_string(width));
  }
  return best;
}

template <typename T>
Tensor<T> coarse_skip_fuse(const Tensor<T>& enc, const Tensor<T>& dec, const CoarseSkipParams<T>& p) {
  if (enc.shape() != dec.shape()) {
    throw Error("coarse_skip_fuse: encoder " + shape_str(enc.shape()) + " vs decoder " +
                shape_str(dec.shape()) + " (padding bug)");
  }
  ops::Conv2dOptions dw;
  dw.padding = 1;
  dw.groups = static_cast<int>(enc.dim(1));
  const auto pooled = ops::avg_pool2d(enc, 3, 1, 1);
  const auto processed = ops::conv2d(ops::conv2d(pooled, p.pointwise, Tensor<T>()), p.depthwise, Tensor<T>(), dw);
  return ops::conv2d(ops::concat<T>({processed, dec}, 1), p.fuse, Tensor<T>());
}

template <typename T>
Tensor<T> forward(const Model<T>& m, const Tensor<T>& x) {
  if (x.rank() != 4 || x.dim(1) != 3) {
    throw InputError("forward: expected (N, 3, H, W) input, got " + shape_str(x.shape()));
  }
  const std::int64_t H = x.dim(2), W = x.dim(3);
  if (H < 16 || W < 16) {
    throw InputError("forward: spatial extent " + std::to_string(H) + "x" + std::to_string(W) +
                     " is below the 16x16 minimum");
  }
  const auto pad = padded_extent(m.config, H, W);
  const auto xp = ops::pad_reflect(x, 0, static_cast<int>(pad.height - H), 0, static_cast<int>(pad.width - W));

  ops::Conv2dOptions same;
  same.padding = 1;
  auto f = ops::conv2d(xp, m.stem, Tensor<T>(), same);
  const int L = m.config.levels;
  std::vector<Tensor<T>> skips;
  for (int l = 0; l < L; ++l) {
    for (const auto& blk : m.encoder[static_cast<std::size_t>(l)]) f = blocks::hogtb_forward(f, blk);
    if (l < L - 1) {
      skips.push_back(f);
      f = ops::conv2d(ops::pixel_unshuffle(f, 2), m.down[static_cast<std::size_t>(l)], Tensor<T>());
    }
  }
  for (int l = L - 2; l >= 0; --l) {
    const auto i = static_cast<std::size_t>(l);
    const auto& enc = skips[i];
    f = ops::pixel_shuffle(ops::conv2d(f, m.up[i], Tensor<T>()), 2, ops::ShuffleDirection::kUp);
    if (m.config.skip_fusion == SkipFusion::kConcat) {
      f = ops::conv2d(ops::concat<T>({f, enc}, 1), m.skip_fuse[i], Tensor<T>());
    } else {
      f = ops::add(f, enc);
    }
    for (const auto& blk : m.decoder[i]) f = blocks::hogtb_forward(f, blk);
    f = coarse_skip_fuse(enc, f, m.coarse[i]);
  }
  const auto residual = ops::conv2d(f, m.head, Tensor<T>(), same);
  return ops::add(x, ops::crop(residual, 0, 0, H, W));
}

Tensor<float> restore_image(const Model<float>& m, const Tensor<float>& image_chw) {
  if (image_chw.rank() != 3 || image_chw.dim(0) != 3) {
    throw InputError("restore: expected a 3-channel (3, H, W) image, got " + shape_str(image_chw.shape()));
  }
  NoGradGuard no_grad;
  const auto x = ops::reshape(image_chw.detach(), {1, 3, image_chw.dim(1), image_chw.dim(2)});
  const auto y = ops::clamp(forward(m, x), 0.0f, 1.0f);
  return ops::reshape(y, {3, image_chw.dim(1), image_chw.dim(2)});
}

#define HOGF_INSTANTIATE(T)                                                                   \
  template struct Model<T>;                                                                   \
  template Model<T> build_model(const ModelConfig&, std::uint64_t);                           \
  template Tensor<T> coarse_skip_fuse(const Tensor<T>&, const Tensor<T>&, const CoarseSkipParams<T>&); \
  template Tensor<T> forward(const Model<T>&, const Tensor<T>&);

HOGF_INSTANTIATE(float)
HOGF_INSTANTIATE(double)
#undef HOGF_INSTANTIATE

template Model<double> convert_model(Model<float>&);
template Model<float> convert_model(Model<double>&);
template Model<float> convert_model(Model<float>&);
template Model<double> convert_model(Model<double>&);

}  // namespace hogformer::model
