// Copyright 2026 The Stylemix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Style-based image generator. A latent vector is mapped to an intermediate
// style vector by a small MLP; the style is broadcast to every layer, where a
// per-layer affine turns it into AdaIN scale/bias parameters. Synthesis runs
// from a learned 4x4 constant through pairs of conv layers per resolution,
// with nearest-neighbor upsampling in between, per-layer noise injection, and
// a tanh mapping to [0,1] RGB at the end. The model is frozen at construction
// and fully determined by (seed, config); it doubles as the data-distribution
// oracle for the rest of the project.
//
// synthesize_grad backpropagates an image-space gradient to the per-layer
// styles analytically, including the mean/std dependence inside AdaIN. It is
// checked against central finite differences in the test suite.

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "stylemix/errors.hpp"
#include "stylemix/nn.hpp"
#include "stylemix/rng.hpp"
#include "stylemix/sha256.hpp"
#include "stylemix/tensor.hpp"

namespace stylemix {

struct GeneratorConfig {
  int latent_dim = 64;
  int style_dim = 64;
  int base_channels = 64;  // channels at 4x4, halved per resolution
  int image_size = 32;
  double leak = 0.2;
  double eps_std = 1e-5;  // floor on the AdaIN channel std

  int resolutions() const {
    int n = 1, r = 4;
    while (r < image_size) {
      r *= 2;
      ++n;
    }
    if (r != image_size) throw ConfigError("image_size must be 4*2^k");
    return n;
  }
  int style_layers() const { return 2 * resolutions(); }
  int channels_at(int res_index) const { return std::max(base_channels >> res_index, 4); }

  bool operator==(const GeneratorConfig&) const = default;
};

using Latent = Vec;

// Per-layer intermediate style vectors; the unit style mixing operates on.
// Layer 0 is coarsest, layer L-1 finest.
struct StylePack {
  std::vector<Vec> layers;

  int layer_count() const { return static_cast<int>(layers.size()); }
  Vec& layer(int i) { return layers[i]; }
  const Vec& layer(int i) const { return layers[i]; }
  bool operator==(const StylePack&) const = default;
};

// Per-layer single-channel Gaussian fields, reproducible from the seed.
struct NoiseField {
  std::uint64_t seed = 0;
  std::vector<Vec> layers;  // layer i: res_i * res_i draws
};

// Layers 0..r of the result come from `target`, layers r+1..L-1 from `aux`.
inline StylePack style_mix(const StylePack& target, const StylePack& aux, int r) {
  const int n = target.layer_count();
  if (aux.layer_count() != n) throw ConfigError("style_mix: layer count mismatch");
  if (r < 0 || r >= n) {
    throw ConfigError("style_mix: level " + std::to_string(r) + " outside [0, " +
                      std::to_string(n - 1) + "]");
  }
  StylePack out;
  out.layers.reserve(n);
  for (int i = 0; i < n; ++i) out.layers.push_back(i <= r ? target.layers[i] : aux.layers[i]);
  return out;
}

class GeneratorModel {
 public:
  GeneratorModel(std::uint64_t seed, GeneratorConfig cfg = {})
      : seed_(seed), cfg_(std::move(cfg)) {
    build(seed);
  }

  const GeneratorConfig& config() const { return cfg_; }
  std::uint64_t seed() const { return seed_; }
  int layer_count() const { return static_cast<int>(layers_.size()); }
  int resolution_of_layer(int i) const { return 4 << (i / 2); }

  // z -> w by the mapping MLP, broadcast to all style layers. The per-layer
  // affines are applied later, during synthesis.
  StylePack map_latent(const Latent& z) const {
    const Vec w = map_to_style(z);
    StylePack pack;
    pack.layers.assign(layer_count(), w);
    return pack;
  }

  Vec map_to_style(const Latent& z) const {
    if (static_cast<int>(z.size()) != cfg_.latent_dim) {
      throw ConfigError("map_latent: latent dimension " + std::to_string(z.size()) +
                        " != " + std::to_string(cfg_.latent_dim));
    }
    if (!all_finite(z)) throw ConfigError("map_latent: latent has non-finite entries");
    Vec h = fc1_.forward(z);
    for (auto& x : h) x = leaky(x, cfg_.leak);
    h = fc2_.forward(h);
    for (auto& x : h) x = leaky(x, cfg_.leak);
    return fc3_.forward(h);
  }

  NoiseField make_noise(std::uint64_t seed) const {
    NoiseField n;
    n.seed = seed;
    Rng rng(derive_seed(seed, "noise"));
    for (int i = 0; i < layer_count(); ++i) {
      const int res = resolution_of_layer(i);
      n.layers.push_back(rng.normals(static_cast<std::size_t>(res) * res));
    }
    return n;
  }

  struct ForwardCache {
    std::vector<Tensor3> normalized;   // x-hat per layer
    std::vector<Vec> sigma_used;       // per-channel std actually divided by
    std::vector<std::vector<char>> clamped;  // std hit the eps floor
    std::vector<Vec> scale;            // AdaIN scale per channel
    std::vector<Vec> bias;             // AdaIN bias per channel
    Tensor3 rgb;                       // pre-tanh RGB
  };

  Image synthesize(const StylePack& s, const NoiseField& noise, ForwardCache* cache = nullptr) const {
    check_pack(s);
    if (static_cast<int>(noise.layers.size()) != layer_count()) {
      throw ConfigError("synthesize: noise layer count mismatch");
    }
    Tensor3 x = constant_;
    for (int i = 0; i < layer_count(); ++i) {
      const bool new_res = i > 0 && i % 2 == 0;
      if (new_res) x = upsample2x(x);
      Tensor3 t = i == 0 ? convs_[0].forward(constant_) : convs_[i].forward(x);
      // per-channel scaled single-channel noise
      const Vec& field = noise.layers[i];
      for (int c = 0; c < t.c; ++c) {
        double* plane = t.plane(c);
        const double nscale = noise_scale_[i][c];
        for (int p = 0; p < t.h * t.w; ++p) plane[p] += nscale * field[p];
      }
      adain(i, s.layers[i], t, cache);
      leaky_inplace(t, cfg_.leak);
      x = std::move(t);
    }
    Tensor3 rgb(3, x.h, x.w);
    for (int rc = 0; rc < 3; ++rc) {
      double* out = rgb.plane(rc);
      for (int p = 0; p < x.h * x.w; ++p) out[p] = to_rgb_b_[rc];
      for (int c = 0; c < x.c; ++c) {
        const double wgt = to_rgb_w_[static_cast<std::size_t>(rc) * x.c + c];
        const double* in = x.plane(c);
        for (int p = 0; p < x.h * x.w; ++p) out[p] += wgt * in[p];
      }
    }
    if (cache) cache->rgb = rgb;
    Image img(3, x.h, x.w);
    for (std::size_t p = 0; p < rgb.v.size(); ++p) {
      double v = 0.5 * (std::tanh(rgb.v[p]) + 1.0);
      if (v < 0.0) v = 0.0;
      if (v > 1.0) v = 1.0;
      img.v[p] = v;
    }
    return img;
  }

  // d(sum(upstream * image))/d(styles). `upstream` has image shape.
  StylePack synthesize_grad(const StylePack& s, const NoiseField& noise,
                            const Image& upstream) const {
    if (!all_finite(upstream)) throw ConfigError("synthesize_grad: non-finite upstream");
    ForwardCache cache;
    synthesize(s, noise, &cache);

    // through the tanh->[0,1] map (the clamp is a no-op on (0,1))
    Tensor3 drgb(3, cache.rgb.h, cache.rgb.w);
    for (std::size_t p = 0; p < drgb.v.size(); ++p) {
      const double t = std::tanh(cache.rgb.v[p]);
      drgb.v[p] = upstream.v[p] * 0.5 * (1.0 - t * t);
    }

    // through the 1x1 RGB projection
    const int last = layer_count() - 1;
    const int cl = channels_of_layer(last);
    Tensor3 dx(cl, drgb.h, drgb.w);
    for (int c = 0; c < cl; ++c) {
      double* out = dx.plane(c);
      for (int rc = 0; rc < 3; ++rc) {
        const double wgt = to_rgb_w_[static_cast<std::size_t>(rc) * cl + c];
        const double* in = drgb.plane(rc);
        for (int p = 0; p < drgb.h * drgb.w; ++p) out[p] += wgt * in[p];
      }
    }

    StylePack grad;
    grad.layers.assign(layer_count(), Vec(cfg_.style_dim, 0.0));
    for (int i = last; i >= 0; --i) {
      // leaky-ReLU backward; pre-activation recomputed from the cache
      const Tensor3& xhat = cache.normalized[i];
      const Vec& sc = cache.scale[i];
      const Vec& bi = cache.bias[i];
      const int hw = xhat.h * xhat.w;
      for (int c = 0; c < xhat.c; ++c) {
        const double* xp = xhat.plane(c);
        double* dp = dx.plane(c);
        for (int p = 0; p < hw; ++p) {
          const double pre = sc[c] * xp[p] + bi[c];
          dp[p] *= leaky_grad(pre, cfg_.leak);
        }
      }
      // AdaIN backward: style affine params, then instance-norm
      Vec dparams(2 * xhat.c, 0.0);
      for (int c = 0; c < xhat.c; ++c) {
        const double* xp = xhat.plane(c);
        double* dp = dx.plane(c);
        double dscale = 0.0, dbias = 0.0;
        for (int p = 0; p < hw; ++p) {
          dscale += dp[p] * xp[p];
          dbias += dp[p];
        }
        dparams[c] = dscale;
        dparams[xhat.c + c] = dbias;
        const double sigma = cache.sigma_used[i][c];
        const double inv_n = 1.0 / hw;
        if (cache.clamped[i][c]) {
          // std treated as the constant floor; only the mean path remains
          const double mean_d = dbias * inv_n;
          for (int p = 0; p < hw; ++p) dp[p] = (dp[p] * sc[c] - sc[c] * mean_d) / sigma;
        } else {
          double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
          for (int p = 0; p < hw; ++p) {
            const double d = dp[p] * sc[c];
            mean_dxhat += d;
            mean_dxhat_xhat += d * xp[p];
          }
          mean_dxhat *= inv_n;
          mean_dxhat_xhat *= inv_n;
          for (int p = 0; p < hw; ++p) {
            const double d = dp[p] * sc[c];
            dp[p] = (d - mean_dxhat - xp[p] * mean_dxhat_xhat) / sigma;
          }
        }
      }
      grad.layers[i] = style_affine_[i].backward_input(dparams);
      // noise add is identity w.r.t. the conv output
      if (i == 0) break;
      const bool new_res = i % 2 == 0;
      const int in_res = new_res ? resolution_of_layer(i - 1) * 2 : resolution_of_layer(i - 1);
      Tensor3 dprev = convs_[i].backward_input(dx, in_res, in_res);
      if (new_res) dprev = downsample_sum(dprev);
      dx = std::move(dprev);
    }
    return grad;
  }

  int channels_of_layer(int i) const { return cfg_.channels_at(i / 2); }

  // Raw weights in construction order; basis of the fingerprint.
  Vec serialize_weights() const {
    Vec out;
    auto push = [&out](const Vec& v) { out.insert(out.end(), v.begin(), v.end()); };
    push(fc1_.w); push(fc1_.b);
    push(fc2_.w); push(fc2_.b);
    push(fc3_.w); push(fc3_.b);
    push(constant_.v);
    for (int i = 0; i < layer_count(); ++i) {
      push(convs_[i].w);
      push(convs_[i].b);
      push(style_affine_[i].w);
      push(style_affine_[i].b);
      push(noise_scale_[i]);
    }
    push(to_rgb_w_);
    push(to_rgb_b_);
    return out;
  }

  nlohmann::json fingerprint() const {
    return nlohmann::json{{"seed", seed_},
                          {"latent_dim", cfg_.latent_dim},
                          {"style_dim", cfg_.style_dim},
                          {"base_channels", cfg_.base_channels},
                          {"image_size", cfg_.image_size},
                          {"weights_sha256", sha256_hex(serialize_weights())}};
  }

  // Refuses fingerprints that do not match this model exactly.
  void check_fingerprint(const nlohmann::json& fp) const {
    const auto own = fingerprint();
    for (const auto& [key, value] : own.items()) {
      if (!fp.contains(key) || fp[key] != value) {
        throw ConfigError("generator fingerprint mismatch on '" + key + "'");
      }
    }
  }

  void check_pack(const StylePack& s) const {
    if (s.layer_count() != layer_count()) {
      throw ConfigError("style pack has " + std::to_string(s.layer_count()) + " layers, generator expects " +
                        std::to_string(layer_count()));
    }
    for (const auto& l : s.layers) {
      if (static_cast<int>(l.size()) != cfg_.style_dim) throw ConfigError("style vector dimension mismatch");
      if (!all_finite(l)) throw ConfigError("style pack has non-finite entries");
    }
  }

 private:
  void build(std::uint64_t seed) {
    Rng rng(derive_seed(seed, "generator"));
    const int d = cfg_.latent_dim;
    fc1_ = Dense(d, cfg_.style_dim);
    fc1_.init(rng, 1.0);
    for (auto& x : fc1_.b) x = 0.1 * rng.normal();
    fc2_ = Dense(cfg_.style_dim, cfg_.style_dim);
    fc2_.init(rng, 1.0);
    for (auto& x : fc2_.b) x = 0.1 * rng.normal();
    fc3_ = Dense(cfg_.style_dim, cfg_.style_dim);
    fc3_.init(rng, 1.0);
    for (auto& x : fc3_.b) x = 0.1 * rng.normal();

    const int c0 = cfg_.channels_at(0);
    constant_ = Tensor3(c0, 4, 4);
    for (auto& x : constant_.v) x = rng.normal();

    const int n_layers = cfg_.style_layers();
    for (int i = 0; i < n_layers; ++i) {
      const int cin = i == 0 ? c0 : channels_of_layer(i - 1);
      const int cout = channels_of_layer(i);
      Conv3x3 conv(cin, cout, 1);
      conv.init(rng, 1.0);
      convs_.push_back(std::move(conv));
      Dense affine(cfg_.style_dim, 2 * cout);
      affine.init(rng, 1.0);
      for (int c = 0; c < cout; ++c) affine.b[c] = 1.0;  // scales start at 1
      style_affine_.push_back(std::move(affine));
      Vec nscale(cout);
      for (auto& x : nscale) x = 0.1 * rng.normal();
      noise_scale_.push_back(std::move(nscale));
    }
    const int cl = channels_of_layer(n_layers - 1);
    to_rgb_w_.resize(3 * static_cast<std::size_t>(cl));
    const double std = 1.0 / std::sqrt(static_cast<double>(cl));
    for (auto& x : to_rgb_w_) x = rng.normal() * std;
    to_rgb_b_.assign(3, 0.0);
  }

  void adain(int layer, const Vec& style, Tensor3& t, ForwardCache* cache) const {
    const Vec params = style_affine_[layer].forward(style);
    const int hw = t.h * t.w;
    Vec sigma_used(t.c);
    std::vector<char> clamped(t.c, 0);
    for (int c = 0; c < t.c; ++c) {
      double* p = t.plane(c);
      double mean = 0.0;
      for (int i = 0; i < hw; ++i) mean += p[i];
      mean /= hw;
      double var = 0.0;
      for (int i = 0; i < hw; ++i) var += (p[i] - mean) * (p[i] - mean);
      var /= hw;
      double sigma = std::sqrt(var);
      if (sigma < cfg_.eps_std) {
        sigma = cfg_.eps_std;
        clamped[c] = 1;
      }
      sigma_used[c] = sigma;
      const double scale = params[c], bias = params[t.c + c];
      const double inv = 1.0 / sigma;
      for (int i = 0; i < hw; ++i) p[i] = (p[i] - mean) * inv;
      if (cache) {
        // stash x-hat before applying scale/bias
        if (c == 0) cache->normalized.push_back(t);
        else {
          double* dst = cache->normalized.back().plane(c);
          for (int i = 0; i < hw; ++i) dst[i] = p[i];
        }
      }
      for (int i = 0; i < hw; ++i) p[i] = scale * p[i] + bias;
    }
    if (cache) {
      cache->sigma_used.push_back(std::move(sigma_used));
      cache->clamped.push_back(std::move(clamped));
      Vec sc(t.c), bi(t.c);
      for (int c = 0; c < t.c; ++c) {
        sc[c] = params[c];
        bi[c] = params[t.c + c];
      }
      cache->scale.push_back(std::move(sc));
      cache->bias.push_back(std::move(bi));
    }
  }

  static Tensor3 upsample2x(const Tensor3& x) {
    Tensor3 out(x.c, x.h * 2, x.w * 2);
    for (int c = 0; c < x.c; ++c) {
      const double* in = x.plane(c);
      double* op = out.plane(c);
      for (int y = 0; y < x.h; ++y) {
        for (int xx = 0; xx < x.w; ++xx) {
          const double v = in[y * x.w + xx];
          op[(2 * y) * out.w + 2 * xx] = v;
          op[(2 * y) * out.w + 2 * xx + 1] = v;
          op[(2 * y + 1) * out.w + 2 * xx] = v;
          op[(2 * y + 1) * out.w + 2 * xx + 1] = v;
        }
      }
    }
    return out;
  }

  static Tensor3 downsample_sum(const Tensor3& x) {
    Tensor3 out(x.c, x.h / 2, x.w / 2);
    for (int c = 0; c < x.c; ++c) {
      const double* in = x.plane(c);
      double* op = out.plane(c);
      for (int y = 0; y < out.h; ++y) {
        for (int xx = 0; xx < out.w; ++xx) {
          op[y * out.w + xx] = in[(2 * y) * x.w + 2 * xx] + in[(2 * y) * x.w + 2 * xx + 1] +
                               in[(2 * y + 1) * x.w + 2 * xx] + in[(2 * y + 1) * x.w + 2 * xx + 1];
        }
      }
    }
    return out;
  }

  std::uint64_t seed_;
  GeneratorConfig cfg_;
  Dense fc1_, fc2_, fc3_;
  Tensor3 constant_;
  std::vector<Conv3x3> convs_;
  std::vector<Dense> style_affine_;
  std::vector<Vec> noise_scale_;
  Vec to_rgb_w_, to_rgb_b_;
};

}  // namespace stylemix
