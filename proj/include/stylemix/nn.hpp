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

// Minimal dense/conv layers with hand-written backward passes. Everything in
// this project that looks like a neural network (generator, encoder, feature
// extractor, embedder, attribute extractor) is built from these pieces, so
// their gradients are finite-difference tested once here and once more
// end-to-end per model.

#include <cmath>
#include <cstddef>
#include <vector>

#include "stylemix/rng.hpp"
#include "stylemix/tensor.hpp"

namespace stylemix {

inline double leaky(double x, double slope) { return x > 0.0 ? x : slope * x; }
inline double leaky_grad(double x, double slope) { return x > 0.0 ? 1.0 : slope; }

inline void leaky_inplace(Tensor3& t, double slope) {
  for (auto& x : t.v) x = leaky(x, slope);
}

// 3x3 convolution, zero padding 1, stride 1 or 2.
struct Conv3x3 {
  int in_ch = 0, out_ch = 0, stride = 1;
  Vec w;  // [out_ch][in_ch][3][3]
  Vec b;  // [out_ch]

  Conv3x3() = default;
  Conv3x3(int ic, int oc, int s) : in_ch(ic), out_ch(oc), stride(s), w(static_cast<std::size_t>(ic) * oc * 9, 0.0), b(oc, 0.0) {}

  void init(Rng& rng, double gain) {
    const double std = gain / std::sqrt(static_cast<double>(in_ch) * 9.0);
    for (auto& x : w) x = rng.normal() * std;
    for (auto& x : b) x = 0.0;
  }

  int out_h(int h) const { return (h - 1) / stride + 1; }

  static Vec padded(const Tensor3& x) {
    const int ph = x.h + 2, pw = x.w + 2;
    Vec p(static_cast<std::size_t>(x.c) * ph * pw, 0.0);
    for (int c = 0; c < x.c; ++c) {
      const double* src = x.plane(c);
      double* dst = p.data() + static_cast<std::size_t>(c) * ph * pw;
      for (int y = 0; y < x.h; ++y) {
        double* row = dst + static_cast<std::size_t>(y + 1) * pw + 1;
        const double* srow = src + static_cast<std::size_t>(y) * x.w;
        for (int xx = 0; xx < x.w; ++xx) row[xx] = srow[xx];
      }
    }
    return p;
  }

  Tensor3 forward(const Tensor3& x) const {
    const int oh = out_h(x.h), ow = out_h(x.w);
    Tensor3 out(out_ch, oh, ow);
    const Vec pad = padded(x);
    const int ph = x.h + 2, pw = x.w + 2;
    for (int co = 0; co < out_ch; ++co) {
      double* op = out.plane(co);
      for (int i = 0; i < oh * ow; ++i) op[i] = b[co];
      for (int ci = 0; ci < in_ch; ++ci) {
        const double* ip = pad.data() + static_cast<std::size_t>(ci) * ph * pw;
        const double* kw = w.data() + (static_cast<std::size_t>(co) * in_ch + ci) * 9;
        for (int ky = 0; ky < 3; ++ky) {
          for (int kx = 0; kx < 3; ++kx) {
            const double kv = kw[ky * 3 + kx];
            for (int y = 0; y < oh; ++y) {
              const double* irow = ip + static_cast<std::size_t>(y * stride + ky) * pw + kx;
              double* orow = op + static_cast<std::size_t>(y) * ow;
              if (stride == 1) {
                for (int xx = 0; xx < ow; ++xx) orow[xx] += kv * irow[xx];
              } else {
                for (int xx = 0; xx < ow; ++xx) orow[xx] += kv * irow[xx * stride];
              }
            }
          }
        }
      }
    }
    return out;
  }

  // Gradient w.r.t. the input given d(output).
  Tensor3 backward_input(const Tensor3& dy, int in_h, int in_w) const {
    const int ph = in_h + 2, pw = in_w + 2;
    Vec pad(static_cast<std::size_t>(in_ch) * ph * pw, 0.0);
    const int oh = dy.h, ow = dy.w;
    for (int co = 0; co < out_ch; ++co) {
      const double* dp = dy.plane(co);
      for (int ci = 0; ci < in_ch; ++ci) {
        double* ip = pad.data() + static_cast<std::size_t>(ci) * ph * pw;
        const double* kw = w.data() + (static_cast<std::size_t>(co) * in_ch + ci) * 9;
        for (int ky = 0; ky < 3; ++ky) {
          for (int kx = 0; kx < 3; ++kx) {
            const double kv = kw[ky * 3 + kx];
            for (int y = 0; y < oh; ++y) {
              double* irow = ip + static_cast<std::size_t>(y * stride + ky) * pw + kx;
              const double* drow = dp + static_cast<std::size_t>(y) * ow;
              if (stride == 1) {
                for (int xx = 0; xx < ow; ++xx) irow[xx] += kv * drow[xx];
              } else {
                for (int xx = 0; xx < ow; ++xx) irow[xx * stride] += kv * drow[xx];
              }
            }
          }
        }
      }
    }
    Tensor3 dx(in_ch, in_h, in_w);
    for (int c = 0; c < in_ch; ++c) {
      const double* src = pad.data() + static_cast<std::size_t>(c) * ph * pw;
      double* dst = dx.plane(c);
      for (int y = 0; y < in_h; ++y) {
        const double* row = src + static_cast<std::size_t>(y + 1) * pw + 1;
        double* drow = dst + static_cast<std::size_t>(y) * in_w;
        for (int xx = 0; xx < in_w; ++xx) drow[xx] = row[xx];
      }
    }
    return dx;
  }

  // Accumulates parameter gradients given the layer input and d(output).
  void backward_params(const Tensor3& x, const Tensor3& dy, Vec& dw, Vec& db) const {
    const Vec pad = padded(x);
    const int ph = x.h + 2, pw = x.w + 2;
    const int oh = dy.h, ow = dy.w;
    for (int co = 0; co < out_ch; ++co) {
      const double* dp = dy.plane(co);
      double bsum = 0.0;
      for (int i = 0; i < oh * ow; ++i) bsum += dp[i];
      db[co] += bsum;
      for (int ci = 0; ci < in_ch; ++ci) {
        const double* ip = pad.data() + static_cast<std::size_t>(ci) * ph * pw;
        double* kw = dw.data() + (static_cast<std::size_t>(co) * in_ch + ci) * 9;
        for (int ky = 0; ky < 3; ++ky) {
          for (int kx = 0; kx < 3; ++kx) {
            double acc = 0.0;
            for (int y = 0; y < oh; ++y) {
              const double* irow = ip + static_cast<std::size_t>(y * stride + ky) * pw + kx;
              const double* drow = dp + static_cast<std::size_t>(y) * ow;
              if (stride == 1) {
                for (int xx = 0; xx < ow; ++xx) acc += irow[xx] * drow[xx];
              } else {
                for (int xx = 0; xx < ow; ++xx) acc += irow[xx * stride] * drow[xx];
              }
            }
            kw[ky * 3 + kx] += acc;
          }
        }
      }
    }
  }
};

struct Dense {
  int in_dim = 0, out_dim = 0;
  Vec w;  // [out_dim][in_dim]
  Vec b;  // [out_dim]

  Dense() = default;
  Dense(int i, int o) : in_dim(i), out_dim(o), w(static_cast<std::size_t>(i) * o, 0.0), b(o, 0.0) {}

  void init(Rng& rng, double gain) {
    const double std = gain / std::sqrt(static_cast<double>(in_dim));
    for (auto& x : w) x = rng.normal() * std;
    for (auto& x : b) x = 0.0;
  }

  Vec forward(const Vec& x) const {
    Vec y(out_dim);
    for (int o = 0; o < out_dim; ++o) {
      const double* row = w.data() + static_cast<std::size_t>(o) * in_dim;
      double acc = b[o];
      for (int i = 0; i < in_dim; ++i) acc += row[i] * x[i];
      y[o] = acc;
    }
    return y;
  }

  Vec backward_input(const Vec& dy) const {
    Vec dx(in_dim, 0.0);
    for (int o = 0; o < out_dim; ++o) {
      const double* row = w.data() + static_cast<std::size_t>(o) * in_dim;
      const double g = dy[o];
      for (int i = 0; i < in_dim; ++i) dx[i] += row[i] * g;
    }
    return dx;
  }

  void backward_params(const Vec& x, const Vec& dy, Vec& dw, Vec& db) const {
    for (int o = 0; o < out_dim; ++o) {
      double* row = dw.data() + static_cast<std::size_t>(o) * in_dim;
      const double g = dy[o];
      for (int i = 0; i < in_dim; ++i) row[i] += g * x[i];
      db[o] += g;
    }
  }
};

// A stack of stride-2 conv blocks with leaky-ReLU between them; the shared
// trunk shape of the encoder, embedder and attribute extractor.
struct ConvStack {
  std::vector<Conv3x3> layers;
  double slope = 0.2;

  struct Cache {
    std::vector<Tensor3> pre;   // conv outputs before activation
    std::vector<Tensor3> post;  // after activation (post.back() is the trunk output)
  };

  Tensor3 forward(const Tensor3& x, Cache* cache = nullptr) const {
    Tensor3 cur = x;
    for (const auto& layer : layers) {
      Tensor3 pre = layer.forward(cur);
      if (cache) cache->pre.push_back(pre);
      leaky_inplace(pre, slope);
      if (cache) cache->post.push_back(pre);
      cur = std::move(pre);
    }
    return cur;
  }

  // dlast = gradient at the trunk output (post-activation). Appends grads in
  // layer order to dw/db; returns the gradient at the stack input.
  Tensor3 backward(const Tensor3& input, const Cache& cache, Tensor3 dlast,
                   std::vector<Vec>* dw, std::vector<Vec>* db) const {
    for (int li = static_cast<int>(layers.size()) - 1; li >= 0; --li) {
      const Tensor3& pre = cache.pre[li];
      for (std::size_t i = 0; i < dlast.v.size(); ++i) dlast.v[i] *= leaky_grad(pre.v[i], slope);
      const Tensor3& in = li == 0 ? input : cache.post[li - 1];
      if (dw) layers[li].backward_params(in, dlast, (*dw)[li], (*db)[li]);
      dlast = layers[li].backward_input(dlast, in.h, in.w);
    }
    return dlast;
  }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
  }
};

struct AdamState {
  Vec m, v;
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

// One Adam update; step count is owned by the caller (shared across all
// parameter groups of a model).
inline void adam_step(Vec& p, const Vec& g, AdamState& st, int t, double lr,
                      double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
  const double c1 = 1.0 - std::pow(beta1, t);
  const double c2 = 1.0 - std::pow(beta2, t);
  for (std::size_t i = 0; i < p.size(); ++i) {
    st.m[i] = beta1 * st.m[i] + (1.0 - beta1) * g[i];
    st.v[i] = beta2 * st.v[i] + (1.0 - beta2) * g[i] * g[i];
    p[i] -= lr * (st.m[i] / c1) / (std::sqrt(st.v[i] / c2) + eps);
  }
}

// loss = -log softmax(logits)[label]; writes dlogits.
inline double softmax_ce(const Vec& logits, int label, Vec& dlogits) {
  double mx = logits[0];
  for (double z : logits) mx = std::max(mx, z);
  double sum = 0.0;
  dlogits.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    dlogits[i] = std::exp(logits[i] - mx);
    sum += dlogits[i];
  }
  for (auto& d : dlogits) d /= sum;
  const double loss = -std::log(std::max(dlogits[label], 1e-300));
  dlogits[label] -= 1.0;
  return loss;
}

// Binary cross-entropy on a single logit with target y in {0,1}.
inline double bce_logit(double z, double y, double& dz) {
  const double s = 1.0 / (1.0 + std::exp(-z));
  dz = s - y;
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

}  // namespace stylemix
