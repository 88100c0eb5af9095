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

#include <cmath>
#include <cstddef>
#include <vector>

namespace stylemix {

using Vec = std::vector<double>;

// Planar channel-first tensor (c planes of h*w doubles). Used for both
// feature maps and RGB images; images are c==3 with pixels in [0,1].
struct Tensor3 {
  int c = 0, h = 0, w = 0;
  Vec v;

  Tensor3() = default;
  Tensor3(int c_, int h_, int w_) : c(c_), h(h_), w(w_), v(static_cast<std::size_t>(c_) * h_ * w_, 0.0) {}

  double& at(int ch, int y, int x) { return v[(static_cast<std::size_t>(ch) * h + y) * w + x]; }
  double at(int ch, int y, int x) const { return v[(static_cast<std::size_t>(ch) * h + y) * w + x]; }

  double* plane(int ch) { return v.data() + static_cast<std::size_t>(ch) * h * w; }
  const double* plane(int ch) const { return v.data() + static_cast<std::size_t>(ch) * h * w; }

  std::size_t size() const { return v.size(); }
  bool same_shape(const Tensor3& o) const { return c == o.c && h == o.h && w == o.w; }
};

using Image = Tensor3;

inline bool all_finite(const Vec& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

inline bool all_finite(const Tensor3& t) { return all_finite(t.v); }

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double l2_distance(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline double mean_squared_error(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return a.empty() ? 0.0 : s / static_cast<double>(a.size());
}

}  // namespace stylemix
