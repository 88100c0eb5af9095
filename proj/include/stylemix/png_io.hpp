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

// Minimal 8-bit RGB PNG writer/reader over zlib. The writer emits filter-0
// scanlines only and the reader accepts exactly that subset, which is all the
// pipeline produces. Output bytes are deterministic for a given image.

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stylemix/tensor.hpp"

namespace stylemix {

inline std::uint8_t quantize_pixel(double x) {
  const double v = x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x);
  return static_cast<std::uint8_t>(v * 255.0 + 0.5);
}

namespace detail {

inline void push_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline void push_chunk(std::vector<std::uint8_t>& out, const char type[4],
                       const std::vector<std::uint8_t>& data) {
  push_u32_be(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const uLong crc = crc32(crc32(0L, Z_NULL, 0), out.data() + crc_start,
                          static_cast<uInt>(out.size() - crc_start));
  push_u32_be(out, static_cast<std::uint32_t>(crc));
}

inline std::uint32_t read_u32_be(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_png(const Image& img) {
  if (img.c != 3) throw std::invalid_argument("encode_png: expected 3 channels");
  const int h = img.h, w = img.w;
  std::vector<std::uint8_t> raw(static_cast<std::size_t>(h) * (1 + 3 * w));
  std::size_t pos = 0;
  for (int y = 0; y < h; ++y) {
    raw[pos++] = 0;  // filter type 0
    for (int x = 0; x < w; ++x) {
      raw[pos++] = quantize_pixel(img.at(0, y, x));
      raw[pos++] = quantize_pixel(img.at(1, y, x));
      raw[pos++] = quantize_pixel(img.at(2, y, x));
    }
  }
  uLongf comp_len = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> comp(comp_len);
  if (compress2(comp.data(), &comp_len, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw std::runtime_error("encode_png: deflate failed");
  }
  comp.resize(comp_len);

  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<std::uint8_t> ihdr;
  detail::push_u32_be(ihdr, static_cast<std::uint32_t>(w));
  detail::push_u32_be(ihdr, static_cast<std::uint32_t>(h));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(2);  // color type RGB
  ihdr.push_back(0);  // compression
  ihdr.push_back(0);  // filter
  ihdr.push_back(0);  // interlace
  detail::push_chunk(out, "IHDR", ihdr);
  detail::push_chunk(out, "IDAT", comp);
  detail::push_chunk(out, "IEND", {});
  return out;
}

inline void write_png(const std::string& path, const Image& img) {
  const auto bytes = encode_png(img);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_png: cannot open " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

// Reads PNGs produced by encode_png (8-bit RGB, filter 0). Pixel values map
// back to [0,1] as v/255.
inline Image decode_png(const std::vector<std::uint8_t>& bytes) {
  static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() < 8 || std::memcmp(bytes.data(), sig, 8) != 0) {
    throw std::runtime_error("decode_png: not a PNG");
  }
  std::size_t pos = 8;
  int w = 0, h = 0;
  std::vector<std::uint8_t> idat;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t len = detail::read_u32_be(bytes.data() + pos);
    const std::string type(bytes.begin() + pos + 4, bytes.begin() + pos + 8);
    const std::uint8_t* data = bytes.data() + pos + 8;
    if (pos + 12 + len > bytes.size()) throw std::runtime_error("decode_png: truncated chunk");
    if (type == "IHDR") {
      w = static_cast<int>(detail::read_u32_be(data));
      h = static_cast<int>(detail::read_u32_be(data + 4));
      if (data[8] != 8 || data[9] != 2) throw std::runtime_error("decode_png: unsupported format");
    } else if (type == "IDAT") {
      idat.insert(idat.end(), data, data + len);
    } else if (type == "IEND") {
      break;
    }
    pos += 12 + len;
  }
  if (w <= 0 || h <= 0) throw std::runtime_error("decode_png: missing IHDR");
  const std::size_t raw_len = static_cast<std::size_t>(h) * (1 + 3 * w);
  std::vector<std::uint8_t> raw(raw_len);
  uLongf dest_len = static_cast<uLongf>(raw_len);
  if (uncompress(raw.data(), &dest_len, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
      dest_len != raw_len) {
    throw std::runtime_error("decode_png: inflate failed");
  }
  Image img(3, h, w);
  std::size_t rp = 0;
  for (int y = 0; y < h; ++y) {
    if (raw[rp++] != 0) throw std::runtime_error("decode_png: unsupported filter");
    for (int x = 0; x < w; ++x) {
      img.at(0, y, x) = raw[rp++] / 255.0;
      img.at(1, y, x) = raw[rp++] / 255.0;
      img.at(2, y, x) = raw[rp++] / 255.0;
    }
  }
  return img;
}

inline Image read_png(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_png: cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return decode_png(bytes);
}

}  // namespace stylemix
