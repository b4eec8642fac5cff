// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0
#include "amped/pnm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace amped {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error(path + ": " + what);
}

// Next integer token, skipping whitespace and # comments.
int next_int(std::istream& in, const std::string& path) {
  for (;;) {
    const int c = in.peek();
    if (c == EOF) fail(path, "truncated header");
    if (std::isspace(c)) {
      in.get();
    } else if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else {
      break;
    }
  }
  int v;
  if (!(in >> v)) fail(path, "malformed header integer");
  return v;
}

void check_dims(int w, int h, int maxval, const std::string& path) {
  if (w < 1 || h < 1) fail(path, "non-positive dimensions");
  if (maxval < 1 || maxval > 65535) fail(path, "maxval outside [1,65535]");
}

}  // namespace

PnmImage read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (m0 != 'P' || m1 < '2' || m1 > '6') fail(path, "unsupported magic");
  const int kind = m1 - '0';

  PnmImage img;
  img.width = next_int(in, path);
  img.height = next_int(in, path);
  if (kind == 4) {
    img.bitmap = true;
    img.maxval = 1;
    img.channels = 1;
  } else {
    img.maxval = next_int(in, path);
    img.channels = (kind == 3 || kind == 6) ? 3 : 1;
  }
  check_dims(img.width, img.height, img.maxval, path);
  const size_t samples =
      static_cast<size_t>(img.width) * img.height * img.channels;
  img.data.resize(samples);

  if (kind == 2 || kind == 3) {
    for (size_t i = 0; i < samples; ++i) {
      const int v = next_int(in, path);
      if (v < 0 || v > img.maxval) fail(path, "sample outside [0,maxval]");
      img.data[i] = static_cast<uint16_t>(v);
    }
    return img;
  }

  // One whitespace byte separates header from raster.
  const int sep = in.get();
  if (sep == EOF || !std::isspace(sep)) fail(path, "missing raster separator");

  if (kind == 4) {
    const int row_bytes = (img.width + 7) / 8;
    std::vector<char> row(row_bytes);
    for (int y = 0; y < img.height; ++y) {
      if (!in.read(row.data(), row_bytes)) fail(path, "truncated raster");
      for (int x = 0; x < img.width; ++x) {
        const uint8_t byte = static_cast<uint8_t>(row[x / 8]);
        img.at(y, x) = (byte >> (7 - x % 8)) & 1;
      }
    }
    return img;
  }

  const bool wide = img.maxval > 255;
  const size_t bytes = samples * (wide ? 2 : 1);
  std::vector<char> raw(bytes);
  if (!in.read(raw.data(), static_cast<std::streamsize>(bytes))) fail(path, "truncated raster");
  for (size_t i = 0; i < samples; ++i) {
    uint16_t v;
    if (wide)
      v = static_cast<uint16_t>((static_cast<uint8_t>(raw[2 * i]) << 8) |
                                static_cast<uint8_t>(raw[2 * i + 1]));
    else
      v = static_cast<uint8_t>(raw[i]);
    if (v > img.maxval) fail(path, "sample outside [0,maxval]");
    img.data[i] = v;
  }
  return img;
}

void write_pnm(const PnmImage& img, const std::string& path, bool binary) {
  check_dims(img.width, img.height, img.maxval, path);
  const size_t samples = static_cast<size_t>(img.width) * img.height * img.channels;
  if (img.data.size() != samples) fail(path, "data size does not match dimensions");
  if (img.bitmap && (img.channels != 1 || img.maxval != 1))
    fail(path, "bitmaps must be single-channel with maxval 1");
  if (img.channels != 1 && img.channels != 3) fail(path, "channels must be 1 or 3");
  for (uint16_t v : img.data)
    if (v > img.maxval) fail(path, "sample outside [0,maxval]");

  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for writing");

  if (img.bitmap) {
    out << "P4\n" << img.width << ' ' << img.height << '\n';
    const int row_bytes = (img.width + 7) / 8;
    std::vector<char> row(row_bytes);
    for (int y = 0; y < img.height; ++y) {
      std::fill(row.begin(), row.end(), 0);
      for (int x = 0; x < img.width; ++x)
        if (img.at(y, x)) row[x / 8] |= static_cast<char>(1 << (7 - x % 8));
      out.write(row.data(), row_bytes);
    }
  } else if (binary) {
    out << (img.channels == 3 ? "P6" : "P5") << '\n'
        << img.width << ' ' << img.height << '\n'
        << img.maxval << '\n';
    const bool wide = img.maxval > 255;
    for (uint16_t v : img.data) {
      if (wide) out.put(static_cast<char>(v >> 8));
      out.put(static_cast<char>(v & 0xff));
    }
  } else {
    out << (img.channels == 3 ? "P3" : "P2") << '\n'
        << img.width << ' ' << img.height << '\n'
        << img.maxval << '\n';
    const int per_row = img.width * img.channels;
    size_t i = 0;
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < per_row; ++x) out << img.data[i++] << (x + 1 == per_row ? '\n' : ' ');
    }
  }
  if (!out) fail(path, "write failed");
}

MatF to_gray_unit(const PnmImage& img) {
  MatF m(img.height, img.width);
  const float inv = 1.0f / static_cast<float>(img.maxval);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      if (img.channels == 3) {
        const float r = img.at(y, x, 0) * inv, g = img.at(y, x, 1) * inv,
                    b = img.at(y, x, 2) * inv;
        m.at(y, x) = 0.299f * r + 0.587f * g + 0.114f * b;
      } else {
        m.at(y, x) = img.at(y, x) * inv;
      }
    }
  return m;
}

PnmImage from_gray_unit(const MatF& m, int maxval) {
  PnmImage img;
  img.width = m.cols;
  img.height = m.rows;
  img.maxval = maxval;
  img.data.resize(static_cast<size_t>(m.rows) * m.cols);
  for (int y = 0; y < m.rows; ++y)
    for (int x = 0; x < m.cols; ++x) {
      const float v = std::clamp(m.at(y, x), 0.0f, 1.0f);
      img.at(y, x) = static_cast<uint16_t>(std::lround(v * maxval));
    }
  return img;
}

PnmImage bitmap_from_map(const MatF& m) {
  PnmImage img;
  img.width = m.cols;
  img.height = m.rows;
  img.maxval = 1;
  img.bitmap = true;
  img.data.resize(static_cast<size_t>(m.rows) * m.cols);
  for (int y = 0; y < m.rows; ++y)
    for (int x = 0; x < m.cols; ++x) img.at(y, x) = m.at(y, x) >= 0.5f ? 1 : 0;
  return img;
}

}  // namespace amped
