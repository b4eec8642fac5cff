// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0
#include "amped/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "amped/pnm.hpp"
#include "amped/rng.hpp"
#include "json.hpp"

namespace amped {

namespace {

constexpr int kMargin = 3;
constexpr double kPalette[4] = {0.05, 0.35, 0.65, 0.95};

struct Canvas {
  int h, w;
  std::vector<int> labels;   // region id per pixel, 0 = background
  std::vector<char> stroke;  // stroke pixels are edges by themselves
  MatF image;

  Canvas(int height, int width)
      : h(height), w(width), labels(static_cast<size_t>(height) * width, 0),
        stroke(static_cast<size_t>(height) * width, 0), image(height, width) {}

  size_t idx(int y, int x) const { return static_cast<size_t>(y) * w + x; }
};

void draw_rect(Canvas& c, Rng& rng, int label, float gray) {
  const int max_w = c.w - 2 * kMargin, max_h = c.h - 2 * kMargin;
  const int rw = rng.uniform_int(std::min(6, max_w), std::min(max_w, c.w / 2 + 6));
  const int rh = rng.uniform_int(std::min(6, max_h), std::min(max_h, c.h / 2 + 6));
  const int x0 = rng.uniform_int(kMargin, c.w - kMargin - rw);
  const int y0 = rng.uniform_int(kMargin, c.h - kMargin - rh);
  for (int y = y0; y < y0 + rh; ++y)
    for (int x = x0; x < x0 + rw; ++x) {
      c.labels[c.idx(y, x)] = label;
      c.stroke[c.idx(y, x)] = 0;
      c.image.at(y, x) = gray;
    }
}

void draw_ellipse(Canvas& c, Rng& rng, int label, float gray) {
  const int rx = rng.uniform_int(4, std::max(4, c.w / 4));
  const int ry = rng.uniform_int(4, std::max(4, c.h / 4));
  const int cx = rng.uniform_int(kMargin + rx, c.w - 1 - kMargin - rx);
  const int cy = rng.uniform_int(kMargin + ry, c.h - 1 - kMargin - ry);
  for (int y = cy - ry; y <= cy + ry; ++y)
    for (int x = cx - rx; x <= cx + rx; ++x) {
      const double ny = static_cast<double>(y - cy) / ry;
      const double nx = static_cast<double>(x - cx) / rx;
      if (nx * nx + ny * ny <= 1.0) {
        c.labels[c.idx(y, x)] = label;
        c.stroke[c.idx(y, x)] = 0;
        c.image.at(y, x) = gray;
      }
    }
}

void draw_polyline(Canvas& c, Rng& rng, float gray) {
  const int points = rng.uniform_int(2, 4);
  int py = rng.uniform_int(kMargin, c.h - 1 - kMargin);
  int px = rng.uniform_int(kMargin, c.w - 1 - kMargin);
  for (int s = 1; s < points; ++s) {
    const int ny = rng.uniform_int(kMargin, c.h - 1 - kMargin);
    const int nx = rng.uniform_int(kMargin, c.w - 1 - kMargin);
    for (const auto& [y, x] : bresenham(py, px, ny, nx)) {
      c.stroke[c.idx(y, x)] = 1;
      c.image.at(y, x) = gray;
    }
    py = ny;
    px = nx;
  }
}

BinaryMap shift_map(const BinaryMap& m, int dy, int dx) {
  BinaryMap out;
  out.h = m.h;
  out.w = m.w;
  out.on.assign(m.on.size(), 0);
  for (int y = 0; y < m.h; ++y)
    for (int x = 0; x < m.w; ++x) {
      const int sy = y + dy, sx = x + dx;
      if (m.at(y, x) && sy >= 0 && sy < m.h && sx >= 0 && sx < m.w) out.at(sy, sx) = 1;
    }
  return out;
}

}  // namespace

void SynthSpec::validate() const {
  if (width < 16 || height < 16)
    throw std::invalid_argument("synth: image must be at least 16x16");
  if (min_shapes < 1 || max_shapes < min_shapes || max_shapes > 3)
    throw std::invalid_argument("synth: shape count must satisfy 1 <= min <= max <= 3");
  if (noise_sigma < 0 || noise_sigma > 0.2)
    throw std::invalid_argument("synth: noise_sigma outside [0,0.2]");
  if (annotators < 1 || annotators > 2)
    throw std::invalid_argument("synth: annotators must be 1 or 2");
  if (min_contrast < 0.05 || min_contrast > 0.26)
    throw std::invalid_argument("synth: min_contrast outside [0.05,0.26]");
}

std::vector<std::pair<int, int>> bresenham(int y0, int x0, int y1, int x1) {
  std::vector<std::pair<int, int>> px;
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    px.emplace_back(y0, x0);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
  return px;
}

BinaryMap boundary_from_labels(const std::vector<int>& labels, int h, int w) {
  if (labels.size() != static_cast<size_t>(h) * w)
    throw std::invalid_argument("boundary_from_labels: size mismatch");
  BinaryMap b;
  b.h = h;
  b.w = w;
  b.on.assign(labels.size(), 0);
  auto at = [&](int y, int x) { return labels[static_cast<size_t>(y) * w + x]; };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int me = at(y, x);
      const bool edge = (y > 0 && at(y - 1, x) < me) || (y + 1 < h && at(y + 1, x) < me) ||
                        (x > 0 && at(y, x - 1) < me) || (x + 1 < w && at(y, x + 1) < me);
      if (edge) b.at(y, x) = 1;
    }
  return b;
}

SynthSample generate(const SynthSpec& spec, uint64_t seed) {
  spec.validate();
  Rng rng = Rng::derive(seed, 0xda7a);
  Canvas canvas(spec.height, spec.width);

  // Shuffled palette with a small jitter; pairwise separation stays above
  // min_contrast for jitter up to 0.02.
  const double jitter = std::min(0.02, (0.3 - spec.min_contrast) / 2.0);
  std::vector<float> palette;
  for (double base : kPalette)
    palette.push_back(static_cast<float>(base + rng.uniform(-jitter, jitter)));
  std::shuffle(palette.begin(), palette.end(), rng.engine());

  canvas.image.fill(palette[0]);
  const int shapes = rng.uniform_int(spec.min_shapes, spec.max_shapes);
  for (int s = 0; s < shapes; ++s) {
    const float gray = palette[1 + s];
    switch (rng.uniform_int(0, 2)) {
      case 0: draw_rect(canvas, rng, s + 1, gray); break;
      case 1: draw_ellipse(canvas, rng, s + 1, gray); break;
      default: draw_polyline(canvas, rng, gray); break;
    }
  }

  BinaryMap gt = boundary_from_labels(canvas.labels, spec.height, spec.width);
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x)
      if (canvas.stroke[canvas.idx(y, x)]) gt.at(y, x) = 1;

  SynthSample sample;
  sample.gts.push_back(gt);
  if (spec.annotators == 2) {
    const int dy = rng.uniform_int(-1, 1), dx = rng.uniform_int(-1, 1);
    sample.gts.push_back(shift_map(gt, dy, dx));
  }

  sample.image = canvas.image;
  if (spec.noise_sigma > 0)
    for (float& v : sample.image.data)
      v = std::clamp(v + static_cast<float>(rng.normal(0.0, spec.noise_sigma)), 0.0f, 1.0f);
  return sample;
}

namespace {

uint64_t sample_stream(const std::string& split, int index) {
  return (split == "test" ? 1000000ull : 0ull) + static_cast<uint64_t>(index);
}

std::string pad_id(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06d", i);
  return buf;
}

}  // namespace

void write_dataset(const std::string& root, const SynthSpec& spec, int train_count,
                   int test_count, uint64_t seed) {
  spec.validate();
  if (train_count < 0 || test_count < 0 || train_count + test_count == 0)
    throw std::invalid_argument("write_dataset: need a positive sample count");
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(root) / "train");
  fs::create_directories(fs::path(root) / "test");

  for (const auto& [split, count] : {std::pair<std::string, int>{"train", train_count},
                                     {"test", test_count}}) {
    for (int i = 0; i < count; ++i) {
      const SynthSample s = generate(spec, Rng::derive(seed, sample_stream(split, i)).raw());
      const fs::path base = fs::path(root) / split / pad_id(i);
      write_pnm(from_gray_unit(s.image), base.string() + ".pgm");
      for (size_t a = 0; a < s.gts.size(); ++a) {
        PnmImage bm;
        bm.width = s.gts[a].w;
        bm.height = s.gts[a].h;
        bm.maxval = 1;
        bm.bitmap = true;
        bm.data.assign(s.gts[a].on.begin(), s.gts[a].on.end());
        write_pnm(bm, base.string() + ".gt" + std::to_string(a) + ".pbm");
      }
    }
  }

  nlohmann::json manifest;
  manifest["width"] = spec.width;
  manifest["height"] = spec.height;
  manifest["annotators"] = spec.annotators;
  manifest["noise_sigma"] = spec.noise_sigma;
  manifest["seed"] = seed;
  manifest["splits"] = {{"train", train_count}, {"test", test_count}};
  std::ofstream out(fs::path(root) / "manifest.json");
  out << manifest.dump(2) << "\n";
  if (!out) throw std::runtime_error(root + ": cannot write manifest.json");
}

DatasetSplit read_dataset(const std::string& root, const std::string& split) {
  namespace fs = std::filesystem;
  std::ifstream in(fs::path(root) / "manifest.json");
  if (!in) throw std::runtime_error(root + ": missing manifest.json");
  nlohmann::json manifest;
  in >> manifest;
  if (!manifest["splits"].contains(split))
    throw std::runtime_error(root + ": split not in manifest: " + split);
  const int count = manifest["splits"][split].get<int>();
  const int annotators = manifest["annotators"].get<int>();

  DatasetSplit ds;
  for (int i = 0; i < count; ++i) {
    DatasetEntry e;
    e.id = pad_id(i);
    const fs::path base = fs::path(root) / split / e.id;
    e.image_path = base.string() + ".pgm";
    for (int a = 0; a < annotators; ++a)
      e.gt_paths.push_back(base.string() + ".gt" + std::to_string(a) + ".pbm");
    ds.entries.push_back(std::move(e));
  }
  return ds;
}

LoadedSample load_sample(const DatasetEntry& entry) {
  LoadedSample s;
  s.image = to_gray_unit(read_pnm(entry.image_path));
  for (const std::string& p : entry.gt_paths) {
    const PnmImage img = read_pnm(p);
    if (!img.bitmap) throw std::runtime_error(p + ": annotation must be a bitmap");
    BinaryMap b;
    b.h = img.height;
    b.w = img.width;
    b.on.assign(img.data.begin(), img.data.end());
    s.gt.maps.push_back(std::move(b));
  }
  return s;
}

}  // namespace amped
