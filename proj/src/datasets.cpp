// Copyright 2026 The boltzgen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "boltzgen/datasets.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <zlib.h>

#include "boltzgen/errors.hpp"
#include "boltzgen/rng.hpp"

namespace boltzgen {

std::string to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "train";
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "validation") return Split::validation;
  if (name == "test") return Split::test;
  throw ParameterError("datasets: unknown split '" + name + "'");
}

double SpinDataset::total_weight() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

std::vector<double> SpinDataset::weights_as_double() const {
  return {weights.begin(), weights.end()};
}

SpinDataset SpinDataset::subset(std::span<const std::size_t> rows) const {
  SpinDataset out;
  out.split = split;
  out.vectors.resize(static_cast<Eigen::Index>(rows.size()), vectors.cols());
  out.weights.reserve(rows.size());
  if (labels) out.labels.emplace();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= size()) throw ParameterError("datasets: subset row out of range");
    out.vectors.row(static_cast<Eigen::Index>(k)) = vectors.row(static_cast<Eigen::Index>(rows[k]));
    out.weights.push_back(weights[rows[k]]);
    if (labels) out.labels->push_back((*labels)[rows[k]]);
  }
  return out;
}

SpinDataset SpinDataset::head(std::size_t count) const {
  std::vector<std::size_t> rows(std::min(count, size()));
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return subset(rows);
}

SpinDataset SpinDataset::shuffled(std::uint64_t seed) const {
  std::vector<std::size_t> rows(size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  Engine rng = make_stream(seed, 0, stream_tag::kShuffle);
  for (std::size_t i = rows.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(rows[i - 1], rows[pick(rng)]);
  }
  return subset(rows);
}

void SpinDataset::validate() const {
  if (size() == 0) throw ParameterError("datasets: empty dataset");
  validate_spins(vectors);
  if (weights.size() != size()) throw DimensionError("datasets: one weight per vector required");
  for (auto w : weights) {
    if (w == 0) throw ParameterError("datasets: weights must be at least 1");
  }
  if (labels && labels->size() != size()) throw DimensionError("datasets: one label per vector required");
}

SpinDataset bas_dataset() {
  constexpr std::size_t n = kBasSide * kBasSide;
  std::vector<std::array<std::int8_t, n>> patterns;
  auto add = [&](const std::array<std::int8_t, n>& p) {
    for (const auto& q : patterns) {
      if (q == p) return false;
    }
    patterns.push_back(p);
    return true;
  };
  std::vector<std::uint32_t> weights;
  // Bars: row r is constant, +1 when bit r of the mask is set.
  for (unsigned mask = 0; mask < (1u << kBasSide); ++mask) {
    std::array<std::int8_t, n> p{};
    for (std::size_t r = 0; r < kBasSide; ++r) {
      for (std::size_t c = 0; c < kBasSide; ++c) p[r * kBasSide + c] = (mask >> r & 1u) ? 1 : -1;
    }
    add(p);
    weights.push_back(1);
  }
  // Stripes: column c constant; the uniform bitmaps are already present.
  for (unsigned mask = 0; mask < (1u << kBasSide); ++mask) {
    std::array<std::int8_t, n> p{};
    for (std::size_t r = 0; r < kBasSide; ++r) {
      for (std::size_t c = 0; c < kBasSide; ++c) p[r * kBasSide + c] = (mask >> c & 1u) ? 1 : -1;
    }
    if (add(p)) {
      weights.push_back(1);
    } else {
      const auto it = std::find(patterns.begin(), patterns.end(), p);
      ++weights[static_cast<std::size_t>(it - patterns.begin())];
    }
  }
  SpinDataset out;
  out.vectors.resize(static_cast<Eigen::Index>(patterns.size()), n);
  for (std::size_t k = 0; k < patterns.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      out.vectors(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = patterns[k][i];
    }
  }
  out.weights = std::move(weights);
  return out;
}

double dataset_entropy_bound(const SpinDataset& data) {
  const double total = data.total_weight();
  double s = 0.0;
  for (auto w : data.weights) {
    const double p = w / total;
    s += p * std::log(p);
  }
  return s;
}

std::vector<std::int8_t> label_block(int digit) {
  if (digit < 0 || digit >= static_cast<int>(kMnistLabels)) {
    throw ParameterError("datasets: digit must be in 0..9");
  }
  std::vector<std::int8_t> block(kMnistLabels, -1);
  block[static_cast<std::size_t>(digit)] = 1;
  return block;
}

namespace {

class GzFile {
 public:
  GzFile(const std::filesystem::path& path, std::string what) : what_(std::move(what)) {
    handle_ = gzopen(path.string().c_str(), "rb");
    if (!handle_) throw FormatError("datasets: cannot open " + what_ + " file " + path.string());
  }
  ~GzFile() {
    if (handle_) gzclose(handle_);
  }
  GzFile(const GzFile&) = delete;
  GzFile& operator=(const GzFile&) = delete;

  void read(void* buffer, std::size_t bytes, const std::string& field) {
    const int got = gzread(handle_, buffer, static_cast<unsigned>(bytes));
    if (got < 0 || static_cast<std::size_t>(got) != bytes) {
      throw FormatError("datasets: " + what_ + " file truncated while reading " + field);
    }
  }

  std::uint32_t read_u32(const std::string& field) {
    unsigned char b[4];
    read(b, 4, field);
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
  }

  bool at_end() {
    unsigned char c;
    return gzread(handle_, &c, 1) == 0;
  }

 private:
  gzFile handle_ = nullptr;
  std::string what_;
};

}  // namespace

SpinDataset load_mnist(const std::filesystem::path& images, const std::filesystem::path& labels,
                       const MnistOptions& options) {
  if (!(options.threshold >= 0.0 && options.threshold <= 1.0)) {
    throw ParameterError("datasets: threshold must lie in [0, 1]");
  }
  GzFile img(images, "images");
  GzFile lab(labels, "labels");
  if (const auto magic = img.read_u32("images magic"); magic != 0x803) {
    throw FormatError("datasets: images magic number is " + std::to_string(magic) + ", expected 2051");
  }
  if (const auto magic = lab.read_u32("labels magic"); magic != 0x801) {
    throw FormatError("datasets: labels magic number is " + std::to_string(magic) + ", expected 2049");
  }
  const std::size_t count = img.read_u32("images count");
  const std::size_t rows = img.read_u32("images rows");
  const std::size_t cols = img.read_u32("images cols");
  if (rows * cols != kMnistPixels) {
    throw FormatError("datasets: images rows x cols is " + std::to_string(rows) + "x" + std::to_string(cols) +
                      ", expected 28x28");
  }
  const std::size_t label_count = lab.read_u32("labels count");
  if (label_count != count) {
    throw FormatError("datasets: labels count " + std::to_string(label_count) + " does not match images count " +
                      std::to_string(count));
  }

  std::vector<unsigned char> pixels(count * kMnistPixels);
  std::vector<unsigned char> digits(count);
  if (count > 0) {
    img.read(pixels.data(), pixels.size(), "images pixels");
    lab.read(digits.data(), digits.size(), "labels data");
  }
  if (!img.at_end()) throw FormatError("datasets: images file has trailing bytes after the declared count");
  if (!lab.at_end()) throw FormatError("datasets: labels file has trailing bytes after the declared count");

  std::size_t begin = 0;
  std::size_t end = count;
  if (options.split == Split::train) {
    end = std::min(count, options.train_count);
  } else if (options.split == Split::validation) {
    begin = std::min(count, options.train_count);
  }

  SpinDataset out;
  out.split = options.split;
  out.vectors.resize(static_cast<Eigen::Index>(end - begin), kMnistSpins);
  out.weights.assign(end - begin, 1);
  out.labels.emplace();
  for (std::size_t k = begin; k < end; ++k) {
    const auto row = static_cast<Eigen::Index>(k - begin);
    if (digits[k] > 9) {
      throw FormatError("datasets: labels data holds " + std::to_string(digits[k]) + " at record " +
                        std::to_string(k));
    }
    for (std::size_t p = 0; p < kMnistPixels; ++p) {
      const double v = pixels[k * kMnistPixels + p] / 255.0;
      out.vectors(row, static_cast<Eigen::Index>(p)) = v >= options.threshold ? 1 : -1;
    }
    for (std::size_t c = 0; c < kMnistLabels; ++c) {
      out.vectors(row, static_cast<Eigen::Index>(kMnistPixels + c)) = c == digits[k] ? 1 : -1;
    }
    out.labels->push_back(digits[k]);
  }
  return out;
}

}  // namespace boltzgen
