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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "boltzgen/ising.hpp"

namespace boltzgen {

enum class Split { train, validation, test };

std::string to_string(Split split);
Split parse_split(const std::string& name);

/// Weighted, optionally labeled set of spin vectors.
struct SpinDataset {
  SpinMatrix vectors;                           // one vector per row
  std::vector<std::uint32_t> weights;           // multiplicities, all >= 1
  std::optional<std::vector<std::uint8_t>> labels;
  Split split = Split::train;

  std::size_t size() const { return static_cast<std::size_t>(vectors.rows()); }
  std::size_t dimension() const { return static_cast<std::size_t>(vectors.cols()); }
  double total_weight() const;
  std::vector<double> weights_as_double() const;

  /// Rows in the given order; labels and weights follow.
  SpinDataset subset(std::span<const std::size_t> rows) const;
  SpinDataset head(std::size_t count) const;
  /// Seeded Fisher-Yates permutation of the rows.
  SpinDataset shuffled(std::uint64_t seed) const;

  void validate() const;
};

inline constexpr std::size_t kBasSide = 4;

/// The 4x4 bars-and-stripes family: every bitmap whose rows are all constant
/// or whose columns are all constant, unrolled row-major. The two uniform
/// bitmaps belong to both families and carry weight 2; 30 vectors, weight 32.
SpinDataset bas_dataset();

/// Exact average log-likelihood of the dataset's own empirical distribution,
/// sum_s p(s) ln p(s) with p = weight / total weight.
double dataset_entropy_bound(const SpinDataset& data);

inline constexpr std::size_t kMnistPixels = 784;
inline constexpr std::size_t kMnistLabels = 10;
inline constexpr std::size_t kMnistSpins = kMnistPixels + kMnistLabels;

struct MnistOptions {
  double threshold = 0.3;          // pixel / 255 >= threshold -> +1
  Split split = Split::train;
  std::size_t train_count = 50000;  // train = first train_count, validation = the rest
};

/// Reads IDX image/label files (raw or gzip-compressed) into 794-spin vectors:
/// 784 thresholded pixels followed by a one-hot label block (+1 at the digit,
/// -1 elsewhere). The test split returns every record.
SpinDataset load_mnist(const std::filesystem::path& images, const std::filesystem::path& labels,
                       const MnistOptions& options = {});

/// The one-hot label block for `digit`.
std::vector<std::int8_t> label_block(int digit);

}  // namespace boltzgen
