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
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace boltzgen {

// One spin configuration per row, entries in {-1, +1}.
using SpinMatrix =
    Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using SpinView = std::span<const std::int8_t>;

/// Fully connected Ising model with energy E(s) = -1/2 s^T J s - b^T s.
///
/// The coupling matrix is dense, symmetric, has a zero diagonal and only
/// finite entries. These invariants are checked on construction; asymmetric
/// input is rejected rather than symmetrized. Instances are immutable.
class IsingModel {
 public:
  IsingModel(Eigen::MatrixXd couplings, Eigen::VectorXd biases);

  static IsingModel zeros(std::size_t n);

  std::size_t size() const { return static_cast<std::size_t>(biases_.size()); }
  const Eigen::MatrixXd& couplings() const { return couplings_; }
  const Eigen::VectorXd& biases() const { return biases_; }

  /// 64-bit FNV-1a hash over the dimension and raw parameter bytes.
  std::uint64_t fingerprint() const;

  friend bool operator==(const IsingModel& a, const IsingModel& b) {
    return a.couplings_ == b.couplings_ && a.biases_ == b.biases_;
  }

 private:
  Eigen::MatrixXd couplings_;
  Eigen::VectorXd biases_;
};

/// Energy of a single configuration. Throws DimensionError on size mismatch.
double energy(const IsingModel& model, SpinView spins);

/// Per-row energies; each entry is bit-identical to energy() on that row.
Eigen::VectorXd energies(const IsingModel& model, const SpinMatrix& samples);

/// Multiplies couplings and biases by `factor`, which is equivalent to
/// multiplying the inverse temperature of the Boltzmann distribution.
IsingModel scale_model(const IsingModel& model, double factor);

struct ClampedModel {
  IsingModel model;                       // over the free spins only
  double offset = 0.0;                    // energy of the clamped block
  std::vector<std::size_t> free_indices;  // full-model index of each free spin
};

/// Fixes the spins in `clamped` (index -> +-1) and folds their couplings into
/// effective biases on the remaining spins, so that
/// energy(result.model, free) + result.offset == energy(full, merged).
/// Builds a clamp map from (index, value) pairs; duplicate indices are an error.
std::map<std::size_t, int> make_clamp_map(std::span<const std::pair<std::size_t, int>> pairs);
inline std::map<std::size_t, int> make_clamp_map(std::initializer_list<std::pair<std::size_t, int>> pairs) {
  return make_clamp_map(std::span<const std::pair<std::size_t, int>>(pairs.begin(), pairs.size()));
}

ClampedModel clamp_spins(const IsingModel& model,
                         const std::map<std::size_t, int>& clamped);

/// Rebuilds a full configuration from the free spins of a clamped model.
std::vector<std::int8_t> merge_clamped(const ClampedModel& reduced,
                                       const std::map<std::size_t, int>& clamped,
                                       SpinView free_spins);

/// A set of sampled configurations over one model.
struct SpinBatch {
  SpinMatrix samples;
  // Energies under `energy_model_fingerprint`, when recorded.
  std::optional<Eigen::VectorXd> energies;
  std::uint64_t energy_model_fingerprint = 0;
  // Inverse temperature the batch is meant to represent, when known.
  std::optional<double> beta;
  std::string source;

  std::size_t size() const { return static_cast<std::size_t>(samples.rows()); }
  std::size_t dimension() const { return static_cast<std::size_t>(samples.cols()); }
  SpinView row(std::size_t i) const {
    return {samples.row(static_cast<Eigen::Index>(i)).data(), dimension()};
  }

  /// Fills `energies` under `model` and records its fingerprint.
  void attach_energies(const IsingModel& model);
};

/// Throws ParameterError unless every entry is -1 or +1.
void validate_spins(const SpinMatrix& samples);

/// Seeded benchmark instance: every off-diagonal coupling pair drawn
/// uniformly from {-1, 0, 1}, zero biases.
IsingModel random_ternary_model(std::size_t n, std::uint64_t seed);

}  // namespace boltzgen
