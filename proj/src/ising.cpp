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

#include "boltzgen/ising.hpp"

#include <cmath>
#include <cstring>
#include <set>
#include <string>

#include "boltzgen/errors.hpp"
#include "boltzgen/rng.hpp"

namespace boltzgen {

namespace {

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

IsingModel::IsingModel(Eigen::MatrixXd couplings, Eigen::VectorXd biases)
    : couplings_(std::move(couplings)), biases_(std::move(biases)) {
  const Eigen::Index n = biases_.size();
  if (n == 0) throw ParameterError("ising: model must have at least one spin");
  if (couplings_.rows() != n || couplings_.cols() != n) {
    throw DimensionError("ising: coupling matrix is " +
                         std::to_string(couplings_.rows()) + "x" +
                         std::to_string(couplings_.cols()) + " but bias has length " +
                         std::to_string(n));
  }
  if (!couplings_.allFinite() || !biases_.allFinite()) {
    throw ParameterError("ising: couplings and biases must be finite");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (couplings_(i, i) != 0.0) {
      throw ParameterError("ising: nonzero diagonal coupling at index " + std::to_string(i));
    }
    for (Eigen::Index k = i + 1; k < n; ++k) {
      if (couplings_(i, k) != couplings_(k, i)) {
        throw ParameterError("ising: coupling matrix is not symmetric at (" +
                             std::to_string(i) + ", " + std::to_string(k) + ")");
      }
    }
  }
}

IsingModel IsingModel::zeros(std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  return IsingModel(Eigen::MatrixXd::Zero(m, m), Eigen::VectorXd::Zero(m));
}

std::uint64_t IsingModel::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const std::uint64_t n = size();
  h = fnv1a(&n, sizeof n, h);
  h = fnv1a(couplings_.data(), sizeof(double) * couplings_.size(), h);
  h = fnv1a(biases_.data(), sizeof(double) * biases_.size(), h);
  return h;
}

double energy(const IsingModel& model, SpinView spins) {
  const std::size_t n = model.size();
  if (spins.size() != n) {
    throw DimensionError("ising: spin vector has length " + std::to_string(spins.size()) +
                         ", model has " + std::to_string(n) + " spins");
  }
  const Eigen::MatrixXd& j = model.couplings();
  const Eigen::VectorXd& b = model.biases();
  // J is symmetric, so column i doubles as row i and is contiguous.
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* col = j.col(static_cast<Eigen::Index>(i)).data();
    double field = 0.0;
    for (std::size_t k = 0; k < n; ++k) field += col[k] * spins[k];
    acc += spins[i] * (0.5 * field + b[static_cast<Eigen::Index>(i)]);
  }
  return -acc;
}

Eigen::VectorXd energies(const IsingModel& model, const SpinMatrix& samples) {
  if (static_cast<std::size_t>(samples.cols()) != model.size()) {
    throw DimensionError("ising: batch has " + std::to_string(samples.cols()) +
                         " spins per sample, model has " + std::to_string(model.size()));
  }
  Eigen::VectorXd out(samples.rows());
  for (Eigen::Index r = 0; r < samples.rows(); ++r) {
    out[r] = energy(model, SpinView(samples.row(r).data(), model.size()));
  }
  return out;
}

IsingModel scale_model(const IsingModel& model, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw ParameterError("ising: scale factor must be positive and finite");
  }
  return IsingModel(model.couplings() * factor, model.biases() * factor);
}

ClampedModel clamp_spins(const IsingModel& model, const std::map<std::size_t, int>& clamped) {
  const std::size_t n = model.size();
  for (const auto& [index, value] : clamped) {
    if (index >= n) {
      throw ParameterError("ising: clamped index " + std::to_string(index) +
                           " is out of range for " + std::to_string(n) + " spins");
    }
    if (value != -1 && value != 1) {
      throw ParameterError("ising: clamped value at index " + std::to_string(index) +
                           " must be -1 or +1");
    }
  }
  if (clamped.size() >= n) throw ParameterError("ising: cannot clamp every spin");

  const Eigen::MatrixXd& j = model.couplings();
  const Eigen::VectorXd& b = model.biases();
  std::vector<std::size_t> free;
  free.reserve(n - clamped.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!clamped.contains(i)) free.push_back(i);
  }

  const auto m = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd jr(m, m);
  Eigen::VectorXd br(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const auto fa = static_cast<Eigen::Index>(free[a]);
    for (Eigen::Index c = 0; c < m; ++c) jr(a, c) = j(fa, static_cast<Eigen::Index>(free[c]));
    double field = b[fa];
    for (const auto& [k, v] : clamped) field += j(fa, static_cast<Eigen::Index>(k)) * v;
    br[a] = field;
  }

  double offset = 0.0;
  for (const auto& [k, vk] : clamped) {
    const auto ki = static_cast<Eigen::Index>(k);
    double pair = 0.0;
    for (const auto& [l, vl] : clamped) pair += j(ki, static_cast<Eigen::Index>(l)) * vl;
    offset -= vk * (0.5 * pair + b[ki]);
  }
  return ClampedModel{IsingModel(std::move(jr), std::move(br)), offset, std::move(free)};
}

std::vector<std::int8_t> merge_clamped(const ClampedModel& reduced,
                                       const std::map<std::size_t, int>& clamped,
                                       SpinView free_spins) {
  if (free_spins.size() != reduced.free_indices.size()) {
    throw DimensionError("ising: free spin vector has the wrong length");
  }
  std::vector<std::int8_t> full(reduced.free_indices.size() + clamped.size(), 0);
  for (const auto& [k, v] : clamped) full.at(k) = static_cast<std::int8_t>(v);
  for (std::size_t a = 0; a < free_spins.size(); ++a) full.at(reduced.free_indices[a]) = free_spins[a];
  return full;
}

void SpinBatch::attach_energies(const IsingModel& model) {
  energies = boltzgen::energies(model, samples);
  energy_model_fingerprint = model.fingerprint();
}

void validate_spins(const SpinMatrix& samples) {
  for (Eigen::Index r = 0; r < samples.rows(); ++r) {
    for (Eigen::Index c = 0; c < samples.cols(); ++c) {
      const int v = samples(r, c);
      if (v != -1 && v != 1) {
        throw ParameterError("ising: spin value " + std::to_string(v) + " at row " +
                             std::to_string(r) + ", column " + std::to_string(c) +
                             " is not -1 or +1");
      }
    }
  }
}

std::map<std::size_t, int> make_clamp_map(std::span<const std::pair<std::size_t, int>> pairs) {
  std::map<std::size_t, int> out;
  for (const auto& [index, value] : pairs) {
    if (!out.emplace(index, value).second) {
      throw ParameterError("ising: spin " + std::to_string(index) + " is clamped twice");
    }
  }
  return out;
}

IsingModel random_ternary_model(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ParameterError("ising: model size must be positive");
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(ni, ni);
  Engine rng = make_stream(seed, 0, stream_tag::kBench);
  std::uniform_int_distribution<int> pick(-1, 1);
  for (Eigen::Index i = 0; i < ni; ++i) {
    for (Eigen::Index k = i + 1; k < ni; ++k) j(i, k) = j(k, i) = pick(rng);
  }
  return IsingModel(std::move(j), Eigen::VectorXd::Zero(ni));
}

}  // namespace boltzgen
