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
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "boltzgen/ising.hpp"

namespace boltzgen {

// Brute-force ground truth for small models.
//
// State encoding, shared by every module that indexes the 2^n configurations:
// bit k of the index is spin k, with 0 -> -1 and 1 -> +1.

inline constexpr std::size_t kDefaultEnumerationCap = 24;

std::uint64_t encode_state(SpinView spins);
void decode_state(std::uint64_t index, std::span<std::int8_t> out);

struct ExactDistribution {
  IsingModel model;
  double beta = 1.0;
  double log_z = 0.0;
  std::vector<double> log_probs;  // indexed by encode_state

  std::size_t dimension() const { return model.size(); }
};

/// Full Boltzmann distribution of `model` at inverse temperature `beta`.
/// log Z is a max-shifted pairwise-tree logsumexp, so the result is
/// bit-identical for every thread count. Throws CapacityError above `cap`.
ExactDistribution enumerate(const IsingModel& model, double beta,
                            std::size_t cap = kDefaultEnumerationCap);

/// `count` i.i.d. draws; draw i uses stream(seed, i).
SpinBatch exact_sample(const ExactDistribution& dist, std::size_t count, std::uint64_t seed);

struct Moments {
  Eigen::VectorXd mean;         // <s_i>
  Eigen::MatrixXd correlation;  // <s_i s_k>, unit diagonal
};

Moments exact_moments(const ExactDistribution& dist);

/// Counts over the 2^n states.
struct StateHistogram {
  std::size_t dimension = 0;
  std::vector<double> counts;
  double total = 0.0;

  static StateHistogram from_batch(const SpinBatch& batch);
  /// Rows of `vectors` weighted by `weights` (empty means weight 1 each).
  static StateHistogram from_weighted(const SpinMatrix& vectors, std::span<const double> weights);
};

/// D_KL(p || q) between two exact distributions.
double exact_kl(const ExactDistribution& p, const ExactDistribution& q);

/// D_KL(p || q) where q is an empirical histogram. q is smoothed by adding one
/// pseudo-count to every state so the divergence stays finite.
double exact_kl(const ExactDistribution& p, const StateHistogram& q);

/// D_KL(p || q) for an empirical (e.g. training-set) p against a model q.
/// No smoothing is needed since q has full support.
double exact_kl(const StateHistogram& p, const ExactDistribution& q);

}  // namespace boltzgen
