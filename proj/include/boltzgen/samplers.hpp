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
#include <string>

#include "boltzgen/exact.hpp"
#include "boltzgen/ising.hpp"
#include "boltzgen/rng.hpp"
#include "boltzgen/simcim.hpp"

namespace boltzgen {

enum class SamplerKind { exact, mcmc, simcim, uniform };

std::string to_string(SamplerKind kind);
SamplerKind parse_sampler_kind(const std::string& name);

/// Which sampler to run and its settings; the common contract is
/// (model, beta, count, seed) -> SpinBatch, see draw().
struct SamplerSpec {
  SamplerKind kind = SamplerKind::exact;
  std::uint64_t seed = 0;
  std::size_t chain_length = 1000;                  // mcmc
  ScheduleConfig schedule;                          // simcim
  std::size_t enumeration_cap = kDefaultEnumerationCap;  // exact

  void validate() const;
  SamplerSpec with_seed(std::uint64_t s) const {
    SamplerSpec copy = *this;
    copy.seed = s;
    return copy;
  }
};

/// Draws `count` configurations with the energy scaled by `beta`.
///
/// exact and mcmc sample the Boltzmann distribution at `beta`. simcim resolves
/// its schedule against `model` and anneals the model scaled by `beta`, so the
/// output temperature is beta times the annealer's native one. uniform ignores
/// `beta`. Energies are attached under the unscaled model.
SpinBatch draw(const SamplerSpec& spec, const IsingModel& model, double beta, std::size_t count);

/// One single-spin Metropolis chain with sequential sweep order.
class MetropolisChain {
 public:
  MetropolisChain(const IsingModel& model, double beta, Engine rng);

  /// One pass over spins 0..n-1, each proposing a flip accepted with
  /// probability min(1, exp(-beta * dE)).
  void sweep();
  const std::vector<std::int8_t>& state() const { return spins_; }

 private:
  const IsingModel* model_;
  double beta_;
  Engine rng_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::vector<std::int8_t> spins_;
  Eigen::VectorXd field_;  // J s + b
};

/// `count` independent chains from uniform random starts, each advanced
/// `chain_length` sweeps; the final state of each chain is one sample.
SpinBatch mcmc_sample(const IsingModel& model, double beta, std::size_t count,
                      std::size_t chain_length, std::uint64_t seed);

/// i.i.d. uniform spins.
SpinBatch uniform_sample(std::size_t n, std::size_t count, std::uint64_t seed);

}  // namespace boltzgen
