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
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "boltzgen/ising.hpp"
#include "boltzgen/samplers.hpp"
#include "boltzgen/thermometry.hpp"

namespace boltzgen {

/// Calibration settings used for the per-rung temperature estimates when the
/// sampler is SimCIM: small batches need a coarse energy grid.
ThermometryOptions default_rung_calibration();

struct AisConfig {
  std::size_t n_intermediate = 10;   // ladder steps N
  std::size_t samples_per_step = 250; // M
  SamplerSpec sampler;
  /// Inverse temperatures p_0..p_N; empty means linear spacing on [0, 1].
  std::vector<double> beta_schedule;
  /// SimCIM rung thermometry. pseudo_likelihood measures each rung's
  /// calibration batches at the scale that rung samples at; histogram pools
  /// unit-scale two-batch regressions across rungs.
  ThermometryMethod calibration_method = ThermometryMethod::pseudo_likelihood;
  ThermometryOptions calibration = default_rung_calibration();

  /// beta_schedule when set, otherwise linear_ladder(n_intermediate).
  std::vector<double> ladder() const;
  void validate() const;
};

std::vector<double> linear_ladder(std::size_t steps);

struct ImportanceRatio {
  double log_ratio = 0.0;           // ln of the (weighted) mean of w_i
  std::vector<double> log_weights;  // ln w_i = -(beta_to - beta_from) E(s_i)
  double stderr_log_ratio = 0.0;    // delta method: sd(w) / (sqrt(M) mean(w))
};

/// Estimates Z(beta_to) / Z(beta_from) from samples of the beta_from
/// distribution. `sample_weights`, when given, turns the batch into a
/// weighted sum (e.g. every state weighted by its exact probability).
ImportanceRatio importance_ratio(const IsingModel& model, double beta_from, double beta_to,
                                 const SpinBatch& batch_from,
                                 std::span<const double> sample_weights = {});

struct AisResult {
  double log_z = 0.0;
  double log_z_stderr = 0.0;
  std::vector<double> ladder;
  std::vector<double> per_step_log_ratios;
  std::vector<double> per_step_stderr;
  std::vector<TemperatureEstimate> calibrations;  // one per rung (SimCIM only)
  std::size_t samples_consumed = 0;
};

/// What a rung sampler hands back: a batch from the rung distribution, optional
/// per-sample weights, and the number of sampler draws it cost.
struct RungBatch {
  SpinBatch batch;
  std::vector<double> weights;
  std::size_t consumed = 0;
  std::optional<TemperatureEstimate> calibration;
};

using RungSampler = std::function<RungBatch(std::size_t rung, double beta)>;

/// Core ladder: ln Z = n ln 2 + sum over rungs of ln Z(p_{k+1}) / Z(p_k).
AisResult estimate_log_z(const IsingModel& model, std::span<const double> ladder,
                         const RungSampler& sampler);

/// Samples every rung with config.sampler. With SimCIM each rung first
/// calibrates the annealer's temperature with two auxiliary batches of
/// samples_per_step each and then draws temperature-corrected samples, so
/// N rungs consume 3 N M samples.
AisResult estimate_log_z(const IsingModel& model, const AisConfig& config);

/// Single-step estimate from the uniform distribution straight to beta = 1:
/// ln[(2^n / count) sum exp(-E(s_i))] over `count` beta = 0 samples.
double direct_log_z(const IsingModel& model, const SamplerSpec& sampler, std::size_t count);

}  // namespace boltzgen
