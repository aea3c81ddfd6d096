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
#include <string>
#include <utility>
#include <vector>

#include "boltzgen/datasets.hpp"
#include "boltzgen/exact.hpp"
#include "boltzgen/ising.hpp"
#include "boltzgen/samplers.hpp"
#include "boltzgen/simcim.hpp"
#include "boltzgen/thermometry.hpp"

namespace boltzgen {

enum class NegativePhase { exact, mcmc, simcim, simcim_corrected };

std::string to_string(NegativePhase phase);
NegativePhase parse_negative_phase(const std::string& name);

inline constexpr double kBasLearningRate = 0.05;
inline constexpr double kMnistLearningRate = 0.001;

struct BmTrainConfig {
  double learning_rate = kBasLearningRate;
  std::size_t epochs = 1;
  std::size_t minibatch_size = 0;  // 0: the whole (weighted) training set per update
  NegativePhase negative_phase = NegativePhase::exact;
  std::size_t negative_samples = 250;
  std::size_t metric_cadence = 1;  // evaluate metrics every this many updates
  std::uint64_t seed = 0;
  double init_scale = 0.01;        // J_ik ~ N(0, init_scale^2), b = 0
  std::size_t chain_length = 1000; // mcmc negatives
  ScheduleConfig schedule;         // simcim negatives, resolved per update
  /// Per-update temperature calibration of the corrected SimCIM negatives.
  ThermometryOptions calibration;

  BmTrainConfig();
  void validate(std::size_t training_size) const;
};

struct HistoryEntry {
  std::size_t update_count = 0;
  std::size_t epoch = 0;
  std::optional<double> avg_log_likelihood;
  std::optional<double> kl;
  std::optional<double> accuracy;
  std::optional<double> native_beta;  // last SimCIM calibration
};

struct BmTrainState {
  explicit BmTrainState(IsingModel initial) : model(std::move(initial)) {}

  IsingModel model;
  std::size_t epoch = 0;
  std::size_t update_count = 0;
  std::vector<HistoryEntry> history;
  /// Native inverse temperature from the latest successful calibration.
  std::optional<double> native_beta;
  std::size_t calibration_failures = 0;
  std::size_t samples_consumed = 0;
};

/// Data-side moments: mean = (1/W) sum w_n s_n and corr = (1/W) sum w_n s_n s_n^T
/// with a zero diagonal. Empty weights mean unit weights.
Moments positive_phase(const SpinMatrix& batch, std::span<const double> weights = {});

/// Moments of a sample batch in the same convention (zero diagonal).
Moments empirical_moments(const SpinBatch& batch);

/// Model-side moments at beta = 1 by the configured method. For the
/// corrected SimCIM mode this calibrates the annealer on `state.model` and
/// updates state.native_beta; a failed calibration reuses the previous value.
Moments negative_phase(BmTrainState& state, const BmTrainConfig& config, std::uint64_t seed);

/// One gradient-ascent step: J += xi (pos_corr - neg_corr), b += xi (pos_mean - neg_mean).
void apply_gradient(BmTrainState& state, const Moments& positive, const Moments& negative,
                    double learning_rate);

/// Positive phase of `minibatch` (weighted) followed by a negative phase and
/// one update; advances update_count.
void bm_update(BmTrainState& state, const SpinMatrix& minibatch, std::span<const double> weights,
               const BmTrainConfig& config);

/// Small random couplings and zero biases.
IsingModel initial_model(std::size_t n, double scale, std::uint64_t seed);

/// Called with the current state; fills the metrics it knows how to compute.
using MetricsFn = std::function<void(const BmTrainState&, HistoryEntry&)>;

/// Gradient ascent over `config.epochs` passes. With minibatch_size 0 each
/// epoch is one full-set update; otherwise rows are reshuffled each epoch
/// (seeded) and cut into consecutive minibatches. Metrics are recorded at
/// update 0 and every metric_cadence updates.
BmTrainState train(const SpinDataset& data, const BmTrainConfig& config, const MetricsFn& metrics = {},
                   std::optional<IsingModel> init = std::nullopt,
                   const std::function<void(const BmTrainState&)>& on_update = {});

/// (1/W) sum_n w_n [-E(s_n) - log_z].
double avg_log_likelihood(const IsingModel& model, const SpinDataset& data, double log_z);

/// Exact metrics for enumerable models: average log-likelihood and
/// KL(data || model).
MetricsFn exact_metrics(const SpinDataset& data);

/// argmin over digits c of E(bitmap, label_block(c)); ties go to the smallest c.
int classify(const IsingModel& model, SpinView bitmap);

/// Classifies the first 784 columns of every row.
std::vector<int> classify_batch(const IsingModel& model, const SpinMatrix& rows);

/// Fraction of labeled rows classified correctly.
double accuracy(const IsingModel& model, const SpinDataset& data);

/// Anneals the 784 pixel spins with the label block clamped to `digit`. The
/// schedule is resolved on the reduced (clamped) model; `scale` multiplies
/// its couplings and biases first (1 / native beta corrects to beta = 1).
SpinBatch generate(const IsingModel& model, int digit, const ScheduleConfig& schedule, std::size_t count,
                   std::uint64_t seed, double scale = 1.0);

}  // namespace boltzgen
