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
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "boltzgen/ising.hpp"

namespace boltzgen {

struct TemperatureEstimate;

enum class PumpShape { linear, tanh, constant };

std::string to_string(PumpShape shape);
PumpShape parse_pump_shape(const std::string& name);

/// Dimensionless annealer settings. Gains are expressed relative to the
/// largest coupling eigenvalue of a reference model so one config transfers
/// across problem sizes: zeta = zeta_scale / lambda_ref and the pump runs from
/// pump_start * zeta_scale to pump_end * zeta_scale.
struct ScheduleConfig {
  std::size_t iterations = 1000;
  double zeta_scale = 0.05;
  double sigma = 0.3;
  PumpShape pump = PumpShape::linear;
  double pump_start = -1.0;
  double pump_end = 3.0;

  void validate() const;
};

/// Concrete SimCIM control parameters.
///
/// Resolve a schedule once against the unscaled model and keep it fixed when
/// sampling rescaled copies of that model: scaling the couplings must change
/// the sampled temperature, which it would not if the gains were re-derived
/// from the scaled couplings.
class AnnealSchedule {
 public:
  AnnealSchedule(double zeta, double sigma, std::vector<double> pump);
  AnnealSchedule(double zeta, double sigma, std::size_t iterations,
                 const std::function<double(std::size_t)>& pump);

  static AnnealSchedule resolve(const ScheduleConfig& config, const IsingModel& reference);

  std::size_t iterations() const { return pump_.size(); }
  double zeta() const { return zeta_; }
  double sigma() const { return sigma_; }
  double pump(std::size_t t) const { return pump_[t]; }
  const std::vector<double>& pump_values() const { return pump_; }
  std::uint64_t fingerprint() const;

 private:
  double zeta_;
  double sigma_;
  std::vector<double> pump_;
};

/// Largest algebraic eigenvalue of J by shifted power iteration.
double largest_eigenvalue(const IsingModel& model);

/// Coupling scale used to normalize schedules: max(largest_eigenvalue, 1).
double reference_eigenvalue(const IsingModel& model);

/// Clipping activation: identity on [-1, 1], sign outside.
double activation(double x);

struct AnnealTrace {
  Eigen::MatrixXd spins;             // iterations x n, continuous values of run 0
  std::vector<double> best_energy;   // per iteration, lowest E(sign(s)) over the batch
};

struct AnnealResult {
  SpinBatch batch;
  std::optional<AnnealTrace> trace;
};

/// Runs `count` independent anneals. Each starts from s = 0 and iterates
///   phi = J s + b,  s <- activation(s + p_t s + zeta phi + N(0, sigma)),
/// then emits sign(s) with sign(0) = +1. Run i draws its noise from
/// stream(seed, i), so output is independent of the thread count.
AnnealResult anneal_batch(const IsingModel& model, const AnnealSchedule& schedule,
                          std::size_t count, std::uint64_t seed, bool trace = false);

/// Anneals scale_model(model, target_beta / native_beta) so the output
/// follows the Boltzmann distribution of `model` at `target_beta`.
/// Energies are attached under the unscaled model.
SpinBatch corrected_sample(const IsingModel& model, double target_beta,
                           const AnnealSchedule& schedule, double native_beta,
                           std::size_t count, std::uint64_t seed);

/// corrected_sample with the native temperature taken from a calibration.
/// Throws CalibrationError if `calibration` was not produced by SimCIM on
/// this model and schedule.
SpinBatch boltzmann_sample(const IsingModel& model, double target_beta,
                           const AnnealSchedule& schedule, std::size_t count,
                           std::uint64_t seed, const TemperatureEstimate& calibration);

}  // namespace boltzgen
