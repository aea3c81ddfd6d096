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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "boltzgen/ising.hpp"
#include "boltzgen/samplers.hpp"

namespace boltzgen {

/// Energy counts on a grid anchored at zero: bin k covers [k w, (k + 1) w),
/// so histograms built with the same width share bin identities.
struct EnergyHistogram {
  double bin_width = 1.0;
  std::int64_t first_bin = 0;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  std::int64_t bin_of(double energy) const;
  std::int64_t last_bin() const { return first_bin + static_cast<std::int64_t>(counts.size()) - 1; }
  std::uint64_t count_at(std::int64_t bin) const;
  double center(std::int64_t bin) const { return (static_cast<double>(bin) + 0.5) * bin_width; }
  /// counts.size() + 1 increasing edges.
  std::vector<double> edges() const;
};

EnergyHistogram histogram_energies(std::span<const double> energies, double bin_width);
EnergyHistogram histogram_energies(const SpinBatch& batch, const IsingModel& model, double bin_width);

struct LogRatioPoint {
  double delta_e = 0.0;
  double delta_l = 0.0;
  double weight = 0.0;  // 1 / (sum of inverse counts of the bins involved)
};

/// Paired log-ratio data. The reference bin E' is the most populated bin
/// (summed over both histograms) among bins holding at least min_count
/// samples in each; every other qualifying bin E yields
///   delta_e = center(E) - center(E'),
///   delta_l = ln[p2(E') p1(E) / (p2(E) p1(E'))] = (beta2 - beta1) delta_e.
struct LogRatioSeries {
  double reference_energy = 0.0;
  double reference_weight = 0.0;
  std::vector<LogRatioPoint> points;  // excludes the reference bin
};

/// Throws InsufficientOverlapError when fewer than three bins qualify.
LogRatioSeries delta_log_ratio(const EnergyHistogram& h1, const EnergyHistogram& h2,
                               std::size_t min_count);

enum class FitWeighting { inverse_variance, unweighted };

std::string to_string(FitWeighting weighting);
FitWeighting parse_fit_weighting(const std::string& name);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_stderr = 0.0;
  std::size_t points = 0;
};

/// Least-squares line through the series, the reference bin included as the
/// point (0, 0). Each bin's log count ratio carries independent Poisson
/// noise, and the free intercept keeps the slope from inheriting the
/// reference bin's noise. inverse_variance weights each point by
/// LogRatioPoint::weight.
LineFit fit_log_ratio(const LogRatioSeries& series, FitWeighting weighting);

/// How a temperature is measured: the two-batch histogram regression above,
/// or maximum pseudo-likelihood on the samples themselves.
enum class ThermometryMethod { histogram, pseudo_likelihood };

std::string to_string(ThermometryMethod method);
ThermometryMethod parse_thermometry_method(const std::string& name);

struct ThermometryOptions {
  double scale_ratio = 0.76;   // beta1 / beta2
  std::size_t count = 50000;   // samples per batch
  std::optional<double> bin_width;
  std::size_t bins = 50;       // used when bin_width is unset: pooled range / bins
  std::size_t min_count = 10;
  FitWeighting weighting = FitWeighting::inverse_variance;
  double reference_scale = 1.0;  // model scale of the first batch
  double min_significance = 3.0; // required slope / stderr

  void validate() const;
};

struct TemperatureEstimate {
  double beta1 = 0.0;  // effective beta of the batch drawn at reference_scale
  double beta2 = 0.0;  // beta1 / scale_ratio
  double scale_ratio = 0.76;
  double slope = 0.0;  // beta2 - beta1
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_stderr = 0.0;
  std::size_t points_used = 0;
  double reference_scale = 1.0;
  double bin_width = 0.0;
  SamplerKind sampler = SamplerKind::exact;
  // pseudo_likelihood estimates leave the line-fit fields at zero and set
  // beta2 = beta1 with scale_ratio 1: every sample is drawn at reference_scale.
  ThermometryMethod method = ThermometryMethod::histogram;
  std::uint64_t model_fingerprint = 0;
  std::uint64_t schedule_fingerprint = 0;
  std::size_t samples_consumed = 0;

  /// Effective beta of the sampler on the unscaled model.
  double native_beta() const { return beta1 / reference_scale; }
};

struct ThermometryRun {
  TemperatureEstimate estimate;
  EnergyHistogram histogram1;
  EnergyHistogram histogram2;
  LogRatioSeries series;
};

/// Solves slope = beta2 - beta1 and beta1 / beta2 = ratio from two batches of
/// `model` drawn at inverse temperatures beta1 and beta2 = beta1 / ratio.
/// Throws CalibrationError when the slope is not significantly positive,
/// which is what non-Boltzmann (or infinite-temperature) output looks like.
ThermometryRun estimate_from_batches(const IsingModel& model, const SpinBatch& first,
                                     const SpinBatch& second, const ThermometryOptions& options);

/// Draws batch A at scale reference_scale and batch B at
/// reference_scale / scale_ratio from `sampler`, then fits.
ThermometryRun estimate_beta_detailed(const IsingModel& model, const SamplerSpec& sampler,
                                      const ThermometryOptions& options);

TemperatureEstimate estimate_beta(const IsingModel& model, const SamplerSpec& sampler,
                                  const ThermometryOptions& options);

struct PseudoLikelihoodFit {
  double beta = 0.0;
  double stderr_beta = 0.0;  // from the curvature, treating spins as independent
  std::size_t samples = 0;
};

/// Effective inverse temperature of `batch` under `model`: the beta that
/// maximizes the pseudo-likelihood
///   sum_i sum_k ln sigmoid(2 beta s_ik h_ik),  h_ik = (J s_i)_k + b_k,
/// the product of every spin's Boltzmann conditional given the other spins.
/// It needs no partition function and uses every spin of every sample, so a
/// few hundred samples pin beta down to a few percent. The objective is
/// concave in beta; CalibrationError is raised when its maximum is not
/// finite and positive (no spin opposes its field, or the batch looks hotter
/// than uniform).
PseudoLikelihoodFit pseudo_likelihood_beta(const IsingModel& model, const SpinBatch& batch);

}  // namespace boltzgen
