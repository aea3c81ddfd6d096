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

#include "boltzgen/ais.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "boltzgen/errors.hpp"
#include "boltzgen/rng.hpp"
#include "boltzgen/simcim.hpp"

namespace boltzgen {

namespace {

// Appends the rows (and energies, when both carry them) of `more` to `into`.
void append(SpinBatch& into, const SpinBatch& more) {
  if (into.size() == 0) {
    into = more;
    return;
  }
  const Eigen::Index rows = into.samples.rows();
  into.samples.conservativeResize(rows + more.samples.rows(), Eigen::NoChange);
  into.samples.bottomRows(more.samples.rows()) = more.samples;
  if (into.energies && more.energies) {
    into.energies->conservativeResize(rows + more.energies->size());
    into.energies->tail(more.energies->size()) = *more.energies;
  } else {
    into.energies.reset();
  }
}

// ln sum_i exp(x_i + ln c_i) with a max shift; c empty means c_i = 1.
double log_sum_exp(std::span<const double> x, std::span<const double> log_c = {}) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x[i] + (log_c.empty() ? 0.0 : log_c[i]);
    mx = std::max(mx, v);
  }
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += std::exp(x[i] + (log_c.empty() ? 0.0 : log_c[i]) - mx);
  }
  return mx + std::log(s);
}

}  // namespace

ThermometryOptions default_rung_calibration() {
  ThermometryOptions o;
  o.count = 250;
  o.bins = 12;
  o.min_count = 5;
  o.min_significance = 2.0;
  return o;
}

std::vector<double> linear_ladder(std::size_t steps) {
  if (steps == 0) throw ParameterError("ais: the ladder needs at least one step");
  std::vector<double> out(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    out[k] = static_cast<double>(k) / static_cast<double>(steps);
  }
  return out;
}

std::vector<double> AisConfig::ladder() const {
  return beta_schedule.empty() ? linear_ladder(n_intermediate) : beta_schedule;
}

void AisConfig::validate() const {
  if (n_intermediate == 0) throw ParameterError("ais: n_intermediate must be positive");
  if (samples_per_step == 0) throw ParameterError("ais: samples_per_step must be positive");
  sampler.validate();
  if (sampler.kind == SamplerKind::uniform) {
    throw ParameterError("ais: the uniform sampler cannot sample intermediate distributions");
  }
  if (!beta_schedule.empty()) {
    if (beta_schedule.size() != n_intermediate + 1) {
      throw ParameterError("ais: beta schedule length must be n_intermediate + 1");
    }
    if (beta_schedule.front() != 0.0 || beta_schedule.back() != 1.0) {
      throw ParameterError("ais: beta schedule must start at 0 and end at 1");
    }
    for (std::size_t k = 1; k < beta_schedule.size(); ++k) {
      if (!(beta_schedule[k] >= beta_schedule[k - 1])) {
        throw ParameterError("ais: beta schedule must be non-decreasing (entry " + std::to_string(k) + ")");
      }
    }
  }
  if (sampler.kind == SamplerKind::simcim) calibration.validate();
}

ImportanceRatio importance_ratio(const IsingModel& model, double beta_from, double beta_to,
                                 const SpinBatch& batch_from, std::span<const double> sample_weights) {
  const std::size_t m = batch_from.size();
  if (m == 0) throw ParameterError("ais: importance ratio needs a non-empty batch");
  if (batch_from.dimension() != model.size()) {
    throw DimensionError("ais: batch dimension does not match the model");
  }
  if (!sample_weights.empty() && sample_weights.size() != m) {
    throw DimensionError("ais: sample weights must match the batch size");
  }
  if (!(beta_to >= beta_from)) throw ParameterError("ais: beta_to must not be below beta_from");

  const Eigen::VectorXd e = energies(model, batch_from.samples);
  const double step = beta_to - beta_from;
  ImportanceRatio out;
  out.log_weights.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    out.log_weights[i] = step == 0.0 ? 0.0 : -step * e[static_cast<Eigen::Index>(i)];
    if (!std::isfinite(out.log_weights[i])) throw NumericError("ais: non-finite importance weight");
  }

  std::vector<double> log_c;
  double log_norm = std::log(static_cast<double>(m));
  if (!sample_weights.empty()) {
    log_c.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      if (!(sample_weights[i] >= 0.0)) throw ParameterError("ais: sample weights must be non-negative");
      log_c[i] = std::log(sample_weights[i]);
    }
    const std::vector<double> zeros(m, 0.0);
    log_norm = log_sum_exp(zeros, log_c);
  }
  out.log_ratio = log_sum_exp(out.log_weights, log_c) - log_norm;
  if (!std::isfinite(out.log_ratio)) throw NumericError("ais: non-finite importance ratio");

  if (sample_weights.empty() && m > 1) {
    // Relative weights r_i = w_i / mean(w); Var(ln mean) ~ Var(r) / M.
    double ss = 0.0;
    for (double lw : out.log_weights) {
      const double r = std::exp(lw - out.log_ratio);
      ss += (r - 1.0) * (r - 1.0);
    }
    out.stderr_log_ratio = std::sqrt(ss / static_cast<double>(m - 1) / static_cast<double>(m));
  }
  return out;
}

AisResult estimate_log_z(const IsingModel& model, std::span<const double> ladder,
                         const RungSampler& sampler) {
  if (ladder.size() < 2) throw ParameterError("ais: the ladder needs at least two entries");
  AisResult result;
  result.ladder.assign(ladder.begin(), ladder.end());
  result.log_z = static_cast<double>(model.size()) * std::numbers::ln2;
  double variance = 0.0;
  for (std::size_t k = 0; k + 1 < ladder.size(); ++k) {
    RungBatch rung = sampler(k, ladder[k]);
    const ImportanceRatio r = importance_ratio(model, ladder[k], ladder[k + 1], rung.batch, rung.weights);
    result.per_step_log_ratios.push_back(r.log_ratio);
    result.per_step_stderr.push_back(r.stderr_log_ratio);
    result.log_z += r.log_ratio;
    variance += r.stderr_log_ratio * r.stderr_log_ratio;
    result.samples_consumed += rung.consumed;
    if (rung.calibration) result.calibrations.push_back(*rung.calibration);
  }
  result.log_z_stderr = std::sqrt(variance);
  if (!std::isfinite(result.log_z)) throw NumericError("ais: non-finite log partition function");
  return result;
}

AisResult estimate_log_z(const IsingModel& model, const AisConfig& config) {
  config.validate();
  const std::vector<double> ladder = config.ladder();
  const std::size_t m = config.samples_per_step;

  if (config.sampler.kind != SamplerKind::simcim) {
    return estimate_log_z(model, ladder, [&](std::size_t rung, double beta) {
      RungBatch out;
      const SamplerSpec spec = config.sampler.with_seed(derive_seed(config.sampler.seed, rung, stream_tag::kAis));
      out.batch = draw(spec, model, beta, m);
      out.consumed = m;
      return out;
    });
  }

  const AnnealSchedule schedule = AnnealSchedule::resolve(config.sampler.schedule, model);
  ThermometryOptions cal = config.calibration;
  cal.count = m;
  cal.validate();
  auto calibration_seed = [&](std::size_t rung, std::uint64_t batch) {
    const std::uint64_t rung_seed = derive_seed(config.sampler.seed, rung, stream_tag::kAis);
    return derive_seed(derive_seed(rung_seed, 0, stream_tag::kThermo), batch, stream_tag::kThermo);
  };
  auto draw_rung = [&](std::size_t rung, double beta, const std::optional<TemperatureEstimate>& current) {
    const std::uint64_t rung_seed = derive_seed(config.sampler.seed, rung, stream_tag::kAis);
    const std::uint64_t draw_seed = derive_seed(rung_seed, 1, stream_tag::kSimcim);
    return beta == 0.0 ? draw(config.sampler.with_seed(draw_seed), model, 0.0, m)
                       : boltzmann_sample(model, beta, schedule, m, draw_seed, *current);
  };
  auto fail = [](std::size_t rung, const CalibrationError& e) {
    return CalibrationError("ais: calibration failed at rung " + std::to_string(rung) + ": " + e.what());
  };
  std::optional<TemperatureEstimate> current;

  if (config.calibration_method == ThermometryMethod::pseudo_likelihood) {
    // Both calibration batches are drawn at the scale the rung is about to
    // sample at (the previous estimate predicts it; rung 0 uses the reference
    // scale). The native temperature drifts slowly with the scale, so
    // measuring where the rung samples keeps that drift out of the ratios.
    return estimate_log_z(model, ladder, [&](std::size_t rung, double beta) {
      RungBatch out;
      const double scale = beta > 0.0 && current ? beta / current->native_beta() : cal.reference_scale;
      SpinBatch batch = draw(config.sampler.with_seed(calibration_seed(rung, 0)), model, scale, m);
      append(batch, draw(config.sampler.with_seed(calibration_seed(rung, 1)), model, scale, m));
      out.consumed = 3 * m;
      try {
        const PseudoLikelihoodFit fit = pseudo_likelihood_beta(model, batch);
        TemperatureEstimate estimate;
        estimate.method = ThermometryMethod::pseudo_likelihood;
        estimate.beta1 = fit.beta;
        estimate.beta2 = fit.beta;
        estimate.scale_ratio = 1.0;
        estimate.reference_scale = scale;
        estimate.sampler = SamplerKind::simcim;
        estimate.model_fingerprint = model.fingerprint();
        estimate.schedule_fingerprint = schedule.fingerprint();
        estimate.samples_consumed = 2 * m;
        current = estimate;
        out.calibration = estimate;
      } catch (const CalibrationError& e) {
        if (!current && beta > 0.0) throw fail(rung, e);
      }
      out.batch = draw_rung(rung, beta, current);
      return out;
    });
  }

  // histogram: every rung spends two calibration batches on the unscaled
  // model. Treating the native temperature as rung-independent, the
  // calibration batches of all rungs so far are pooled and refitted; a failed
  // fit keeps the previous estimate. Rung 0 samples beta = 0 and needs no
  // estimate.
  SpinBatch pooled_first;
  SpinBatch pooled_second;
  return estimate_log_z(model, ladder, [&](std::size_t rung, double beta) {
    RungBatch out;
    append(pooled_first, draw(config.sampler.with_seed(calibration_seed(rung, 0)), model,
                              cal.reference_scale, cal.count));
    append(pooled_second, draw(config.sampler.with_seed(calibration_seed(rung, 1)), model,
                               cal.reference_scale / cal.scale_ratio, cal.count));
    out.consumed = m + 2 * cal.count;
    try {
      TemperatureEstimate estimate = estimate_from_batches(model, pooled_first, pooled_second, cal).estimate;
      estimate.sampler = SamplerKind::simcim;
      estimate.schedule_fingerprint = schedule.fingerprint();
      current = estimate;
      out.calibration = estimate;
    } catch (const CalibrationError& e) {
      if (!current && beta > 0.0) throw fail(rung, e);
    }
    out.batch = draw_rung(rung, beta, current);
    return out;
  });
}

double direct_log_z(const IsingModel& model, const SamplerSpec& sampler, std::size_t count) {
  if (count == 0) throw ParameterError("ais: direct estimate needs at least one sample");
  const SpinBatch batch = draw(sampler.with_seed(derive_seed(sampler.seed, 0, stream_tag::kAis)), model, 0.0, count);
  return static_cast<double>(model.size()) * std::numbers::ln2 +
         importance_ratio(model, 0.0, 1.0, batch).log_ratio;
}

}  // namespace boltzgen
