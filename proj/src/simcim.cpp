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

#include "boltzgen/simcim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "boltzgen/errors.hpp"
#include "boltzgen/parallel.hpp"
#include "boltzgen/rng.hpp"
#include "boltzgen/samplers.hpp"
#include "boltzgen/thermometry.hpp"

namespace boltzgen {

namespace {

// Runs per block. Every block multiplies J by an n x kBlock matrix regardless
// of how many runs it holds, so a run's arithmetic never depends on the batch
// size or on which block it lands in.
constexpr std::size_t kBlock = 32;

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

void check_pump(const std::vector<double>& pump) {
  if (pump.empty()) throw ParameterError("simcim: schedule needs at least one iteration");
  for (std::size_t t = 0; t < pump.size(); ++t) {
    if (!std::isfinite(pump[t])) {
      throw NumericError("simcim: pump value at iteration " + std::to_string(t) + " is not finite");
    }
  }
}

}  // namespace

std::string to_string(PumpShape shape) {
  switch (shape) {
    case PumpShape::linear: return "linear";
    case PumpShape::tanh: return "tanh";
    case PumpShape::constant: return "constant";
  }
  return "linear";
}

PumpShape parse_pump_shape(const std::string& name) {
  if (name == "linear") return PumpShape::linear;
  if (name == "tanh") return PumpShape::tanh;
  if (name == "constant") return PumpShape::constant;
  throw ParameterError("simcim: unknown pump shape '" + name + "'");
}

void ScheduleConfig::validate() const {
  if (iterations == 0) throw ParameterError("simcim: iterations must be at least 1");
  if (!(zeta_scale > 0.0) || !std::isfinite(zeta_scale)) {
    throw ParameterError("simcim: zeta_scale must be positive and finite");
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ParameterError("simcim: sigma must be non-negative and finite");
  }
  if (!std::isfinite(pump_start) || !std::isfinite(pump_end)) {
    throw ParameterError("simcim: pump endpoints must be finite");
  }
}

AnnealSchedule::AnnealSchedule(double zeta, double sigma, std::vector<double> pump)
    : zeta_(zeta), sigma_(sigma), pump_(std::move(pump)) {
  if (!(zeta > 0.0) || !std::isfinite(zeta)) throw ParameterError("simcim: zeta must be positive and finite");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ParameterError("simcim: sigma must be non-negative and finite");
  }
  check_pump(pump_);
}

AnnealSchedule::AnnealSchedule(double zeta, double sigma, std::size_t iterations,
                               const std::function<double(std::size_t)>& pump)
    : AnnealSchedule(zeta, sigma, [&] {
        std::vector<double> values(iterations);
        for (std::size_t t = 0; t < iterations; ++t) values[t] = pump(t);
        return values;
      }()) {}

AnnealSchedule AnnealSchedule::resolve(const ScheduleConfig& config, const IsingModel& reference) {
  config.validate();
  const double lambda = reference_eigenvalue(reference);
  const double zeta = config.zeta_scale / lambda;
  const double span = config.pump_end - config.pump_start;
  const std::size_t iterations = config.iterations;
  const double last = iterations > 1 ? static_cast<double>(iterations - 1) : 1.0;
  auto pump = [&](std::size_t t) {
    const double x = static_cast<double>(t) / last;
    double fraction = 1.0;
    switch (config.pump) {
      case PumpShape::linear: fraction = x; break;
      case PumpShape::tanh: fraction = 0.5 * (1.0 + std::tanh(4.0 * (2.0 * x - 1.0)) / std::tanh(4.0)); break;
      case PumpShape::constant: fraction = 1.0; break;
    }
    return config.zeta_scale * (config.pump_start + span * fraction);
  };
  return AnnealSchedule(zeta, config.sigma, iterations, pump);
}

std::uint64_t AnnealSchedule::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = fnv1a(&zeta_, sizeof zeta_, h);
  h = fnv1a(&sigma_, sizeof sigma_, h);
  return fnv1a(pump_.data(), sizeof(double) * pump_.size(), h);
}

double largest_eigenvalue(const IsingModel& model) {
  const Eigen::MatrixXd& j = model.couplings();
  const Eigen::Index n = j.rows();
  // Gershgorin bound; J + shift*I is positive semi-definite, so the power
  // iteration converges to the top of the spectrum rather than the largest
  // magnitude.
  const double shift = j.cwiseAbs().rowwise().sum().maxCoeff();
  if (shift == 0.0) return 0.0;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 0.01 * static_cast<double>(i % 7);
  v.normalize();
  double estimate = v.dot(j * v);
  for (int iter = 0; iter < 2000; ++iter) {
    Eigen::VectorXd w = j * v + shift * v;
    const double norm = w.norm();
    if (norm == 0.0) break;
    v = w / norm;
    const double next = v.dot(j * v);
    if (std::abs(next - estimate) <= 1e-10 * shift) {
      estimate = next;
      break;
    }
    estimate = next;
  }
  return estimate;
}

double reference_eigenvalue(const IsingModel& model) {
  return std::max(largest_eigenvalue(model), 1.0);
}

double activation(double x) {
  if (x > 1.0) return 1.0;
  if (x < -1.0) return -1.0;
  return x;
}

AnnealResult anneal_batch(const IsingModel& model, const AnnealSchedule& schedule,
                          std::size_t count, std::uint64_t seed, bool trace) {
  if (count == 0) throw ParameterError("simcim: sample count must be positive");
  const std::size_t n = model.size();
  const auto ni = static_cast<Eigen::Index>(n);
  const std::size_t iterations = schedule.iterations();
  const double zeta = schedule.zeta();
  const double sigma = schedule.sigma();
  const Eigen::MatrixXd& j = model.couplings();
  const Eigen::VectorXd& b = model.biases();

  AnnealResult result;
  SpinBatch& batch = result.batch;
  batch.samples.resize(static_cast<Eigen::Index>(count), ni);

  const std::size_t blocks = (count + kBlock - 1) / kBlock;
  std::vector<std::vector<double>> block_best;
  if (trace) {
    result.trace.emplace();
    result.trace->spins.resize(static_cast<Eigen::Index>(iterations), ni);
    block_best.assign(blocks, std::vector<double>(iterations));
  }

  parallel_chunks(blocks, 1, [&](std::size_t first, std::size_t last) {
    Eigen::MatrixXd s(ni, static_cast<Eigen::Index>(kBlock));
    Eigen::MatrixXd phi(ni, static_cast<Eigen::Index>(kBlock));
    std::vector<Engine> engines;
    std::vector<std::normal_distribution<double>> noise(kBlock);
    std::vector<std::int8_t> signs(n);
    for (std::size_t blk = first; blk < last; ++blk) {
      const std::size_t run0 = blk * kBlock;
      const std::size_t runs = std::min(kBlock, count - run0);
      engines.clear();
      for (std::size_t r = 0; r < runs; ++r) {
        engines.push_back(make_stream(seed, run0 + r, stream_tag::kSimcim));
        noise[r].reset();
      }
      s.setZero();
      for (std::size_t t = 0; t < iterations; ++t) {
        const double gain = 1.0 + schedule.pump(t);
        phi.noalias() = j * s;
        for (std::size_t r = 0; r < runs; ++r) {
          double* col = s.col(static_cast<Eigen::Index>(r)).data();
          const double* field = phi.col(static_cast<Eigen::Index>(r)).data();
          Engine& rng = engines[r];
          auto& gauss = noise[r];
          for (std::size_t i = 0; i < n; ++i) {
            const double kick = sigma > 0.0 ? sigma * gauss(rng) : 0.0;
            col[i] = activation(gain * col[i] + zeta * (field[i] + b[static_cast<Eigen::Index>(i)]) + kick);
          }
        }
        if (trace) {
          if (blk == 0) result.trace->spins.row(static_cast<Eigen::Index>(t)) = s.col(0).transpose();
          double best = std::numeric_limits<double>::infinity();
          for (std::size_t r = 0; r < runs; ++r) {
            for (std::size_t i = 0; i < n; ++i) {
              signs[i] = s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r)) >= 0.0 ? 1 : -1;
            }
            best = std::min(best, energy(model, signs));
          }
          block_best[blk][t] = best;
        }
      }
      for (std::size_t r = 0; r < runs; ++r) {
        auto row = batch.samples.row(static_cast<Eigen::Index>(run0 + r));
        for (std::size_t i = 0; i < n; ++i) {
          const double v = s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r));
          if (!std::isfinite(v)) throw NumericError("simcim: spin amplitude became non-finite");
          row[static_cast<Eigen::Index>(i)] = v >= 0.0 ? 1 : -1;
        }
      }
    }
  });

  if (trace) {
    result.trace->best_energy.assign(iterations, std::numeric_limits<double>::infinity());
    for (const auto& per_block : block_best) {
      for (std::size_t t = 0; t < iterations; ++t) {
        result.trace->best_energy[t] = std::min(result.trace->best_energy[t], per_block[t]);
      }
    }
  }
  batch.source = "simcim";
  batch.attach_energies(model);
  return result;
}

SpinBatch corrected_sample(const IsingModel& model, double target_beta,
                           const AnnealSchedule& schedule, double native_beta,
                           std::size_t count, std::uint64_t seed) {
  if (!(target_beta > 0.0) || !std::isfinite(target_beta)) {
    throw ParameterError("simcim: target beta must be positive and finite");
  }
  if (!(native_beta > 0.0) || !std::isfinite(native_beta)) {
    throw CalibrationError("simcim: native beta must be positive and finite");
  }
  SpinBatch batch =
      anneal_batch(scale_model(model, target_beta / native_beta), schedule, count, seed).batch;
  batch.attach_energies(model);
  batch.beta = target_beta;
  batch.source = "simcim-corrected";
  return batch;
}

SpinBatch boltzmann_sample(const IsingModel& model, double target_beta,
                           const AnnealSchedule& schedule, std::size_t count,
                           std::uint64_t seed, const TemperatureEstimate& calibration) {
  if (calibration.sampler != SamplerKind::simcim) {
    throw CalibrationError("simcim: calibration was not measured on SimCIM output");
  }
  if (calibration.model_fingerprint != model.fingerprint()) {
    throw CalibrationError("simcim: calibration belongs to a different model");
  }
  if (calibration.schedule_fingerprint != schedule.fingerprint()) {
    throw CalibrationError("simcim: calibration belongs to a different schedule");
  }
  return corrected_sample(model, target_beta, schedule, calibration.native_beta(), count, seed);
}

}  // namespace boltzgen
