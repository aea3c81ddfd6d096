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

#include "boltzgen/samplers.hpp"

#include <cmath>
#include <string>

#include "boltzgen/errors.hpp"
#include "boltzgen/parallel.hpp"

namespace boltzgen {

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::exact: return "exact";
    case SamplerKind::mcmc: return "mcmc";
    case SamplerKind::simcim: return "simcim";
    case SamplerKind::uniform: return "uniform";
  }
  return "exact";
}

SamplerKind parse_sampler_kind(const std::string& name) {
  if (name == "exact") return SamplerKind::exact;
  if (name == "mcmc") return SamplerKind::mcmc;
  if (name == "simcim") return SamplerKind::simcim;
  if (name == "uniform") return SamplerKind::uniform;
  throw ParameterError("samplers: unknown sampler '" + name + "'");
}

void SamplerSpec::validate() const {
  switch (kind) {
    case SamplerKind::mcmc:
      if (chain_length == 0) throw ParameterError("samplers: chain length must be at least 1");
      break;
    case SamplerKind::simcim:
      schedule.validate();
      break;
    case SamplerKind::exact:
    case SamplerKind::uniform:
      break;
  }
}

SpinBatch draw(const SamplerSpec& spec, const IsingModel& model, double beta, std::size_t count) {
  spec.validate();
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw ParameterError("samplers: beta must be finite and non-negative");
  }
  SpinBatch batch;
  switch (spec.kind) {
    case SamplerKind::exact:
      batch = exact_sample(enumerate(model, beta, spec.enumeration_cap), count, spec.seed);
      break;
    case SamplerKind::mcmc:
      batch = mcmc_sample(model, beta, count, spec.chain_length, spec.seed);
      break;
    case SamplerKind::simcim: {
      const AnnealSchedule schedule = AnnealSchedule::resolve(spec.schedule, model);
      const IsingModel target = beta > 0.0 ? scale_model(model, beta) : IsingModel::zeros(model.size());
      batch = anneal_batch(target, schedule, count, spec.seed).batch;
      batch.attach_energies(model);
      break;
    }
    case SamplerKind::uniform:
      batch = uniform_sample(model.size(), count, spec.seed);
      batch.attach_energies(model);
      break;
  }
  return batch;
}

MetropolisChain::MetropolisChain(const IsingModel& model, double beta, Engine rng)
    : model_(&model), beta_(beta), rng_(std::move(rng)), spins_(model.size()) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw ParameterError("samplers: beta must be finite and non-negative");
  }
  const std::size_t n = model.size();
  // 64 fair bits per draw.
  for (std::size_t i = 0; i < n; i += 64) {
    const std::uint64_t bits = rng_();
    for (std::size_t k = i; k < std::min(n, i + 64); ++k) spins_[k] = ((bits >> (k - i)) & 1U) ? 1 : -1;
  }
  Eigen::VectorXd s(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) s[static_cast<Eigen::Index>(i)] = spins_[i];
  field_ = model.couplings() * s + model.biases();
}

void MetropolisChain::sweep() {
  const Eigen::MatrixXd& j = model_->couplings();
  const std::size_t n = spins_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double old = spins_[i];
    const double delta = 2.0 * old * field_[ii];
    const double x = -beta_ * delta;
    if (x < 0.0 && unit_(rng_) >= std::exp(x)) continue;
    spins_[i] = static_cast<std::int8_t>(-old);
    field_.noalias() -= (2.0 * old) * j.col(ii);
  }
}

SpinBatch mcmc_sample(const IsingModel& model, double beta, std::size_t count,
                      std::size_t chain_length, std::uint64_t seed) {
  if (count == 0) throw ParameterError("samplers: sample count must be positive");
  if (chain_length == 0) throw ParameterError("samplers: chain length must be at least 1");
  const std::size_t n = model.size();
  SpinBatch batch;
  batch.samples.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(n));
  parallel_chunks(count, 16, [&](std::size_t first, std::size_t last) {
    for (std::size_t c = first; c < last; ++c) {
      MetropolisChain chain(model, beta, make_stream(seed, c, stream_tag::kMcmc));
      for (std::size_t sweep = 0; sweep < chain_length; ++sweep) chain.sweep();
      auto row = batch.samples.row(static_cast<Eigen::Index>(c));
      for (std::size_t i = 0; i < n; ++i) row[static_cast<Eigen::Index>(i)] = chain.state()[i];
    }
  });
  batch.beta = beta;
  batch.source = "mcmc";
  batch.attach_energies(model);
  return batch;
}

SpinBatch uniform_sample(std::size_t n, std::size_t count, std::uint64_t seed) {
  if (n == 0) throw ParameterError("samplers: dimension must be positive");
  if (count == 0) throw ParameterError("samplers: sample count must be positive");
  SpinBatch batch;
  batch.samples.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(n));
  parallel_chunks(count, 4096, [&](std::size_t first, std::size_t last) {
    for (std::size_t c = first; c < last; ++c) {
      Engine rng = make_stream(seed, c, stream_tag::kUniform);
      auto row = batch.samples.row(static_cast<Eigen::Index>(c));
      for (std::size_t i = 0; i < n; i += 64) {
        const std::uint64_t bits = rng();
        for (std::size_t k = i; k < std::min(n, i + 64); ++k) {
          row[static_cast<Eigen::Index>(k)] = ((bits >> (k - i)) & 1U) ? 1 : -1;
        }
      }
    }
  });
  batch.beta = 0.0;
  batch.source = "uniform";
  return batch;
}

}  // namespace boltzgen
