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

#include "boltzgen/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "boltzgen/errors.hpp"
#include "boltzgen/parallel.hpp"
#include "boltzgen/rng.hpp"

namespace boltzgen {

namespace {

constexpr std::size_t kBlockBits = 12;

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

void check_same_dimension(std::size_t a, std::size_t b) {
  if (a != b) {
    throw DimensionError("exact: distributions over " + std::to_string(a) + " and " +
                         std::to_string(b) + " spins cannot be compared");
  }
}

}  // namespace

std::uint64_t encode_state(SpinView spins) {
  if (spins.size() > 63) throw CapacityError("exact: cannot encode more than 63 spins");
  std::uint64_t index = 0;
  for (std::size_t k = 0; k < spins.size(); ++k) {
    if (spins[k] > 0) index |= std::uint64_t{1} << k;
  }
  return index;
}

void decode_state(std::uint64_t index, std::span<std::int8_t> out) {
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = ((index >> k) & 1U) ? 1 : -1;
}

ExactDistribution enumerate(const IsingModel& model, double beta, std::size_t cap) {
  const std::size_t n = model.size();
  if (n > cap) {
    throw CapacityError("exact: " + std::to_string(n) + " spins exceeds the enumeration cap of " +
                        std::to_string(cap));
  }
  if (n > 40) throw CapacityError("exact: enumeration beyond 40 spins is not supported");
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw ParameterError("exact: beta must be finite and non-negative");
  }

  const std::uint64_t states = std::uint64_t{1} << n;
  const std::size_t low_bits = std::min(n, kBlockBits);
  const std::uint64_t block = std::uint64_t{1} << low_bits;
  const std::uint64_t blocks = states / block;
  const Eigen::MatrixXd& j = model.couplings();

  std::vector<double> log_w(states);
  // Each block walks its low bits in Gray-code order starting from a state
  // whose energy is evaluated directly, which bounds accumulated rounding.
  parallel_chunks(blocks, 1, [&](std::size_t first, std::size_t last) {
    std::vector<std::int8_t> s(n);
    Eigen::VectorXd field(static_cast<Eigen::Index>(n));
    for (std::size_t blk = first; blk < last; ++blk) {
      const std::uint64_t base = static_cast<std::uint64_t>(blk) << low_bits;
      decode_state(base, s);
      double e = energy(model, s);
      for (std::size_t i = 0; i < n; ++i) {
        double f = model.biases()[static_cast<Eigen::Index>(i)];
        for (std::size_t k = 0; k < n; ++k) f += j(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) * s[k];
        field[static_cast<Eigen::Index>(i)] = f;
      }
      log_w[base] = -beta * e;
      std::uint64_t gray = 0;
      for (std::uint64_t step = 1; step < block; ++step) {
        const auto k = static_cast<std::size_t>(std::countr_zero(step));
        const auto ki = static_cast<Eigen::Index>(k);
        gray ^= std::uint64_t{1} << k;
        const double old = s[k];
        e += 2.0 * old * field[ki];
        s[k] = static_cast<std::int8_t>(-old);
        field.noalias() -= (2.0 * old) * j.col(ki);
        log_w[base | gray] = -beta * e;
      }
    }
  });

  double max_w = -std::numeric_limits<double>::infinity();
  for (double v : log_w) max_w = std::max(max_w, v);

  std::vector<double> block_sums(blocks);
  parallel_chunks(blocks, 1, [&](std::size_t first, std::size_t last) {
    std::vector<double> shifted(block);
    for (std::size_t blk = first; blk < last; ++blk) {
      for (std::uint64_t t = 0; t < block; ++t) shifted[t] = std::exp(log_w[blk * block + t] - max_w);
      block_sums[blk] = pairwise_sum(shifted);
    }
  });
  const double log_z = max_w + std::log(pairwise_sum(block_sums));
  for (double& v : log_w) v -= log_z;

  return ExactDistribution{model, beta, log_z, std::move(log_w)};
}

SpinBatch exact_sample(const ExactDistribution& dist, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw ParameterError("exact: sample count must be positive");
  const std::size_t n = dist.dimension();
  std::vector<double> cdf(dist.log_probs.size());
  double running = 0.0;
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    running += std::exp(dist.log_probs[i]);
    cdf[i] = running;
  }

  SpinBatch batch;
  batch.samples.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(n));
  parallel_chunks(count, 1024, [&](std::size_t first, std::size_t last) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = first; i < last; ++i) {
      Engine rng = make_stream(seed, i, stream_tag::kExact);
      const double u = unit(rng) * running;
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      if (it == cdf.end()) --it;
      const auto index = static_cast<std::uint64_t>(it - cdf.begin());
      decode_state(index, {batch.samples.row(static_cast<Eigen::Index>(i)).data(), n});
    }
  });
  batch.beta = dist.beta;
  batch.source = "exact";
  batch.attach_energies(dist.model);
  return batch;
}

Moments exact_moments(const ExactDistribution& dist) {
  const std::size_t n = dist.dimension();
  const auto ni = static_cast<Eigen::Index>(n);
  const std::uint64_t states = dist.log_probs.size();
  const std::uint64_t block = std::min<std::uint64_t>(states, std::uint64_t{1} << kBlockBits);
  const std::uint64_t blocks = states / block;

  std::vector<Eigen::MatrixXd> corr_parts(blocks);
  std::vector<Eigen::VectorXd> mean_parts(blocks);
  parallel_chunks(blocks, 1, [&](std::size_t first, std::size_t last) {
    Eigen::MatrixXd s(static_cast<Eigen::Index>(block), ni);
    Eigen::VectorXd p(static_cast<Eigen::Index>(block));
    std::vector<std::int8_t> spins(n);
    for (std::size_t blk = first; blk < last; ++blk) {
      for (std::uint64_t t = 0; t < block; ++t) {
        const std::uint64_t index = blk * block + t;
        decode_state(index, spins);
        for (std::size_t k = 0; k < n; ++k) s(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) = spins[k];
        p[static_cast<Eigen::Index>(t)] = std::exp(dist.log_probs[index]);
      }
      mean_parts[blk] = s.transpose() * p;
      corr_parts[blk] = s.transpose() * p.asDiagonal() * s;
    }
  });

  Moments m{Eigen::VectorXd::Zero(ni), Eigen::MatrixXd::Zero(ni, ni)};
  for (std::uint64_t blk = 0; blk < blocks; ++blk) {
    m.mean += mean_parts[blk];
    m.correlation += corr_parts[blk];
  }
  m.correlation.diagonal().setOnes();
  return m;
}

StateHistogram StateHistogram::from_batch(const SpinBatch& batch) {
  return from_weighted(batch.samples, {});
}

StateHistogram StateHistogram::from_weighted(const SpinMatrix& vectors,
                                             std::span<const double> weights) {
  const auto n = static_cast<std::size_t>(vectors.cols());
  if (n > kDefaultEnumerationCap) {
    throw CapacityError("exact: state histogram over " + std::to_string(n) + " spins is too large");
  }
  if (!weights.empty() && weights.size() != static_cast<std::size_t>(vectors.rows())) {
    throw DimensionError("exact: weight count does not match the number of vectors");
  }
  StateHistogram h;
  h.dimension = n;
  h.counts.assign(std::size_t{1} << n, 0.0);
  for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
    const double w = weights.empty() ? 1.0 : weights[static_cast<std::size_t>(r)];
    h.counts[encode_state({vectors.row(r).data(), n})] += w;
    h.total += w;
  }
  return h;
}

double exact_kl(const ExactDistribution& p, const ExactDistribution& q) {
  check_same_dimension(p.dimension(), q.dimension());
  double kl = 0.0;
  for (std::size_t i = 0; i < p.log_probs.size(); ++i) {
    const double lp = p.log_probs[i];
    kl += std::exp(lp) * (lp - q.log_probs[i]);
  }
  return kl;
}

double exact_kl(const ExactDistribution& p, const StateHistogram& q) {
  check_same_dimension(p.dimension(), q.dimension);
  const double denom = std::log(q.total + static_cast<double>(q.counts.size()));
  double kl = 0.0;
  for (std::size_t i = 0; i < p.log_probs.size(); ++i) {
    const double lp = p.log_probs[i];
    kl += std::exp(lp) * (lp - (std::log(q.counts[i] + 1.0) - denom));
  }
  return kl;
}

double exact_kl(const StateHistogram& p, const ExactDistribution& q) {
  check_same_dimension(p.dimension, q.dimension());
  if (!(p.total > 0.0)) throw ParameterError("exact: empty histogram");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.counts.size(); ++i) {
    if (p.counts[i] <= 0.0) continue;
    const double pi = p.counts[i] / p.total;
    kl += pi * (std::log(pi) - q.log_probs[i]);
  }
  return kl;
}

}  // namespace boltzgen
