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

#include "boltzgen/bm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "boltzgen/errors.hpp"
#include "boltzgen/rng.hpp"

namespace boltzgen {

std::string to_string(NegativePhase phase) {
  switch (phase) {
    case NegativePhase::exact: return "exact";
    case NegativePhase::mcmc: return "mcmc";
    case NegativePhase::simcim: return "simcim";
    case NegativePhase::simcim_corrected: return "simcim-corrected";
  }
  return "exact";
}

NegativePhase parse_negative_phase(const std::string& name) {
  if (name == "exact") return NegativePhase::exact;
  if (name == "mcmc") return NegativePhase::mcmc;
  if (name == "simcim") return NegativePhase::simcim;
  if (name == "simcim-corrected" || name == "simcim_corrected") return NegativePhase::simcim_corrected;
  throw ParameterError("bm: unknown negative phase '" + name + "'");
}

BmTrainConfig::BmTrainConfig() {
  calibration.count = negative_samples;
  calibration.bins = 12;
  calibration.min_count = 5;
  calibration.min_significance = 2.0;
}

void BmTrainConfig::validate(std::size_t training_size) const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ParameterError("bm: learning rate must be positive and finite");
  }
  if (epochs == 0) throw ParameterError("bm: epochs must be positive");
  if (minibatch_size > training_size) throw ParameterError("bm: minibatch larger than the training set");
  if (negative_samples == 0) throw ParameterError("bm: negative_samples must be at least 1");
  if (metric_cadence == 0) throw ParameterError("bm: metric cadence must be positive");
  if (!(init_scale >= 0.0)) throw ParameterError("bm: init scale must be non-negative");
  if (negative_phase == NegativePhase::mcmc && chain_length == 0) {
    throw ParameterError("bm: chain length must be positive");
  }
  if (negative_phase == NegativePhase::simcim || negative_phase == NegativePhase::simcim_corrected) {
    schedule.validate();
  }
  if (negative_phase == NegativePhase::simcim_corrected) calibration.validate();
}

namespace {

Moments moments_of(const SpinMatrix& rows, std::span<const double> weights) {
  const auto m = rows.rows();
  const auto n = rows.cols();
  if (m == 0) throw ParameterError("bm: moments need at least one vector");
  if (!weights.empty() && weights.size() != static_cast<std::size_t>(m)) {
    throw DimensionError("bm: one weight per vector required");
  }
  Eigen::MatrixXd x = rows.cast<double>();
  Eigen::VectorXd w = Eigen::VectorXd::Ones(m);
  if (!weights.empty()) w = Eigen::Map<const Eigen::VectorXd>(weights.data(), m);
  const double total = w.sum();
  if (!(total > 0.0)) throw ParameterError("bm: weights must sum to a positive value");
  Moments out;
  out.mean = (x.transpose() * w) / total;
  const Eigen::MatrixXd xw = x.array().colwise() * w.array();
  out.correlation = (x.transpose() * xw) / total;
  out.correlation.diagonal().setZero();
  (void)n;
  return out;
}

}  // namespace

Moments positive_phase(const SpinMatrix& batch, std::span<const double> weights) {
  return moments_of(batch, weights);
}

Moments empirical_moments(const SpinBatch& batch) { return moments_of(batch.samples, {}); }

Moments negative_phase(BmTrainState& state, const BmTrainConfig& config, std::uint64_t seed) {
  const IsingModel& model = state.model;
  const std::size_t m = config.negative_samples;
  switch (config.negative_phase) {
    case NegativePhase::exact: {
      Moments out = exact_moments(enumerate(model, 1.0));
      out.correlation.diagonal().setZero();
      return out;
    }
    case NegativePhase::mcmc:
      state.samples_consumed += m;
      return empirical_moments(mcmc_sample(model, 1.0, m, config.chain_length, seed));
    case NegativePhase::simcim: {
      SamplerSpec spec;
      spec.kind = SamplerKind::simcim;
      spec.schedule = config.schedule;
      spec.seed = seed;
      state.samples_consumed += m;
      return empirical_moments(draw(spec, model, 1.0, m));
    }
    case NegativePhase::simcim_corrected: {
      SamplerSpec spec;
      spec.kind = SamplerKind::simcim;
      spec.schedule = config.schedule;
      spec.seed = derive_seed(seed, 0, stream_tag::kThermo);
      const ThermometryOptions& cal = config.calibration;
      state.samples_consumed += 2 * cal.count;
      try {
        state.native_beta = estimate_beta(model, spec, cal).native_beta();
      } catch (const CalibrationError&) {
        ++state.calibration_failures;
      }
      const double native = state.native_beta.value_or(1.0);
      const AnnealSchedule schedule = AnnealSchedule::resolve(config.schedule, model);
      state.samples_consumed += m;
      return empirical_moments(
          corrected_sample(model, 1.0, schedule, native, m, derive_seed(seed, 1, stream_tag::kSimcim)));
    }
  }
  throw ParameterError("bm: unknown negative phase");
}

void apply_gradient(BmTrainState& state, const Moments& positive, const Moments& negative,
                    double learning_rate) {
  const auto n = static_cast<Eigen::Index>(state.model.size());
  if (positive.mean.size() != n || negative.mean.size() != n) {
    throw DimensionError("bm: moment dimension does not match the model");
  }
  Eigen::MatrixXd dj = learning_rate * (positive.correlation - negative.correlation);
  dj.diagonal().setZero();
  // Both moment matrices are symmetric up to rounding; average to keep J exact.
  dj = 0.5 * (dj + dj.transpose()).eval();
  Eigen::MatrixXd j = state.model.couplings() + dj;
  Eigen::VectorXd b = state.model.biases() + learning_rate * (positive.mean - negative.mean);
  if (!j.allFinite() || !b.allFinite()) throw NumericError("bm: update produced non-finite parameters");
  state.model = IsingModel(std::move(j), std::move(b));
}

void bm_update(BmTrainState& state, const SpinMatrix& minibatch, std::span<const double> weights,
               const BmTrainConfig& config) {
  if (static_cast<std::size_t>(minibatch.cols()) != state.model.size()) {
    throw DimensionError("bm: minibatch dimension does not match the model");
  }
  const Moments positive = positive_phase(minibatch, weights);
  const Moments negative =
      negative_phase(state, config, derive_seed(config.seed, state.update_count, stream_tag::kTrain));
  apply_gradient(state, positive, negative, config.learning_rate);
  ++state.update_count;
}

IsingModel initial_model(std::size_t n, double scale, std::uint64_t seed) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  if (scale > 0.0) {
    Engine rng = make_stream(seed, 0, stream_tag::kInit);
    std::normal_distribution<double> gauss(0.0, scale);
    for (Eigen::Index i = 0; i < j.rows(); ++i) {
      for (Eigen::Index k = i + 1; k < j.cols(); ++k) {
        j(i, k) = j(k, i) = gauss(rng);
      }
    }
  }
  return IsingModel(std::move(j), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)));
}

BmTrainState train(const SpinDataset& data, const BmTrainConfig& config, const MetricsFn& metrics,
                   std::optional<IsingModel> init, const std::function<void(const BmTrainState&)>& on_update) {
  data.validate();
  config.validate(data.size());
  BmTrainState state(init ? std::move(*init) : initial_model(data.dimension(), config.init_scale, config.seed));
  if (state.model.size() != data.dimension()) {
    throw DimensionError("bm: initial model dimension does not match the data");
  }
  auto record = [&] {
    HistoryEntry entry;
    entry.update_count = state.update_count;
    entry.epoch = state.epoch;
    entry.native_beta = state.native_beta;
    if (metrics) metrics(state, entry);
    state.history.push_back(entry);
  };
  record();

  const std::vector<double> all_weights = data.weights_as_double();
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.minibatch_size == 0) {
      bm_update(state, data.vectors, all_weights, config);
      state.epoch = epoch + 1;
      if (on_update) on_update(state);
      if (state.update_count % config.metric_cadence == 0) record();
      continue;
    }
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Engine rng = make_stream(config.seed, epoch, stream_tag::kShuffle);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(rng)]);
    }
    const std::size_t batches = data.size() / config.minibatch_size;  // a short tail is dropped
    for (std::size_t k = 0; k < batches; ++k) {
      const SpinDataset part =
          data.subset(std::span<const std::size_t>(order).subspan(k * config.minibatch_size, config.minibatch_size));
      bm_update(state, part.vectors, part.weights_as_double(), config);
      if (k + 1 == batches) state.epoch = epoch + 1;
      if (on_update) on_update(state);
      if (state.update_count % config.metric_cadence == 0) record();
    }
  }
  return state;
}

double avg_log_likelihood(const IsingModel& model, const SpinDataset& data, double log_z) {
  if (data.dimension() != model.size()) throw DimensionError("bm: dataset dimension does not match the model");
  const Eigen::VectorXd e = energies(model, data.vectors);
  double total = 0.0;
  double s = 0.0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const double w = data.weights[k];
    s += w * (-e[static_cast<Eigen::Index>(k)] - log_z);
    total += w;
  }
  return s / total;
}

MetricsFn exact_metrics(const SpinDataset& data) {
  const StateHistogram truth = StateHistogram::from_weighted(data.vectors, data.weights_as_double());
  return [data, truth](const BmTrainState& state, HistoryEntry& entry) {
    const ExactDistribution dist = enumerate(state.model, 1.0);
    entry.avg_log_likelihood = avg_log_likelihood(state.model, data, dist.log_z);
    entry.kl = exact_kl(truth, dist);
  };
}

namespace {

void check_classifier(const IsingModel& model) {
  if (model.size() != kMnistSpins) {
    throw DimensionError("bm: classification needs a " + std::to_string(kMnistSpins) + "-spin model");
  }
}

// Label-dependent part of E(x, y_c): -x^T J_xy y_c - 1/2 y_c^T J_yy y_c - b_y^T y_c,
// given h = J_xy^T x. Terms depending only on x are shared by every c.
int best_label(const IsingModel& model, const Eigen::VectorXd& h) {
  const auto& j = model.couplings();
  const auto& b = model.biases();
  const auto p = static_cast<Eigen::Index>(kMnistPixels);
  int best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  Eigen::VectorXd y(static_cast<Eigen::Index>(kMnistLabels));
  for (int c = 0; c < static_cast<int>(kMnistLabels); ++c) {
    y.setConstant(-1.0);
    y[c] = 1.0;
    const double score = -h.dot(y) - 0.5 * y.dot(j.block(p, p, y.size(), y.size()) * y) -
                         b.segment(p, y.size()).dot(y);
    if (score < best_score) {
      best_score = score;
      best = c;
    }
  }
  return best;
}

}  // namespace

int classify(const IsingModel& model, SpinView bitmap) {
  check_classifier(model);
  if (bitmap.size() != kMnistPixels && bitmap.size() != kMnistSpins) {
    throw DimensionError("bm: bitmap must hold 784 pixels");
  }
  Eigen::VectorXd x(static_cast<Eigen::Index>(kMnistPixels));
  for (std::size_t i = 0; i < kMnistPixels; ++i) x[static_cast<Eigen::Index>(i)] = bitmap[i];
  const auto p = static_cast<Eigen::Index>(kMnistPixels);
  const Eigen::VectorXd h = model.couplings().block(0, p, p, kMnistLabels).transpose() * x;
  return best_label(model, h);
}

std::vector<int> classify_batch(const IsingModel& model, const SpinMatrix& rows) {
  check_classifier(model);
  if (static_cast<std::size_t>(rows.cols()) < kMnistPixels) {
    throw DimensionError("bm: rows must hold at least 784 pixels");
  }
  const auto p = static_cast<Eigen::Index>(kMnistPixels);
  const Eigen::MatrixXd x = rows.leftCols(p).cast<double>();
  const Eigen::MatrixXd h = x * model.couplings().block(0, p, p, kMnistLabels);
  std::vector<int> out(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index r = 0; r < rows.rows(); ++r) out[static_cast<std::size_t>(r)] = best_label(model, h.row(r).transpose());
  return out;
}

double accuracy(const IsingModel& model, const SpinDataset& data) {
  if (!data.labels) throw ParameterError("bm: accuracy needs a labeled dataset");
  if (data.size() == 0) throw ParameterError("bm: accuracy needs a non-empty dataset");
  const std::vector<int> predicted = classify_batch(model, data.vectors);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < predicted.size(); ++k) hits += predicted[k] == (*data.labels)[k];
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

SpinBatch generate(const IsingModel& model, int digit, const ScheduleConfig& schedule, std::size_t count,
                   std::uint64_t seed, double scale) {
  check_classifier(model);
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ParameterError("bm: generation scale must be positive");
  const std::vector<std::int8_t> block = label_block(digit);
  std::map<std::size_t, int> clamped;
  for (std::size_t c = 0; c < kMnistLabels; ++c) clamped[kMnistPixels + c] = block[c];
  const ClampedModel reduced = clamp_spins(model, clamped);
  const AnnealSchedule resolved = AnnealSchedule::resolve(schedule, reduced.model);
  const IsingModel target = scale == 1.0 ? reduced.model : scale_model(reduced.model, scale);
  SpinBatch batch = anneal_batch(target, resolved, count, seed).batch;
  batch.attach_energies(reduced.model);
  batch.source = "simcim-generate";
  return batch;
}

}  // namespace boltzgen
