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

#include <doctest.h>

#include <cmath>

#include "boltzgen/bm.hpp"
#include "boltzgen/datasets.hpp"
#include "boltzgen/errors.hpp"
#include "boltzgen/exact.hpp"
#include "oracles.hpp"

using namespace boltzgen;

namespace {

SpinDataset two_vectors() {
  SpinDataset d;
  d.vectors.resize(2, 3);
  d.vectors << 1, 1, -1, 1, -1, -1;
  d.weights = {1, 1};
  return d;
}

}  // namespace

TEST_CASE("positive phase of two vectors") {
  const SpinDataset d = two_vectors();
  const Moments m = positive_phase(d.vectors);
  CHECK(m.mean[0] == 1.0);
  CHECK(m.mean[1] == 0.0);
  CHECK(m.mean[2] == -1.0);
  CHECK(m.correlation(0, 1) == 0.0);
  CHECK(m.correlation(0, 2) == -1.0);
  CHECK(m.correlation(1, 2) == 0.0);
  CHECK(m.correlation(0, 0) == 0.0);
  // A weight of 3 on the first vector equals listing it three times.
  const std::vector<double> w{3.0, 1.0};
  const Moments mw = positive_phase(d.vectors, w);
  CHECK(mw.mean[1] == doctest::Approx(0.5));
}

TEST_CASE("the first exact update from the zero model is xi times the data moments") {
  const SpinDataset d = two_vectors();
  BmTrainConfig c;
  c.learning_rate = 0.1;
  BmTrainState s(IsingModel::zeros(3));
  bm_update(s, d.vectors, d.weights_as_double(), c);
  // At J = b = 0 the model moments vanish.
  const Moments pos = positive_phase(d.vectors);
  for (int i = 0; i < 3; ++i) {
    CHECK(s.model.biases()[i] == doctest::Approx(0.1 * pos.mean[i]));
    for (int k = 0; k < 3; ++k) CHECK(s.model.couplings()(i, k) == doctest::Approx(0.1 * pos.correlation(i, k)));
  }
  CHECK(s.update_count == 1);
}

TEST_CASE("data drawn from the model is a stationary point") {
  const IsingModel m = oracle::random_model(5, 9, 0.5);
  const auto p = oracle::probs(m);
  SpinDataset d;
  d.vectors.resize(32, 5);
  std::vector<double> w(32);
  std::vector<std::int8_t> s(5);
  for (std::uint64_t x = 0; x < 32; ++x) {
    decode_state(x, s);
    for (int i = 0; i < 5; ++i) d.vectors(static_cast<Eigen::Index>(x), i) = s[i];
    w[x] = p[x];
  }
  BmTrainConfig c;
  BmTrainState st(m);
  bm_update(st, d.vectors, w, c);
  CHECK((st.model.couplings() - m.couplings()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((st.model.biases() - m.biases()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("updates keep the couplings symmetric with zero diagonal") {
  for (NegativePhase phase : {NegativePhase::exact, NegativePhase::mcmc, NegativePhase::simcim}) {
    BmTrainConfig c;
    c.negative_phase = phase;
    c.negative_samples = 20;
    c.chain_length = 5;
    c.schedule.iterations = 50;
    c.epochs = 3;
    const BmTrainState s = train(bas_dataset(), c);
    const Eigen::MatrixXd& j = s.model.couplings();
    CHECK(j.isApprox(j.transpose(), 0.0));
    CHECK(j.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK(s.update_count == 3);
  }
}

TEST_CASE("exact training on BAS increases the likelihood") {
  BmTrainConfig c;
  c.epochs = 100;
  c.metric_cadence = 10;
  const SpinDataset bas = bas_dataset();
  const BmTrainState s = train(bas, c, exact_metrics(bas));
  REQUIRE(s.history.size() == 11);
  CHECK(s.history.front().update_count == 0);
  CHECK(*s.history.back().avg_log_likelihood > *s.history.front().avg_log_likelihood + 1.0);
  CHECK(*s.history.back().kl < *s.history.front().kl);
  for (std::size_t k = 1; k < s.history.size(); ++k) {
    CHECK(*s.history[k].avg_log_likelihood >= *s.history[k - 1].avg_log_likelihood - 1e-9);
  }
}

TEST_CASE("average log likelihood matches the oracle") {
  const IsingModel m = oracle::random_model(16, 3, 0.2);
  const SpinDataset bas = bas_dataset();
  double total = 0.0, weight = 0.0;
  const double lz = oracle::log_z(m);
  for (std::size_t r = 0; r < bas.size(); ++r) {
    std::vector<int> v(16);
    for (int i = 0; i < 16; ++i) v[i] = bas.vectors(static_cast<Eigen::Index>(r), i);
    total += bas.weights[r] * (-oracle::energy(m, v) - lz);
    weight += bas.weights[r];
  }
  CHECK(avg_log_likelihood(m, bas, lz) == doctest::Approx(total / weight));
}

TEST_CASE("training is deterministic in the seed") {
  BmTrainConfig c;
  c.negative_phase = NegativePhase::simcim_corrected;
  c.negative_samples = 40;
  c.calibration.count = 40;
  c.schedule.iterations = 100;
  c.epochs = 2;
  c.seed = 4;
  const BmTrainState a = train(bas_dataset(), c);
  const BmTrainState b = train(bas_dataset(), c);
  CHECK(a.model.couplings() == b.model.couplings());
  CHECK(a.samples_consumed == b.samples_consumed);
  CHECK(a.samples_consumed == 2 * (40 + 2 * 40));
}

TEST_CASE("train config validation") {
  BmTrainConfig c;
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(c.validate(32), ParameterError);
  c = {};
  c.minibatch_size = 100;
  CHECK_THROWS_AS(c.validate(32), ParameterError);
  c = {};
  c.epochs = 0;
  CHECK_THROWS_AS(c.validate(32), ParameterError);
  CHECK(parse_negative_phase("simcim-corrected") == NegativePhase::simcim_corrected);
  CHECK_THROWS_AS(parse_negative_phase("pcd"), ParameterError);
}

TEST_CASE("classification reads the label with the lowest energy") {
  SUBCASE("label bias alone decides") {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(kMnistSpins);
    b[kMnistPixels + 3] = 1.0;
    const IsingModel m(Eigen::MatrixXd::Zero(kMnistSpins, kMnistSpins), b);
    std::vector<std::int8_t> x(kMnistPixels, 1);
    CHECK(classify(m, x) == 3);
  }
  SUBCASE("ties go to the smallest digit") {
    std::vector<std::int8_t> x(kMnistPixels, -1);
    CHECK(classify(IsingModel::zeros(kMnistSpins), x) == 0);
  }
  SUBCASE("pixel-label couplings") {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(kMnistSpins, kMnistSpins);
    j(0, kMnistPixels + 7) = j(kMnistPixels + 7, 0) = 0.5;
    const IsingModel m(j, Eigen::VectorXd::Zero(kMnistSpins));
    std::vector<std::int8_t> x(kMnistPixels, 1);
    CHECK(classify(m, x) == 7);
    x[0] = -1;
    CHECK(classify(m, x) != 7);
  }
  SUBCASE("wrong sizes") {
    std::vector<std::int8_t> x(10, 1);
    CHECK_THROWS_AS(classify(IsingModel::zeros(kMnistSpins), x), DimensionError);
    std::vector<std::int8_t> y(kMnistPixels, 1);
    CHECK_THROWS(classify(IsingModel::zeros(20), y));
  }
}

TEST_CASE("generation from the zero model gives unbiased pixels") {
  const SpinBatch b = generate(IsingModel::zeros(kMnistSpins), 4, {}, 20, 1);
  CHECK(b.size() == 20);
  CHECK(b.dimension() == kMnistPixels);
  const double mean = b.samples.cast<double>().mean();
  CHECK(std::abs(mean) < 4.0 / std::sqrt(20.0 * kMnistPixels));
  CHECK_THROWS_AS(generate(IsingModel::zeros(kMnistSpins), 10, {}, 1, 1), ParameterError);
}
