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
#include <limits>
#include <set>

#include "boltzgen/errors.hpp"
#include "boltzgen/ising.hpp"
#include "oracles.hpp"

using namespace boltzgen;

namespace {

std::vector<std::int8_t> spins(std::initializer_list<int> v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("energy of the two-spin ferromagnet") {
  const IsingModel m = oracle::ferro2();
  CHECK(energy(m, spins({1, 1})) == -1.0);
  CHECK(energy(m, spins({1, -1})) == 1.0);
}

TEST_CASE("energy with pure biases") {
  Eigen::Vector3d b(1, -2, 3);
  const IsingModel m(Eigen::MatrixXd::Zero(3, 3), b);
  CHECK(energy(m, spins({1, 1, -1})) == 4.0);
}

TEST_CASE("energy rejects a wrong dimension") {
  CHECK_THROWS_AS(energy(oracle::ferro2(), spins({1, 1, 1})), DimensionError);
}

TEST_CASE("batch energies agree with single evaluations and the oracle") {
  const IsingModel m = oracle::random_model(9, 3);
  SpinMatrix rows(1u << 9, 9);
  for (std::uint64_t x = 0; x < (1u << 9); ++x) {
    const auto s = oracle::decode(x, 9);
    for (int i = 0; i < 9; ++i) rows(static_cast<Eigen::Index>(x), i) = static_cast<std::int8_t>(s[i]);
  }
  const Eigen::VectorXd e = energies(m, rows);
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    const SpinView row{rows.row(r).data(), 9};
    CHECK(e[r] == energy(m, row));
    CHECK(e[r] == doctest::Approx(oracle::energy(m, oracle::decode(static_cast<std::uint64_t>(r), 9))).epsilon(1e-12));
  }
}

TEST_CASE("model construction validates its invariants") {
  Eigen::MatrixXd asym(2, 2);
  asym << 0, 1, 0.5, 0;
  CHECK_THROWS_AS(IsingModel(asym, Eigen::VectorXd::Zero(2)), ParameterError);
  Eigen::MatrixXd diag(2, 2);
  diag << 1, 0, 0, 0;
  CHECK_THROWS_AS(IsingModel(diag, Eigen::VectorXd::Zero(2)), ParameterError);
  Eigen::MatrixXd nan = Eigen::MatrixXd::Zero(2, 2);
  nan(0, 1) = nan(1, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(IsingModel(nan, Eigen::VectorXd::Zero(2)), ParameterError);
  Eigen::VectorXd inf = Eigen::VectorXd::Zero(2);
  inf[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(IsingModel(Eigen::MatrixXd::Zero(2, 2), inf), ParameterError);
  CHECK_THROWS_AS(IsingModel(Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Zero(3)), DimensionError);
}

TEST_CASE("energy is even in s without biases") {
  const IsingModel m = oracle::random_model(10, 5, 1.0, false);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::int8_t> s(10), flipped(10);
    for (int i = 0; i < 10; ++i) {
      s[i] = rng() & 1 ? 1 : -1;
      flipped[i] = static_cast<std::int8_t>(-s[i]);
    }
    CHECK(energy(m, s) == energy(m, flipped));
  }
}

TEST_CASE("scale_model") {
  const IsingModel m = oracle::random_model(6, 8);
  CHECK(scale_model(m, 1.0) == m);
  const IsingModel doubled = scale_model(m, 2.0);
  const auto s = spins({1, -1, 1, 1, -1, -1});
  CHECK(energy(doubled, s) == doctest::Approx(2.0 * energy(m, s)).epsilon(1e-14));
  const IsingModel ab = scale_model(scale_model(m, 0.5), 3.0);
  const IsingModel direct = scale_model(m, 1.5);
  CHECK(ab.couplings().isApprox(direct.couplings(), 1e-15));
  CHECK(ab.biases().isApprox(direct.biases(), 1e-15));
  CHECK_THROWS_AS(scale_model(m, 0.0), ParameterError);
  CHECK_THROWS_AS(scale_model(m, -1.0), ParameterError);
  CHECK_THROWS_AS(scale_model(m, std::numeric_limits<double>::infinity()), ParameterError);
}

TEST_CASE("clamping nothing leaves the model unchanged") {
  const IsingModel m = oracle::random_model(4, 2);
  const ClampedModel c = clamp_spins(m, {});
  CHECK(c.model == m);
  CHECK(c.offset == 0.0);
}

TEST_CASE("clamping one spin of the ferromagnet folds the coupling into a bias") {
  const ClampedModel c = clamp_spins(oracle::ferro2(), {{1, 1}});
  REQUIRE(c.model.size() == 1);
  CHECK(c.model.biases()[0] == 1.0);
  CHECK(c.offset == 0.0);
}

TEST_CASE("clamped energies match the full model on every free assignment") {
  for (std::size_t n : {6u, 9u, 12u}) {
    const IsingModel m = oracle::random_model(n, 40 + n);
    const std::map<std::size_t, int> clamped = {{1, 1}, {n - 2, -1}, {n / 2, 1}};
    const ClampedModel c = clamp_spins(m, clamped);
    const std::size_t free = n - clamped.size();
    REQUIRE(c.model.size() == free);
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << free); ++x) {
      const auto s = oracle::decode(x, free);
      const std::vector<std::int8_t> fs(s.begin(), s.end());
      const std::vector<std::int8_t> full = merge_clamped(c, clamped, fs);
      const std::vector<int> full_int(full.begin(), full.end());
      CHECK(energy(c.model, fs) + c.offset == doctest::Approx(oracle::energy(m, full_int)).epsilon(1e-12));
    }
  }
}

TEST_CASE("clamp_spins validates indices and values") {
  const IsingModel m = oracle::random_model(3, 1);
  CHECK_THROWS_AS(clamp_spins(m, {{5, 1}}), ParameterError);
  CHECK_THROWS_AS(clamp_spins(m, {{0, 0}}), ParameterError);
  CHECK_THROWS_AS(make_clamp_map({{0, 1}, {0, -1}}), ParameterError);
  CHECK(make_clamp_map({{2, 1}, {0, -1}}).size() == 2);
}

TEST_CASE("fingerprints distinguish models") {
  const IsingModel a = oracle::random_model(5, 1);
  const IsingModel b = oracle::random_model(5, 2);
  CHECK(a.fingerprint() == oracle::random_model(5, 1).fingerprint());
  CHECK(a.fingerprint() != b.fingerprint());
}

TEST_CASE("random ternary benchmark model") {
  const IsingModel m = random_ternary_model(16, 7);
  CHECK(m == random_ternary_model(16, 7));
  CHECK_FALSE(m == random_ternary_model(16, 8));
  std::set<double> values;
  for (int i = 0; i < 16; ++i) {
    for (int k = 0; k < 16; ++k) {
      if (i != k) values.insert(m.couplings()(i, k));
    }
  }
  CHECK(values == std::set<double>{-1.0, 0.0, 1.0});
  CHECK(m.biases().isZero());
}

TEST_CASE("validate_spins rejects values other than +-1") {
  SpinMatrix s(1, 2);
  s << 1, 0;
  CHECK_THROWS_AS(validate_spins(s), ParameterError);
}
