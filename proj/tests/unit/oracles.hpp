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

// Reference computations for the unit tests. They are written for clarity,
// not speed, and share no code with the library routines they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "boltzgen/ising.hpp"

namespace oracle {

inline std::vector<int> decode(std::uint64_t x, std::size_t n) {
  std::vector<int> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = (x >> i & 1u) ? 1 : -1;
  return s;
}

// E(s) = -sum_{i<k} J_ik s_i s_k - sum_i b_i s_i.
inline double energy(const boltzgen::IsingModel& m, const std::vector<int>& s) {
  double e = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    e -= m.biases()[static_cast<Eigen::Index>(i)] * s[i];
    for (std::size_t k = i + 1; k < s.size(); ++k) {
      e -= m.couplings()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) * s[i] * s[k];
    }
  }
  return e;
}

inline std::vector<double> all_energies(const boltzgen::IsingModel& m) {
  const std::size_t n = m.size();
  std::vector<double> out(std::size_t{1} << n);
  for (std::uint64_t x = 0; x < out.size(); ++x) out[x] = energy(m, decode(x, n));
  return out;
}

inline double log_z(const boltzgen::IsingModel& m, double beta = 1.0) {
  const auto e = all_energies(m);
  const double lo = *std::min_element(e.begin(), e.end());
  long double s = 0.0L;
  for (double v : e) s += std::exp(static_cast<long double>(-beta * (v - lo)));
  return -beta * lo + static_cast<double>(std::log(s));
}

inline std::vector<double> probs(const boltzgen::IsingModel& m, double beta = 1.0) {
  const auto e = all_energies(m);
  const double lz = log_z(m, beta);
  std::vector<double> p(e.size());
  for (std::size_t x = 0; x < e.size(); ++x) p[x] = std::exp(-beta * e[x] - lz);
  return p;
}

// <s_i s_k> and <s_i> by direct summation.
inline void moments(const boltzgen::IsingModel& m, double beta, Eigen::MatrixXd& corr, Eigen::VectorXd& mean) {
  const std::size_t n = m.size();
  const auto p = probs(m, beta);
  corr = Eigen::MatrixXd::Zero(n, n);
  mean = Eigen::VectorXd::Zero(n);
  for (std::uint64_t x = 0; x < p.size(); ++x) {
    const auto s = decode(x, n);
    for (std::size_t i = 0; i < n; ++i) {
      mean[i] += p[x] * s[i];
      for (std::size_t k = 0; k < n; ++k) corr(i, k) += p[x] * s[i] * s[k];
    }
  }
}

inline boltzgen::IsingModel random_model(std::size_t n, std::uint64_t seed, double scale = 1.0, bool bias = true) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (bias) b[i] = g(rng);
    for (std::size_t k = i + 1; k < n; ++k) j(i, k) = j(k, i) = g(rng);
  }
  return boltzgen::IsingModel(j, b);
}

inline boltzgen::IsingModel ferro2() {
  Eigen::MatrixXd j(2, 2);
  j << 0, 1, 1, 0;
  return boltzgen::IsingModel(j, Eigen::VectorXd::Zero(2));
}

inline std::uint64_t encode(boltzgen::SpinView s) {
  std::uint64_t x = 0;
  for (std::size_t i = 0; i < s.size(); ++i) x |= std::uint64_t{s[i] > 0} << i;
  return x;
}

inline std::vector<double> state_counts(const boltzgen::SpinMatrix& rows) {
  std::vector<double> c(std::size_t{1} << rows.cols(), 0.0);
  for (Eigen::Index r = 0; r < rows.rows(); ++r) c[encode({rows.row(r).data(), static_cast<std::size_t>(rows.cols())})] += 1;
  return c;
}

// |count - N p| <= 4 sqrt(N p (1 - p)) for every state.
inline bool within_multinomial(const std::vector<double>& counts, const std::vector<double>& p, double total,
                               double sigmas = 4.0) {
  for (std::size_t x = 0; x < p.size(); ++x) {
    const double sd = std::sqrt(total * p[x] * (1 - p[x]));
    if (std::abs(counts[x] - total * p[x]) > sigmas * sd + 1e-9) return false;
  }
  return true;
}

}  // namespace oracle
