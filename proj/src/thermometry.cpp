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

#include "boltzgen/thermometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "boltzgen/errors.hpp"
#include "boltzgen/rng.hpp"

namespace boltzgen {

std::int64_t EnergyHistogram::bin_of(double energy) const {
  return static_cast<std::int64_t>(std::floor(energy / bin_width));
}

std::uint64_t EnergyHistogram::count_at(std::int64_t bin) const {
  if (bin < first_bin || bin > last_bin()) return 0;
  return counts[static_cast<std::size_t>(bin - first_bin)];
}

std::vector<double> EnergyHistogram::edges() const {
  std::vector<double> out(counts.size() + 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = static_cast<double>(first_bin + static_cast<std::int64_t>(k)) * bin_width;
  }
  return out;
}

EnergyHistogram histogram_energies(std::span<const double> energies, double bin_width) {
  if (energies.empty()) throw ParameterError("thermometry: cannot histogram an empty batch");
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
    throw ParameterError("thermometry: bin width must be positive and finite");
  }
  EnergyHistogram h;
  h.bin_width = bin_width;
  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t hi = std::numeric_limits<std::int64_t>::min();
  for (double e : energies) {
    if (!std::isfinite(e)) throw NumericError("thermometry: non-finite energy");
    const std::int64_t k = h.bin_of(e);
    lo = std::min(lo, k);
    hi = std::max(hi, k);
  }
  h.first_bin = lo;
  h.counts.assign(static_cast<std::size_t>(hi - lo + 1), 0);
  for (double e : energies) ++h.counts[static_cast<std::size_t>(h.bin_of(e) - lo)];
  h.total = energies.size();
  return h;
}

EnergyHistogram histogram_energies(const SpinBatch& batch, const IsingModel& model, double bin_width) {
  if (batch.size() == 0) throw ParameterError("thermometry: cannot histogram an empty batch");
  const Eigen::VectorXd e = energies(model, batch.samples);
  return histogram_energies(std::span<const double>(e.data(), static_cast<std::size_t>(e.size())), bin_width);
}

LogRatioSeries delta_log_ratio(const EnergyHistogram& h1, const EnergyHistogram& h2,
                               std::size_t min_count) {
  if (h1.bin_width != h2.bin_width) {
    throw ParameterError("thermometry: histograms have different bin widths");
  }
  if (min_count == 0) throw ParameterError("thermometry: min_count must be positive");
  std::vector<std::int64_t> shared;
  const std::int64_t lo = std::max(h1.first_bin, h2.first_bin);
  const std::int64_t hi = std::min(h1.last_bin(), h2.last_bin());
  for (std::int64_t k = lo; k <= hi; ++k) {
    if (h1.count_at(k) >= min_count && h2.count_at(k) >= min_count) shared.push_back(k);
  }
  if (shared.size() < 3) {
    throw InsufficientOverlapError("thermometry: only " + std::to_string(shared.size()) +
                                   " energy bins hold at least " + std::to_string(min_count) +
                                   " samples in both sets; need 3");
  }
  // Ties resolve to the lowest-energy bin.
  std::int64_t ref = shared.front();
  for (std::int64_t k : shared) {
    if (h1.count_at(k) + h2.count_at(k) > h1.count_at(ref) + h2.count_at(ref)) ref = k;
  }

  auto log_frac = [](const EnergyHistogram& h, std::int64_t k) {
    return std::log(static_cast<double>(h.count_at(k))) - std::log(static_cast<double>(h.total));
  };
  auto inv = [](const EnergyHistogram& h, std::int64_t k) { return 1.0 / static_cast<double>(h.count_at(k)); };

  LogRatioSeries series;
  series.reference_energy = h1.center(ref);
  series.reference_weight = 1.0 / (inv(h1, ref) + inv(h2, ref));
  const double ref_l = log_frac(h1, ref) - log_frac(h2, ref);
  for (std::int64_t k : shared) {
    if (k == ref) continue;
    LogRatioPoint p;
    p.delta_e = h1.center(k) - h1.center(ref);
    p.delta_l = (log_frac(h1, k) - log_frac(h2, k)) - ref_l;
    p.weight = 1.0 / (inv(h1, k) + inv(h2, k));
    series.points.push_back(p);
  }
  return series;
}

std::string to_string(FitWeighting weighting) {
  return weighting == FitWeighting::unweighted ? "unweighted" : "inverse-variance";
}

FitWeighting parse_fit_weighting(const std::string& name) {
  if (name == "unweighted") return FitWeighting::unweighted;
  if (name == "inverse-variance" || name == "weighted") return FitWeighting::inverse_variance;
  throw ParameterError("thermometry: unknown fit weighting '" + name + "'");
}

std::string to_string(ThermometryMethod method) {
  return method == ThermometryMethod::pseudo_likelihood ? "pseudo-likelihood" : "histogram";
}

ThermometryMethod parse_thermometry_method(const std::string& name) {
  if (name == "histogram") return ThermometryMethod::histogram;
  if (name == "pseudo-likelihood") return ThermometryMethod::pseudo_likelihood;
  throw ParameterError("thermometry: unknown method '" + name + "'");
}

LineFit fit_log_ratio(const LogRatioSeries& series, FitWeighting weighting) {
  std::vector<LogRatioPoint> pts = series.points;
  pts.push_back({0.0, 0.0, series.reference_weight});
  const bool weighted = weighting == FitWeighting::inverse_variance;

  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (const auto& p : pts) {
    const double w = weighted ? p.weight : 1.0;
    sw += w;
    sx += w * p.delta_e;
    sy += w * p.delta_l;
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : pts) {
    const double w = weighted ? p.weight : 1.0;
    sxx += w * (p.delta_e - mx) * (p.delta_e - mx);
    sxy += w * (p.delta_e - mx) * (p.delta_l - my);
    syy += w * (p.delta_l - my) * (p.delta_l - my);
  }
  LineFit fit;
  fit.points = pts.size();
  if (!(sxx > 0.0)) throw InsufficientOverlapError("thermometry: all qualifying bins share one energy");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (const auto& p : pts) {
    const double w = weighted ? p.weight : 1.0;
    const double r = p.delta_l - fit.slope * p.delta_e - fit.intercept;
    rss += w * r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - rss / syy, 0.0, 1.0) : 0.0;
  // Known Poisson variances when weighted; residual scatter otherwise.
  const double dof = static_cast<double>(pts.size()) - 2.0;
  fit.slope_stderr = weighted ? std::sqrt(1.0 / sxx) : std::sqrt(rss / dof / sxx);
  return fit;
}

void ThermometryOptions::validate() const {
  if (!(scale_ratio > 0.0 && scale_ratio < 1.0)) {
    throw ParameterError("thermometry: scale ratio must lie in (0, 1)");
  }
  if (count < 2) throw ParameterError("thermometry: need at least two samples per batch");
  if (bin_width && !(*bin_width > 0.0)) throw ParameterError("thermometry: bin width must be positive");
  if (!bin_width && bins == 0) throw ParameterError("thermometry: bin count must be positive");
  if (min_count == 0) throw ParameterError("thermometry: min_count must be positive");
  if (!(reference_scale > 0.0) || !std::isfinite(reference_scale)) {
    throw ParameterError("thermometry: reference scale must be positive and finite");
  }
}

ThermometryRun estimate_from_batches(const IsingModel& model, const SpinBatch& first,
                                     const SpinBatch& second, const ThermometryOptions& options) {
  options.validate();
  const Eigen::VectorXd e1 = energies(model, first.samples);
  const Eigen::VectorXd e2 = energies(model, second.samples);
  double width = 0.0;
  if (options.bin_width) {
    width = *options.bin_width;
  } else {
    const double lo = std::min(e1.minCoeff(), e2.minCoeff());
    const double hi = std::max(e1.maxCoeff(), e2.maxCoeff());
    width = (hi - lo) / static_cast<double>(options.bins);
    if (!(width > 0.0)) {
      throw InsufficientOverlapError("thermometry: every sample has the same energy");
    }
  }

  ThermometryRun run;
  run.histogram1 = histogram_energies(std::span<const double>(e1.data(), e1.size()), width);
  run.histogram2 = histogram_energies(std::span<const double>(e2.data(), e2.size()), width);
  run.series = delta_log_ratio(run.histogram1, run.histogram2, options.min_count);
  const LineFit fit = fit_log_ratio(run.series, options.weighting);

  TemperatureEstimate& est = run.estimate;
  est.scale_ratio = options.scale_ratio;
  est.slope = fit.slope;
  est.intercept = fit.intercept;
  est.r_squared = fit.r_squared;
  est.slope_stderr = fit.slope_stderr;
  est.points_used = fit.points;
  est.reference_scale = options.reference_scale;
  est.bin_width = width;
  est.model_fingerprint = model.fingerprint();
  est.samples_consumed = first.size() + second.size();
  if (!(fit.slope > options.min_significance * fit.slope_stderr) || !(fit.slope > 0.0)) {
    throw CalibrationError("thermometry: fitted slope " + std::to_string(fit.slope) + " +- " +
                           std::to_string(fit.slope_stderr) +
                           " is not significantly positive; the samples do not look Boltzmann");
  }
  const double r = options.scale_ratio;
  est.beta1 = fit.slope * r / (1.0 - r);
  est.beta2 = est.beta1 / r;
  return run;
}

ThermometryRun estimate_beta_detailed(const IsingModel& model, const SamplerSpec& sampler,
                                      const ThermometryOptions& options) {
  options.validate();
  const double scale1 = options.reference_scale;
  const double scale2 = options.reference_scale / options.scale_ratio;
  const SpinBatch a =
      draw(sampler.with_seed(derive_seed(sampler.seed, 0, stream_tag::kThermo)), model, scale1, options.count);
  const SpinBatch b =
      draw(sampler.with_seed(derive_seed(sampler.seed, 1, stream_tag::kThermo)), model, scale2, options.count);
  ThermometryRun run = estimate_from_batches(model, a, b, options);
  run.estimate.sampler = sampler.kind;
  if (sampler.kind == SamplerKind::simcim) {
    run.estimate.schedule_fingerprint = AnnealSchedule::resolve(sampler.schedule, model).fingerprint();
  }
  return run;
}

TemperatureEstimate estimate_beta(const IsingModel& model, const SamplerSpec& sampler,
                                  const ThermometryOptions& options) {
  return estimate_beta_detailed(model, sampler, options).estimate;
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

PseudoLikelihoodFit pseudo_likelihood_beta(const IsingModel& model, const SpinBatch& batch) {
  if (batch.size() == 0) throw ParameterError("thermometry: pseudo-likelihood needs a non-empty batch");
  if (batch.dimension() != model.size()) {
    throw DimensionError("thermometry: batch dimension does not match the model");
  }
  // x = 2 s_k h_k for every spin of every sample; the objective is
  // sum ln sigmoid(beta x), with gradient sum x sigmoid(-beta x).
  const Eigen::MatrixXd s = batch.samples.cast<double>();
  const Eigen::MatrixXd fields = (s * model.couplings()).rowwise() + model.biases().transpose();
  const Eigen::ArrayXXd x = 2.0 * s.array() * fields.array();
  if (!(x.sum() > 0.0)) {
    throw CalibrationError("thermometry: the samples are no colder than uniform; "
                           "the pseudo-likelihood beta is not positive");
  }
  if (!(x.minCoeff() < 0.0)) {
    throw CalibrationError("thermometry: every spin is aligned with its local field; "
                           "the pseudo-likelihood has no finite maximum");
  }
  auto gradient = [&](double beta, double& curvature) {
    double g = 0.0;
    curvature = 0.0;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      const double xk = x(k);
      const double q = sigmoid(-beta * xk);
      g += xk * q;
      curvature += xk * xk * q * (1.0 - q);
    }
    return g;
  };

  double curvature = 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (gradient(hi, curvature) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw CalibrationError("thermometry: the pseudo-likelihood beta diverges");
  }
  // Newton steps, falling back to bisection whenever a step leaves the bracket.
  double beta = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double g = gradient(beta, curvature);
    if (g > 0.0) lo = beta; else hi = beta;
    double next = curvature > 0.0 ? beta + g / curvature : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const bool done = std::abs(next - beta) <= 1e-14 * std::max(1.0, beta) || hi - lo <= 1e-15 * hi;
    beta = next;
    if (done) break;
  }
  gradient(beta, curvature);

  PseudoLikelihoodFit fit;
  fit.beta = beta;
  fit.stderr_beta = curvature > 0.0 ? 1.0 / std::sqrt(curvature) : std::numeric_limits<double>::infinity();
  fit.samples = batch.size();
  return fit;
}

}  // namespace boltzgen
