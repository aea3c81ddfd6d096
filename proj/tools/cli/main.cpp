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

// boltzgen command-line entry point. Every subcommand writes its data files
// plus manifest.json into --out-dir; re-running with `--config manifest.json`
// reproduces the data files byte for byte.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "boltzgen/ais.hpp"
#include "boltzgen/bm.hpp"
#include "boltzgen/datasets.hpp"
#include "boltzgen/errors.hpp"
#include "boltzgen/exact.hpp"
#include "boltzgen/io.hpp"
#include "boltzgen/ising.hpp"
#include "boltzgen/parallel.hpp"
#include "boltzgen/rng.hpp"
#include "boltzgen/samplers.hpp"
#include "boltzgen/simcim.hpp"
#include "boltzgen/thermometry.hpp"
#include "json_config.hpp"

namespace fs = std::filesystem;
using namespace boltzgen;
using boltzgen::cli::JsonConfig;
using boltzgen::cli::resolved_options;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

const std::vector<std::string> kSubcommands = {"sample", "thermo", "logz", "train",
                                               "classify", "generate", "bas", "bench16"};

struct Globals {
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  std::string out_dir = ".";
};

/// Collects output files for the manifest; refuses paths outside out_dir.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(fs::absolute(std::move(dir)).lexically_normal()) {}

  fs::path resolve(const std::string& name) const {
    const fs::path rel(name);
    if (name.empty() || rel.is_absolute()) {
      throw ParameterError("cli: output '" + name + "' must be a relative path inside --out-dir");
    }
    const fs::path full = (dir_ / rel).lexically_normal();
    const fs::path back = full.lexically_relative(dir_);
    if (back.empty() || *back.begin() == "..") {
      throw ParameterError("cli: output '" + name + "' escapes --out-dir");
    }
    return full;
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path path = resolve(name);
    fs::create_directories(path.parent_path());
    atomic_write(path, content);
    files_.push_back(path.lexically_relative(dir_).generic_string());
  }

  const fs::path& dir() const { return dir_; }
  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

struct Context {
  std::uint64_t seed = 0;
  Outputs* out = nullptr;
  Json summary = Json::object();  // extra manifest entries

  std::uint64_t stream(std::uint64_t index) const { return derive_seed(seed, index, stream_tag::kUniform); }
};

template <typename T>
std::string str(const T& writer) {
  std::ostringstream out;
  writer(out);
  return out.str();
}

// ------------------------------------------------------- shared options --

struct ScheduleOptions {
  ScheduleConfig config;
  std::string pump = "linear";
  std::string file;

  void add(CLI::App* app) {
    app->add_option("--schedule", file, "JSON schedule file; explicit schedule flags override it");
    app->add_option("--iterations", config.iterations, "SimCIM iterations")->check(CLI::PositiveNumber);
    app->add_option("--zeta-scale", config.zeta_scale, "Coupling gain times the reference eigenvalue");
    app->add_option("--sigma", config.sigma, "Noise standard deviation per iteration");
    app->add_option("--pump", pump, "Pump shape")->check(CLI::IsMember({"linear", "tanh", "constant"}));
    app->add_option("--pump-start", config.pump_start, "Initial pump, in units of zeta-scale");
    app->add_option("--pump-end", config.pump_end, "Final pump, in units of zeta-scale");
  }

  ScheduleConfig resolve(const CLI::App* app) const {
    ScheduleConfig s = config;
    if (!file.empty()) {
      Json doc;
      try {
        doc = Json::parse(read_text(file));
      } catch (const nlohmann::json::exception& e) {
        throw FormatError("cli: schedule file " + file + " is not valid JSON: " + e.what());
      }
      s = schedule_from_json(doc);
      // Explicitly given flags win over the file.
      if (app->count("--iterations")) s.iterations = config.iterations;
      if (app->count("--zeta-scale")) s.zeta_scale = config.zeta_scale;
      if (app->count("--sigma")) s.sigma = config.sigma;
      if (app->count("--pump-start")) s.pump_start = config.pump_start;
      if (app->count("--pump-end")) s.pump_end = config.pump_end;
      if (app->count("--pump")) s.pump = parse_pump_shape(pump);
    } else {
      s.pump = parse_pump_shape(pump);
    }
    s.validate();
    return s;
  }
};

struct ThermoOptions {
  ThermometryOptions options;
  std::string weighting = "inverse-variance";
  std::optional<double> bin_width;

  void add(CLI::App* app, std::size_t default_count) {
    options.count = default_count;
    app->add_option("--count", options.count, "Samples per thermometry batch")->check(CLI::PositiveNumber);
    app->add_option("--ratio", options.scale_ratio, "beta1 / beta2")->check(CLI::Range(0.0, 1.0));
    app->add_option("--bins", options.bins, "Energy bins across the pooled range")->check(CLI::PositiveNumber);
    app->add_option("--bin-width", bin_width, "Fixed energy bin width (overrides --bins)");
    app->add_option("--min-count", options.min_count, "Minimum count per bin in both batches");
    app->add_option("--weighting", weighting, "Fit weighting")
        ->check(CLI::IsMember({"inverse-variance", "unweighted"}));
    app->add_option("--min-significance", options.min_significance, "Required slope / stderr");
  }

  ThermometryOptions resolve() const {
    ThermometryOptions o = options;
    o.bin_width = bin_width;
    o.weighting = parse_fit_weighting(weighting);
    o.validate();
    return o;
  }
};

fs::path default_mnist_dir() {
#ifdef BOLTZGEN_DATA_DIR
  return BOLTZGEN_DATA_DIR;
#else
  return "data/mnist";
#endif
}

struct MnistFiles {
  std::string dir = default_mnist_dir().string();

  void add(CLI::App* app) { app->add_option("--mnist-dir", dir, "Directory holding the IDX files"); }

  SpinDataset load(Split split, std::size_t train_count, double threshold) const {
    const fs::path base(dir);
    MnistOptions opt;
    opt.split = split;
    opt.train_count = train_count;
    opt.threshold = threshold;
    const std::string prefix = split == Split::test ? "t10k" : "train";
    auto pick = [&](const std::string& stem) {
      const fs::path gz = base / (prefix + stem + ".gz");
      return fs::exists(gz) ? gz : base / (prefix + stem);
    };
    return load_mnist(pick("-images-idx3-ubyte"), pick("-labels-idx1-ubyte"), opt);
  }
};

// ------------------------------------------------------------ commands --

struct SampleCmd {
  std::string model;
  std::string sampler = "exact";
  double beta = 1.0;
  std::size_t count = 1000;
  std::size_t chain_length = 1000;
  bool corrected = false;
  std::size_t calibration_count = 50000;
  bool trace = false;
  std::string out = "samples.csv";
  ScheduleOptions schedule;

  void add(CLI::App* app) {
    app->add_option("--model", model, "Model JSON file")->required();
    app->add_option("--sampler", sampler, "Sampler")->check(CLI::IsMember({"exact", "mcmc", "simcim", "uniform"}));
    app->add_option("--beta", beta, "Inverse temperature (model scale for uncorrected SimCIM)");
    app->add_option("--count", count, "Number of samples")->check(CLI::PositiveNumber);
    app->add_option("--chain-length", chain_length, "Metropolis sweeps per sample");
    app->add_flag("--corrected", corrected, "SimCIM: calibrate the temperature and sample at --beta");
    app->add_option("--calibration-count", calibration_count, "SimCIM calibration batch size");
    app->add_flag("--trace", trace, "SimCIM: also write the amplitude trace of run 0");
    app->add_option("--out", out, "Sample CSV name");
    schedule.add(app);
  }

  void run(const CLI::App* app, Context& ctx) const {
    const IsingModel m = load_model(model);
    SamplerSpec spec;
    spec.kind = parse_sampler_kind(sampler);
    spec.seed = ctx.stream(0);
    spec.chain_length = chain_length;
    spec.schedule = schedule.resolve(app);
    if ((corrected || trace) && spec.kind != SamplerKind::simcim) {
      throw ParameterError("cli: --corrected and --trace need --sampler simcim");
    }
    SpinBatch batch;
    if (corrected) {
      ThermometryOptions cal;
      cal.count = calibration_count;
      const TemperatureEstimate est = estimate_beta(m, spec.with_seed(ctx.stream(1)), cal);
      ctx.summary["calibration"] = estimate_to_json(est);
      batch = boltzmann_sample(m, beta, AnnealSchedule::resolve(spec.schedule, m), count, ctx.stream(2), est);
    } else if (trace) {
      const AnnealSchedule sched = AnnealSchedule::resolve(spec.schedule, m);
      AnnealResult res = anneal_batch(beta > 0.0 ? scale_model(m, beta) : IsingModel::zeros(m.size()), sched, count,
                                      spec.seed, true);
      batch = std::move(res.batch);
      batch.attach_energies(m);
      ctx.out->write("trace_spins.csv", str([&](std::ostream& o) {
        o << "iter,spin_index,value\n";
        for (Eigen::Index t = 0; t < res.trace->spins.rows(); ++t) {
          for (Eigen::Index i = 0; i < res.trace->spins.cols(); ++i) {
            o << t << ',' << i << ',' << format_double(res.trace->spins(t, i)) << '\n';
          }
        }
      }));
      ctx.out->write("trace_energy.csv", str([&](std::ostream& o) {
        o << "iter,best_energy\n";
        for (std::size_t t = 0; t < res.trace->best_energy.size(); ++t) {
          o << t << ',' << format_double(res.trace->best_energy[t]) << '\n';
        }
      }));
    } else {
      batch = draw(spec, m, beta, count);
    }
    ctx.out->write(out, str([&](std::ostream& o) { write_samples_csv(o, batch); }));
  }
};

void write_thermo_files(Outputs& out, const std::string& prefix, const ThermometryRun& run) {
  out.write(prefix + "_estimate.json", estimate_to_json(run.estimate).dump(2) + "\n");
  out.write(prefix + "_histograms.csv", str([&](std::ostream& o) {
    const std::int64_t lo = std::min(run.histogram1.first_bin, run.histogram2.first_bin);
    const std::int64_t hi = std::max(run.histogram1.last_bin(), run.histogram2.last_bin());
    o << "energy,count_beta1,count_beta2\n";
    for (std::int64_t k = lo; k <= hi; ++k) {
      o << format_double(run.histogram1.center(k)) << ',' << run.histogram1.count_at(k) << ','
        << run.histogram2.count_at(k) << '\n';
    }
  }));
  out.write(prefix + "_log_ratio.csv", str([&](std::ostream& o) {
    o << "delta_e,delta_l,weight\n";
    o << "0,0," << format_double(run.series.reference_weight) << '\n';
    for (const auto& p : run.series.points) {
      o << format_double(p.delta_e) << ',' << format_double(p.delta_l) << ',' << format_double(p.weight) << '\n';
    }
  }));
}

struct ThermoCmd {
  std::string model;
  std::string sampler = "simcim";
  double reference_scale = 1.0;
  std::size_t chain_length = 1000;
  std::string prefix = "thermo";
  ThermoOptions thermo;
  ScheduleOptions schedule;

  void add(CLI::App* app) {
    app->add_option("--model", model, "Model JSON file")->required();
    app->add_option("--sampler", sampler, "Sampler")->check(CLI::IsMember({"exact", "mcmc", "simcim", "uniform"}));
    app->add_option("--reference-scale", reference_scale, "Model scale of the first batch");
    app->add_option("--chain-length", chain_length, "Metropolis sweeps per sample");
    app->add_option("--prefix", prefix, "Output file prefix");
    thermo.add(app, 50000);
    schedule.add(app);
  }

  void run(const CLI::App* app, Context& ctx) const {
    const IsingModel m = load_model(model);
    SamplerSpec spec;
    spec.kind = parse_sampler_kind(sampler);
    spec.seed = ctx.stream(0);
    spec.chain_length = chain_length;
    spec.schedule = schedule.resolve(app);
    ThermometryOptions opt = thermo.resolve();
    opt.reference_scale = reference_scale;
    const ThermometryRun run = estimate_beta_detailed(m, spec, opt);
    write_thermo_files(*ctx.out, prefix, run);
    std::cout << "beta1 = " << format_double(run.estimate.beta1) << ", R^2 = " << format_double(run.estimate.r_squared)
              << "\n";
  }
};

struct LogzCmd {
  std::string model;
  std::string sampler = "exact";
  std::size_t steps = 10;
  std::size_t samples = 250;
  std::size_t direct_count = 7500;
  std::size_t chain_length = 1000;
  std::string calibration = "pseudo-likelihood";
  std::string prefix = "logz";
  ScheduleOptions schedule;

  void add(CLI::App* app) {
    app->add_option("--model", model, "Model JSON file")->required();
    app->add_option("--sampler", sampler, "Estimator")
        ->check(CLI::IsMember({"exact", "mcmc", "simcim", "direct", "enumerate"}));
    app->add_option("--steps", steps, "AIS ladder steps N")->check(CLI::PositiveNumber);
    app->add_option("--samples", samples, "AIS samples per rung M")->check(CLI::PositiveNumber);
    app->add_option("--direct-count", direct_count, "Uniform samples for --sampler direct")
        ->check(CLI::PositiveNumber);
    app->add_option("--chain-length", chain_length, "Metropolis sweeps per sample");
    app->add_option("--calibration", calibration, "SimCIM rung thermometry")
        ->check(CLI::IsMember({"pseudo-likelihood", "histogram"}));
    app->add_option("--prefix", prefix, "Output file prefix");
    schedule.add(app);
  }

  void run(const CLI::App* app, Context& ctx) const {
    const IsingModel m = load_model(model);
    Json doc;
    doc["method"] = sampler;
    if (sampler == "enumerate") {
      doc["log_z"] = enumerate(m, 1.0).log_z;
    } else if (sampler == "direct") {
      SamplerSpec spec;
      spec.kind = SamplerKind::uniform;
      spec.seed = ctx.stream(0);
      doc["log_z"] = direct_log_z(m, spec, direct_count);
      doc["samples_consumed"] = direct_count;
    } else {
      AisConfig config;
      config.n_intermediate = steps;
      config.samples_per_step = samples;
      config.sampler.kind = parse_sampler_kind(sampler);
      config.sampler.seed = ctx.stream(0);
      config.sampler.chain_length = chain_length;
      config.sampler.schedule = schedule.resolve(app);
      config.calibration_method = parse_thermometry_method(calibration);
      const AisResult result = estimate_log_z(m, config);
      const Json summary = ais_to_json(result);
      for (const auto& [key, value] : summary.items()) doc[key] = value;
      ctx.out->write(prefix + "_rungs.csv", str([&](std::ostream& o) {
        o << "rung,beta_from,beta_to,log_ratio,stderr\n";
        for (std::size_t k = 0; k < result.per_step_log_ratios.size(); ++k) {
          o << k << ',' << format_double(result.ladder[k]) << ',' << format_double(result.ladder[k + 1]) << ','
            << format_double(result.per_step_log_ratios[k]) << ',' << format_double(result.per_step_stderr[k])
            << '\n';
        }
      }));
    }
    ctx.out->write(prefix + ".json", doc.dump(2) + "\n");
    std::cout << "log_z = " << format_double(doc["log_z"].get<double>()) << "\n";
  }
};

struct TrainCmd {
  std::string dataset = "bas";
  std::string neg = "exact";
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> updates;
  std::optional<double> lr;
  std::optional<std::size_t> minibatch;
  std::size_t negative_samples = 250;
  std::optional<std::size_t> metric_cadence;
  std::size_t checkpoint_every = 0;
  double init_scale = 0.01;
  std::size_t chain_length = 1000;
  std::size_t train_count = 50000;
  std::size_t train_limit = 0;
  std::string eval_split = "test";
  std::size_t eval_count = 0;
  double threshold = 0.3;
  bool loglik = false;
  std::string init;
  std::string out = "model.json";
  std::string metrics = "metrics.csv";
  ScheduleOptions schedule;
  MnistFiles mnist;

  void add(CLI::App* app) {
    app->add_option("--dataset", dataset, "Training set")->check(CLI::IsMember({"bas", "mnist"}));
    app->add_option("--neg", neg, "Negative phase")
        ->check(CLI::IsMember({"exact", "mcmc", "simcim", "simcim-corrected"}));
    app->add_option("--epochs", epochs, "Passes over the training set (BAS: one update each)");
    app->add_option("--updates", updates, "BAS only: number of full-set updates");
    app->add_option("--lr", lr, "Learning rate (default 0.05 for BAS, 0.001 for MNIST)");
    app->add_option("--minibatch", minibatch, "Minibatch size (BAS: whole set, MNIST: 500)");
    app->add_option("--negative-samples", negative_samples, "Samples per negative phase")
        ->check(CLI::PositiveNumber);
    app->add_option("--metric-cadence", metric_cadence, "Updates between metric evaluations (default: BAS 10, "
                                                         "MNIST one epoch)");
    app->add_option("--checkpoint-every", checkpoint_every, "Write a model checkpoint every K updates (0: never)");
    app->add_option("--init-scale", init_scale, "Standard deviation of the initial couplings");
    app->add_option("--chain-length", chain_length, "Metropolis sweeps per negative sample");
    app->add_option("--train-count", train_count, "MNIST: size of the train split of the train file");
    app->add_option("--train-limit", train_limit, "MNIST: use only the first K training images (0: all)");
    app->add_option("--eval-split", eval_split, "MNIST: held-out split for accuracy")
        ->check(CLI::IsMember({"validation", "test"}));
    app->add_option("--eval-count", eval_count, "MNIST: held-out images used (0: all)");
    app->add_option("--threshold", threshold, "MNIST: binarization threshold");
    app->add_flag("--loglik", loglik, "MNIST: estimate the average log-likelihood each epoch with SimCIM AIS");
    app->add_option("--init", init, "Start from this model file instead of a random one");
    app->add_option("--out", out, "Final model file");
    app->add_option("--metrics", metrics, "Metrics CSV");
    schedule.add(app);
    mnist.add(app);
  }

  void run(const CLI::App* app, Context& ctx) const {
    const bool bas = dataset == "bas";
    BmTrainConfig config;
    config.negative_phase = parse_negative_phase(neg);
    config.learning_rate = lr.value_or(bas ? kBasLearningRate : kMnistLearningRate);
    config.negative_samples = negative_samples;
    config.calibration.count = negative_samples;
    config.init_scale = init_scale;
    config.chain_length = chain_length;
    config.schedule = schedule.resolve(app);
    config.seed = ctx.stream(0);

    SpinDataset data;
    std::optional<SpinDataset> held_out;
    if (bas) {
      if (epochs && updates) throw ParameterError("cli: give --epochs or --updates, not both");
      data = bas_dataset();
      config.epochs = updates.value_or(epochs.value_or(2000));
      config.minibatch_size = minibatch.value_or(0);
      config.metric_cadence = metric_cadence.value_or(10);
    } else {
      if (updates) throw ParameterError("cli: --updates applies to BAS only; use --epochs");
      data = mnist.load(Split::train, train_count, threshold);
      if (train_limit > 0) data = data.head(train_limit);
      held_out = mnist.load(parse_split(eval_split), train_count, threshold);
      if (eval_count > 0) held_out = held_out->head(eval_count);
      config.epochs = epochs.value_or(50);
      config.minibatch_size = minibatch.value_or(500);
      config.metric_cadence = metric_cadence.value_or(std::max<std::size_t>(1, data.size() / config.minibatch_size));
    }

    MetricsFn metric_fn;
    if (bas) {
      metric_fn = exact_metrics(data);
    } else {
      metric_fn = [&](const BmTrainState& s, HistoryEntry& h) {
        h.accuracy = accuracy(s.model, *held_out);
        if (loglik) {
          AisConfig ais;
          ais.sampler.kind = SamplerKind::simcim;
          ais.sampler.schedule = config.schedule;
          ais.sampler.seed = derive_seed(ctx.seed, s.update_count, stream_tag::kAis);
          h.avg_log_likelihood = avg_log_likelihood(s.model, data, estimate_log_z(s.model, ais).log_z);
        }
        std::cerr << "epoch " << s.epoch << " update " << s.update_count << " accuracy " << *h.accuracy << "\n";
      };
    }
    std::optional<IsingModel> start;
    if (!init.empty()) start = load_model(init);
    const BmTrainState state = train(data, config, metric_fn, start, [&](const BmTrainState& s) {
      if (checkpoint_every > 0 && s.update_count % checkpoint_every == 0) {
        char name[64];
        std::snprintf(name, sizeof name, "checkpoints/model_%06zu.json", s.update_count);
        ctx.out->write(name, model_to_json(s.model).dump() + "\n");
      }
    });
    ctx.out->write(out, model_to_json(state.model).dump() + "\n");
    ctx.out->write(metrics, str([&](std::ostream& o) { write_history_csv(o, state.history); }));
    ctx.summary["updates"] = state.update_count;
    ctx.summary["calibration_failures"] = state.calibration_failures;
    ctx.summary["samples_consumed"] = state.samples_consumed;
    const HistoryEntry& last = state.history.back();
    if (last.avg_log_likelihood) std::cout << "avg_log_likelihood = " << format_double(*last.avg_log_likelihood) << "\n";
    if (last.kl) std::cout << "kl = " << format_double(*last.kl) << "\n";
    if (last.accuracy) std::cout << "accuracy = " << format_double(*last.accuracy) << "\n";
  }
};

struct ClassifyCmd {
  std::string model;
  std::string split = "test";
  std::size_t train_count = 50000;
  std::size_t count = 0;
  double threshold = 0.3;
  std::string out = "predictions.csv";
  MnistFiles mnist;

  void add(CLI::App* app) {
    app->add_option("--model", model, "794-spin model JSON file")->required();
    app->add_option("--split", split, "MNIST split")->check(CLI::IsMember({"train", "validation", "test"}));
    app->add_option("--train-count", train_count, "Size of the train split of the train file");
    app->add_option("--count", count, "Classify only the first K images (0: all)");
    app->add_option("--threshold", threshold, "Binarization threshold");
    app->add_option("--out", out, "Predictions CSV");
    mnist.add(app);
  }

  void run(const CLI::App*, Context& ctx) const {
    const IsingModel m = load_model(model);
    SpinDataset data = mnist.load(parse_split(split), train_count, threshold);
    if (count > 0) data = data.head(count);
    const std::vector<int> predicted = classify_batch(m, data.vectors);
    std::size_t hits = 0;
    ctx.out->write(out, str([&](std::ostream& o) {
      o << "index,label,predicted\n";
      for (std::size_t k = 0; k < predicted.size(); ++k) {
        const int label = (*data.labels)[k];
        hits += label == predicted[k];
        o << k << ',' << label << ',' << predicted[k] << '\n';
      }
    }));
    const double acc = static_cast<double>(hits) / static_cast<double>(predicted.size());
    ctx.summary["accuracy"] = acc;
    ctx.summary["images"] = predicted.size();
    std::cout << "accuracy = " << format_double(acc) << "\n";
  }
};

struct GenerateCmd {
  std::string model;
  int digit = 0;
  std::size_t count = 10;
  double scale = 1.0;
  std::string prefix = "digit";
  ScheduleOptions schedule;

  void add(CLI::App* app) {
    app->add_option("--model", model, "794-spin model JSON file")->required();
    app->add_option("--digit", digit, "Label to clamp")->check(CLI::Range(0, 9));
    app->add_option("--count", count, "Bitmaps to generate")->check(CLI::PositiveNumber);
    app->add_option("--scale", scale, "Model scale before annealing (1 / native beta corrects to beta = 1)");
    app->add_option("--prefix", prefix, "Output file prefix");
    schedule.add(app);
  }

  void run(const CLI::App* app, Context& ctx) const {
    const IsingModel m = load_model(model);
    const SpinBatch batch = generate(m, digit, schedule.resolve(app), count, ctx.stream(0), scale);
    const std::string stem = prefix + std::to_string(digit);
    for (std::size_t k = 0; k < batch.size(); ++k) {
      char suffix[32];
      std::snprintf(suffix, sizeof suffix, "_%04zu.pgm", k);
      ctx.out->write(stem + suffix, pgm_bytes(batch.row(k), 28, 28));
    }
    ctx.out->write(stem + "_samples.csv", str([&](std::ostream& o) { write_samples_csv(o, batch); }));
  }
};

struct BasCmd {
  std::string out = "bas.csv";

  void add(CLI::App* app) { app->add_option("--out", out, "Sample CSV (rows repeated by multiplicity)"); }

  void run(const CLI::App*, Context& ctx) const {
    const SpinDataset bas = bas_dataset();
    SpinBatch batch;
    batch.samples.resize(static_cast<Eigen::Index>(bas.total_weight()), static_cast<Eigen::Index>(bas.dimension()));
    Eigen::Index row = 0;
    for (std::size_t k = 0; k < bas.size(); ++k) {
      for (std::uint32_t w = 0; w < bas.weights[k]; ++w) batch.samples.row(row++) = bas.vectors.row(static_cast<Eigen::Index>(k));
    }
    ctx.out->write(out, str([&](std::ostream& o) { write_samples_csv(o, batch, false); }));
    ctx.summary["distinct_vectors"] = bas.size();
    ctx.summary["total_weight"] = bas.total_weight();
    ctx.summary["ground_truth_avg_log_likelihood"] = dataset_entropy_bound(bas);
    std::cout << "ground-truth average log-likelihood = " << format_double(dataset_entropy_bound(bas)) << "\n";
  }
};

struct Bench16Cmd {
  std::size_t n = 16;
  std::optional<std::uint64_t> model_seed;
  std::string prefix = "bench16";
  ThermoOptions thermo;
  ScheduleOptions schedule;

  void add(CLI::App* app) {
    app->add_option("--size", n, "Number of spins")->check(CLI::Range(2, 24));
    app->add_option("--model-seed", model_seed, "Seed of the random {-1,0,1} couplings (default: --seed)");
    app->add_option("--prefix", prefix, "Output file prefix");
    thermo.add(app, 50000);
    schedule.add(app);
  }

  void run(const CLI::App* app, Context& ctx) const {
    const IsingModel m = random_ternary_model(n, model_seed.value_or(ctx.seed));
    ctx.out->write(prefix + "_model.json", model_to_json(m).dump() + "\n");

    SamplerSpec spec;
    spec.kind = SamplerKind::simcim;
    spec.seed = ctx.stream(0);
    spec.schedule = schedule.resolve(app);
    const ThermometryOptions opt = thermo.resolve();
    const ThermometryRun run = estimate_beta_detailed(m, spec, opt);
    write_thermo_files(*ctx.out, prefix + "_simcim", run);

    // Third batch: exact Boltzmann samples at beta = 1, plus SimCIM corrected to beta = 1.
    const SpinBatch exact = exact_sample(enumerate(m, 1.0), opt.count, ctx.stream(1));
    const SpinBatch corrected =
        boltzmann_sample(m, 1.0, AnnealSchedule::resolve(spec.schedule, m), opt.count, ctx.stream(2), run.estimate);
    // Redraw the two SimCIM batches exactly as the thermometer did.
    const SpinBatch sim1 =
        draw(spec.with_seed(derive_seed(spec.seed, 0, stream_tag::kThermo)), m, opt.reference_scale, opt.count);
    const SpinBatch sim2 = draw(spec.with_seed(derive_seed(spec.seed, 1, stream_tag::kThermo)), m,
                                opt.reference_scale / opt.scale_ratio, opt.count);

    const std::vector<std::pair<std::string, const SpinBatch*>> sets = {
        {"simcim_beta1", &sim1}, {"simcim_beta2", &sim2}, {"exact_beta_1", &exact}, {"simcim_corrected", &corrected}};
    const double width = run.estimate.bin_width;
    std::vector<EnergyHistogram> hist;
    for (const auto& s : sets) hist.push_back(histogram_energies(*s.second, m, width));
    ctx.out->write(prefix + "_histograms.csv", str([&](std::ostream& o) {
      std::int64_t lo = hist[0].first_bin, hi = hist[0].last_bin();
      for (const auto& h : hist) {
        lo = std::min(lo, h.first_bin);
        hi = std::max(hi, h.last_bin());
      }
      o << "energy";
      for (const auto& s : sets) o << ',' << s.first;
      o << '\n';
      for (std::int64_t k = lo; k <= hi; ++k) {
        o << format_double(hist[0].center(k));
        for (const auto& h : hist) o << ',' << h.count_at(k);
        o << '\n';
      }
    }));
    const std::vector<std::pair<std::size_t, std::size_t>> pairs = {{0, 1}, {0, 2}, {1, 2}, {3, 2}};
    Json slopes = Json::object();
    ctx.out->write(prefix + "_delta_log.csv", str([&](std::ostream& o) {
      o << "pair,delta_e,delta_l,weight\n";
      for (const auto& [a, b] : pairs) {
        const std::string name = sets[a].first + "-" + sets[b].first;
        const LogRatioSeries series = delta_log_ratio(hist[a], hist[b], opt.min_count);
        const LineFit fit = fit_log_ratio(series, opt.weighting);
        slopes[name] = {{"slope", fit.slope}, {"slope_stderr", fit.slope_stderr}, {"r_squared", fit.r_squared}};
        o << name << ",0,0," << format_double(series.reference_weight) << '\n';
        for (const auto& p : series.points) {
          o << name << ',' << format_double(p.delta_e) << ',' << format_double(p.delta_l) << ','
            << format_double(p.weight) << '\n';
        }
      }
    }));
    ctx.out->write(prefix + "_fits.json", slopes.dump(2) + "\n");
    std::cout << "native beta = " << format_double(run.estimate.native_beta())
              << ", R^2 = " << format_double(run.estimate.r_squared) << "\n";
  }
};

std::string now_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buffer;
}

// A manifest given with --config names its subcommand; supply it when the
// command line does not.
std::vector<std::string> with_manifest_subcommand(std::vector<std::string> args) {
  std::string config;
  bool has_sub = false;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) config = args[k + 1];
    if (args[k].rfind("--config=", 0) == 0) config = args[k].substr(9);
    if (std::find(kSubcommands.begin(), kSubcommands.end(), args[k]) != kSubcommands.end()) has_sub = true;
  }
  if (has_sub || config.empty() || !fs::exists(config)) return args;
  try {
    const Json doc = Json::parse(read_text(config));
    if (doc.is_object() && doc.contains("subcommand") && doc["subcommand"].is_string()) {
      args.push_back(doc["subcommand"].get<std::string>());
    }
  } catch (const nlohmann::json::exception&) {
    // Reported by the config parser.
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"boltzgen: Ising sampling, temperature calibration, partition functions and Boltzmann machines",
               "boltzgen"};
  app.option_defaults()->always_capture_default();
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config file or a previous run's manifest.json; flags override it");
  app.set_version_flag("--version", BOLTZGEN_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  Globals globals;
  app.add_option("--seed", globals.seed, "Master seed (default: random, recorded in the manifest)");
  app.add_option("--threads", globals.threads, "Worker threads (0: all cores); results do not depend on it");
  app.add_option("--out-dir", globals.out_dir, "Directory receiving every output file");

  SampleCmd sample;
  ThermoCmd thermo;
  LogzCmd logz;
  TrainCmd train_cmd;
  ClassifyCmd classify_cmd;
  GenerateCmd generate_cmd;
  BasCmd bas;
  Bench16Cmd bench16;
  std::map<std::string, std::function<void(const CLI::App*, Context&)>> runners;
  auto add = [&](const std::string& name, const std::string& help, auto& cmd) {
    CLI::App* sub = app.add_subcommand(name, help);
    cmd.add(sub);
    runners[name] = [&cmd](const CLI::App* a, Context& c) { cmd.run(a, c); };
  };
  add("sample", "Draw spin configurations from a model", sample);
  add("thermo", "Estimate a sampler's effective inverse temperature", thermo);
  add("logz", "Estimate the log partition function (AIS, direct or exact)", logz);
  add("train", "Train a fully visible Boltzmann machine on BAS or MNIST", train_cmd);
  add("classify", "Classify MNIST images with a trained 794-spin model", classify_cmd);
  add("generate", "Generate digit bitmaps with the label spins clamped", generate_cmd);
  add("bas", "Export the bars-and-stripes dataset", bas);
  add("bench16", "Run the 16-spin SimCIM temperature benchmark", bench16);

  std::vector<std::string> args(argv + 1, argv + argc);
  args = with_manifest_subcommand(std::move(args));
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    set_thread_count(globals.threads);
    Context ctx;
    if (globals.seed) {
      ctx.seed = *globals.seed;
    } else {
      std::random_device device;
      ctx.seed = (std::uint64_t{device()} << 32) ^ device();
      std::cerr << "boltzgen: no --seed given, using " << ctx.seed << "\n";
    }
    Outputs outputs(globals.out_dir);
    ctx.out = &outputs;
    fs::create_directories(outputs.dir());

    const auto start = std::chrono::steady_clock::now();
    runners.at(name)(sub, ctx);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    Json config = resolved_options(app);
    config["seed"] = std::to_string(ctx.seed);
    Json manifest;
    manifest["subcommand"] = name;
    manifest["config"] = config;
    manifest["seed"] = ctx.seed;
    manifest["version"] = BOLTZGEN_VERSION;
    manifest["started"] = now_utc();
    manifest["duration_seconds"] = secs;
    manifest["outputs"] = outputs.files();
    if (!ctx.summary.empty()) manifest["results"] = ctx.summary;
    outputs.write("manifest.json", manifest.dump(2) + "\n");
    return 0;
  } catch (const CalibrationError& e) {
    std::cerr << "boltzgen " << name << ": calibration error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const NumericError& e) {
    std::cerr << "boltzgen " << name << ": numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const FormatError& e) {
    std::cerr << "boltzgen " << name << ": data error: " << e.what() << "\n";
    return kExitData;
  } catch (const ParameterError& e) {
    std::cerr << "boltzgen " << name << ": usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "boltzgen " << name << ": file error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "boltzgen " << name << ": error: " << e.what() << "\n";
    return 1;
  }
}
