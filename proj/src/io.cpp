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

#include "boltzgen/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "boltzgen/errors.hpp"

namespace boltzgen {

std::string format_double(double value) {
  char buffer[64];
  const auto res = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, res.ptr);
}

Json model_to_json(const IsingModel& model) {
  const auto n = static_cast<Eigen::Index>(model.size());
  Json doc;
  doc["n"] = model.size();
  Json j = Json::array();
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) j.push_back(model.couplings()(r, c));
  }
  doc["j"] = std::move(j);
  Json b = Json::array();
  for (Eigen::Index r = 0; r < n; ++r) b.push_back(model.biases()[r]);
  doc["b"] = std::move(b);
  return doc;
}

IsingModel model_from_json(const Json& doc) {
  try {
    if (!doc.is_object()) throw FormatError("io: model document must be a JSON object");
    for (const char* key : {"n", "j", "b"}) {
      if (!doc.contains(key)) throw FormatError(std::string("io: model is missing field '") + key + "'");
    }
    const auto n = doc.at("n").get<std::size_t>();
    const auto& j = doc.at("j");
    const auto& b = doc.at("b");
    if (!j.is_array() || j.size() != n * n) {
      throw FormatError("io: model field 'j' must hold n*n = " + std::to_string(n * n) + " numbers");
    }
    if (!b.is_array() || b.size() != n) {
      throw FormatError("io: model field 'b' must hold n = " + std::to_string(n) + " numbers");
    }
    const auto ni = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd jm(ni, ni);
    Eigen::VectorXd bv(ni);
    for (Eigen::Index r = 0; r < ni; ++r) {
      for (Eigen::Index c = 0; c < ni; ++c) jm(r, c) = j.at(static_cast<std::size_t>(r * ni + c)).get<double>();
      bv[r] = b.at(static_cast<std::size_t>(r)).get<double>();
    }
    return IsingModel(std::move(jm), std::move(bv));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("io: malformed model: ") + e.what());
  } catch (const ParameterError& e) {
    throw FormatError(std::string("io: invalid model: ") + e.what());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("io: cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

IsingModel load_model(const std::filesystem::path& path) {
  Json doc;
  try {
    doc = Json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("io: " + path.string() + " is not valid JSON: " + e.what());
  }
  return model_from_json(doc);
}

void save_model(const std::filesystem::path& path, const IsingModel& model) {
  atomic_write(path, model_to_json(model).dump() + "\n");
}

Json schedule_to_json(const ScheduleConfig& s) {
  Json doc;
  doc["iterations"] = s.iterations;
  doc["zeta_scale"] = s.zeta_scale;
  doc["sigma"] = s.sigma;
  doc["pump"] = to_string(s.pump);
  doc["pump_start"] = s.pump_start;
  doc["pump_end"] = s.pump_end;
  return doc;
}

ScheduleConfig schedule_from_json(const Json& doc) {
  if (!doc.is_object()) throw FormatError("io: schedule must be a JSON object");
  ScheduleConfig s;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "iterations") {
        s.iterations = value.get<std::size_t>();
      } else if (key == "zeta_scale") {
        s.zeta_scale = value.get<double>();
      } else if (key == "sigma") {
        s.sigma = value.get<double>();
      } else if (key == "pump") {
        s.pump = parse_pump_shape(value.get<std::string>());
      } else if (key == "pump_start") {
        s.pump_start = value.get<double>();
      } else if (key == "pump_end") {
        s.pump_end = value.get<double>();
      } else {
        throw FormatError("io: unknown schedule field '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("io: malformed schedule: ") + e.what());
  }
  s.validate();
  return s;
}

Json estimate_to_json(const TemperatureEstimate& e) {
  Json doc;
  doc["beta1"] = e.beta1;
  doc["beta2"] = e.beta2;
  doc["native_beta"] = e.native_beta();
  doc["scale_ratio"] = e.scale_ratio;
  doc["reference_scale"] = e.reference_scale;
  doc["slope"] = e.slope;
  doc["intercept"] = e.intercept;
  doc["r_squared"] = e.r_squared;
  doc["slope_stderr"] = e.slope_stderr;
  doc["points_used"] = e.points_used;
  doc["bin_width"] = e.bin_width;
  doc["sampler"] = to_string(e.sampler);
  doc["method"] = to_string(e.method);
  doc["model_fingerprint"] = e.model_fingerprint;
  doc["schedule_fingerprint"] = e.schedule_fingerprint;
  doc["samples_consumed"] = e.samples_consumed;
  return doc;
}

Json ais_to_json(const AisResult& r) {
  Json doc;
  doc["log_z"] = r.log_z;
  doc["log_z_stderr"] = r.log_z_stderr;
  doc["samples_consumed"] = r.samples_consumed;
  doc["ladder"] = r.ladder;
  doc["per_step_log_ratios"] = r.per_step_log_ratios;
  doc["per_step_stderr"] = r.per_step_stderr;
  Json cal = Json::array();
  for (const auto& e : r.calibrations) cal.push_back(estimate_to_json(e));
  doc["calibrations"] = std::move(cal);
  return doc;
}

void write_samples_csv(std::ostream& out, const SpinBatch& batch, bool with_energy) {
  const std::size_t n = batch.dimension();
  with_energy = with_energy && batch.energies.has_value();
  for (std::size_t i = 0; i < n; ++i) out << (i ? "," : "") << 's' << i;
  if (with_energy) out << ",energy";
  out << '\n';
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const SpinView row = batch.row(r);
    for (std::size_t i = 0; i < n; ++i) out << (i ? "," : "") << static_cast<int>(row[i]);
    if (with_energy) out << ',' << format_double((*batch.energies)[static_cast<Eigen::Index>(r)]);
    out << '\n';
  }
}

SpinBatch read_samples_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line)) throw FormatError("io: " + path.string() + " has no header");
  std::size_t columns = 0;
  bool energy = false;
  {
    std::istringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) {
      if (cell == "energy") {
        energy = true;
      } else if (cell != "s" + std::to_string(columns++)) {
        throw FormatError("io: unexpected header field '" + cell + "' in " + path.string());
      }
    }
  }
  std::vector<std::int8_t> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::size_t k = 0;
    while (std::getline(row, cell, ',')) {
      if (k < columns) {
        if (cell != "1" && cell != "-1") {
          throw FormatError("io: line " + std::to_string(rows + 2) + " of " + path.string() + " holds '" + cell +
                            "', expected 1 or -1");
        }
        values.push_back(cell == "1" ? 1 : -1);
      }
      ++k;
    }
    if (k != columns + (energy ? 1 : 0)) {
      throw FormatError("io: line " + std::to_string(rows + 2) + " of " + path.string() + " has the wrong width");
    }
    ++rows;
  }
  SpinBatch batch;
  batch.samples = Eigen::Map<SpinMatrix>(values.data(), static_cast<Eigen::Index>(rows),
                                         static_cast<Eigen::Index>(columns));
  batch.source = "csv";
  return batch;
}

void write_exact_csv(std::ostream& out, const ExactDistribution& dist) {
  out << "state_index,log_prob\n";
  for (std::size_t k = 0; k < dist.log_probs.size(); ++k) out << k << ',' << format_double(dist.log_probs[k]) << '\n';
}

std::string pgm_bytes(SpinView bitmap, std::size_t rows, std::size_t cols) {
  if (bitmap.size() < rows * cols) throw DimensionError("io: bitmap is smaller than rows x cols");
  std::string out = "P5\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
  for (std::size_t i = 0; i < rows * cols; ++i) out.push_back(static_cast<char>(bitmap[i] > 0 ? 255 : 0));
  return out;
}

void write_history_csv(std::ostream& out, const std::vector<HistoryEntry>& history) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  out << "update,epoch,loglik,kl,accuracy,native_beta\n";
  for (const auto& h : history) {
    out << h.update_count << ',' << h.epoch << ',' << opt(h.avg_log_likelihood) << ',' << opt(h.kl) << ','
        << opt(h.accuracy) << ',' << opt(h.native_beta) << '\n';
  }
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("io: cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw FormatError("io: failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw FormatError("io: cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

}  // namespace boltzgen
