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

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "boltzgen/ais.hpp"
#include "boltzgen/bm.hpp"
#include "boltzgen/exact.hpp"
#include "boltzgen/ising.hpp"
#include "boltzgen/simcim.hpp"
#include "boltzgen/thermometry.hpp"

namespace boltzgen {

using Json = nlohmann::ordered_json;

/// Shortest text that reads back as the same double.
std::string format_double(double value);

/// {"n": n, "j": [row-major n*n], "b": [n]}.
Json model_to_json(const IsingModel& model);
IsingModel model_from_json(const Json& doc);
IsingModel load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const IsingModel& model);

Json schedule_to_json(const ScheduleConfig& schedule);
/// Missing keys keep their defaults; unknown keys are rejected.
ScheduleConfig schedule_from_json(const Json& doc);

Json estimate_to_json(const TemperatureEstimate& estimate);
Json ais_to_json(const AisResult& result);

/// Header s0..s{n-1}[,energy], one configuration per line.
void write_samples_csv(std::ostream& out, const SpinBatch& batch, bool with_energy = true);
SpinBatch read_samples_csv(const std::filesystem::path& path);

/// state_index,log_prob for every state.
void write_exact_csv(std::ostream& out, const ExactDistribution& dist);

/// Binary PGM (P5): 0 for spin -1, 255 for +1, row-major.
std::string pgm_bytes(SpinView bitmap, std::size_t rows, std::size_t cols);

/// update,epoch,loglik,kl,accuracy,native_beta; absent values stay empty.
void write_history_csv(std::ostream& out, const std::vector<HistoryEntry>& history);

/// Writes to a sibling temporary file and renames it over `path`.
void atomic_write(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

}  // namespace boltzgen
