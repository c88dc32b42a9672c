// Copyright 2026 The qemsense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef QEMSENSE_CONFIG_HPP
#define QEMSENSE_CONFIG_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "qemsense/sensing.hpp"
#include "qemsense/spinbath.hpp"

// JSON experiment files for the command-line runner.
namespace qemsense {

inline constexpr const char *kVersion = "0.1.0";

enum class OutputFormat { Csv, Json };

struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::int64_t shots = 10000;
    SensingSpec sensing;
    std::variant<NoiseChannelSpec, BathParams> noise;
    Strategy strategy = Strategy::Optimized;
    OptimizeOptions optimize;
    std::string output_path;  // empty: standard output
    OutputFormat format = OutputFormat::Csv;

    /// The same experiment with defaults filled in and the time grid expanded;
    /// validating it yields this config again.
    nlohmann::json resolved;
};

struct ValidationResult {
    std::optional<ExperimentConfig> config;
    std::vector<std::string> errors;

    bool ok() const { return errors.empty() && config.has_value(); }
};

/// Checks the whole document and reports every problem found, not just the first.
ValidationResult validate_config(const nlohmann::json &doc);
ValidationResult validate_config_file(const std::string &path);

/// Applies command-line overrides and refreshes `resolved`.
void apply_overrides(ExperimentConfig &config, std::optional<std::uint64_t> seed,
                     std::optional<std::string> out, std::optional<OutputFormat> format);

/// 64-bit FNV-1a of the compact resolved JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig &config);

/// Bath coherence on the sensing grid for spin-bath experiments.
CoherenceCurve bath_curve(const ExperimentConfig &config, int threads);

std::vector<SweepRow> run_experiment(const ExperimentConfig &config, int threads);

/// Column names of the sweep table, in output order.
const std::vector<std::string> &output_columns();

/// '.'-decimal text with 17 significant digits; "inf", "-inf", "nan" otherwise.
std::string format_real(double v);

void write_rows_csv(std::ostream &os, const std::vector<SweepRow> &rows);
nlohmann::json rows_to_json(const std::vector<SweepRow> &rows);

void write_plan_csv(std::ostream &os, const std::vector<double> &tau, const std::vector<MitigationPlan> &plans);
nlohmann::json plans_to_json(const std::vector<double> &tau, const std::vector<MitigationPlan> &plans);

void write_curve_csv(std::ostream &os, const CoherenceCurve &curve);
nlohmann::json curve_to_json(const CoherenceCurve &curve);

/// Sidecar metadata: config hash, seed, library version and the resolved config.
nlohmann::json run_metadata(const ExperimentConfig &config);

/// Plans for every grid point (NotInvertible points give an empty plan with p = inf).
std::vector<MitigationPlan> experiment_plans(const ExperimentConfig &config, int threads);

}  // namespace qemsense

#endif
