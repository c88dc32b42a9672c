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

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qemsense/config.hpp"
#include "qemsense/errors.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidationFailure = 2;
constexpr int kRuntimeError = 3;

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> format;
    int threads = 1;
};

// Writes to the output path, or to standard output when it is empty.
template <typename Fn>
void emit(const std::string &path, Fn &&write) {
    if (path.empty()) {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw qemsense::Error(qemsense::ErrorCode::InvalidInput, "cannot write " + path);
    write(os);
    if (!os) throw qemsense::Error(qemsense::ErrorCode::InvalidInput, "failed writing " + path);
}

void write_json(std::ostream &os, const nlohmann::json &j) { os << j.dump(2) << '\n'; }

std::optional<qemsense::ExperimentConfig> load(const Flags &flags) {
    qemsense::ValidationResult v = qemsense::validate_config_file(flags.config);
    if (!v.ok()) {
        for (const auto &e : v.errors) std::cerr << "error: " << e << '\n';
        return std::nullopt;
    }
    std::optional<qemsense::OutputFormat> format;
    if (flags.format) format = *flags.format == "json" ? qemsense::OutputFormat::Json : qemsense::OutputFormat::Csv;
    qemsense::apply_overrides(*v.config, flags.seed, flags.out, format);
    return std::move(v.config);
}

int cmd_validate(const Flags &flags) {
    auto cfg = load(flags);
    if (!cfg) return kValidationFailure;
    write_json(std::cout, cfg->resolved);
    std::cerr << "ok " << qemsense::config_hash(*cfg) << '\n';
    return kOk;
}

int cmd_run(const Flags &flags) {
    auto cfg = load(flags);
    if (!cfg) return kValidationFailure;
    auto rows = qemsense::run_experiment(*cfg, flags.threads);
    emit(cfg->output_path, [&](std::ostream &os) {
        if (cfg->format == qemsense::OutputFormat::Csv) {
            qemsense::write_rows_csv(os, rows);
        } else {
            write_json(os, {{"columns", qemsense::output_columns()}, {"rows", qemsense::rows_to_json(rows)}});
        }
    });
    if (!cfg->output_path.empty()) {
        emit(cfg->output_path + ".meta.json",
             [&](std::ostream &os) { write_json(os, qemsense::run_metadata(*cfg)); });
    }
    return kOk;
}

int cmd_plan(const Flags &flags) {
    auto cfg = load(flags);
    if (!cfg) return kValidationFailure;
    auto plans = qemsense::experiment_plans(*cfg, flags.threads);
    emit(cfg->output_path, [&](std::ostream &os) {
        if (cfg->format == qemsense::OutputFormat::Csv) {
            qemsense::write_plan_csv(os, cfg->sensing.tau, plans);
        } else {
            write_json(os, {{"plans", qemsense::plans_to_json(cfg->sensing.tau, plans)}});
        }
    });
    return kOk;
}

int cmd_bath(const Flags &flags) {
    auto cfg = load(flags);
    if (!cfg) return kValidationFailure;
    if (!std::holds_alternative<qemsense::BathParams>(cfg->noise)) {
        std::cerr << "error: noise.kind: bath needs \"spin_bath\" noise\n";
        return kValidationFailure;
    }
    auto curve = qemsense::bath_curve(*cfg, flags.threads);
    emit(cfg->output_path, [&](std::ostream &os) {
        if (cfg->format == qemsense::OutputFormat::Csv) {
            qemsense::write_curve_csv(os, curve);
        } else {
            write_json(os, qemsense::curve_to_json(curve));
        }
    });
    return kOk;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Mitigated quantum sensing experiments"};
    app.set_version_flag("--version", std::string(qemsense::kVersion));
    app.require_subcommand(1);

    Flags flags;
    app.add_option("--config", flags.config, "Experiment file (JSON)")->check(CLI::ExistingFile);
    app.add_option("--seed", flags.seed, "Override the seed");
    app.add_option("--out", flags.out, "Output path (default: standard output)");
    app.add_option("--format", flags.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--threads", flags.threads, "Worker threads")->check(CLI::PositiveNumber);

    int (*handler)(const Flags &) = nullptr;
    auto add = [&](const char *name, const char *help, int (*fn)(const Flags &)) {
        CLI::App *sub = app.add_subcommand(name, help);
        sub->fallthrough();
        sub->callback([&handler, fn] { handler = fn; });
    };
    add("run", "Run the sensing sweep", cmd_run);
    add("validate", "Check a config and print it with defaults filled in", cmd_validate);
    add("plan", "Print the mitigation plan at each time without sampling", cmd_plan);
    add("bath", "Print spin-bath coherence curves", cmd_bath);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kValidationFailure;
    }
    if (flags.config.empty()) {
        std::cerr << "error: --config is required\n";
        return kValidationFailure;
    }

    try {
        return handler(flags);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
}
