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

#include "qemsense/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "qemsense/errors.hpp"
#include "qemsense/parallel.hpp"

namespace qemsense {

using nlohmann::json;

namespace {

// Collects every problem with a document instead of stopping at the first.
class Checker {
  public:
    std::vector<std::string> errors;

    void fail(const std::string &path, const std::string &message) { errors.push_back(path + ": " + message); }

    bool object(const json &j, const std::string &path) {
        if (j.is_object()) return true;
        fail(path, "must be an object");
        return false;
    }

    void known_keys(const json &j, const std::string &path, std::initializer_list<const char *> allowed) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            bool found = false;
            for (const char *k : allowed) found = found || it.key() == k;
            if (!found) fail(join(path, it.key()), "unknown key");
        }
    }

    static std::string join(const std::string &path, const std::string &key) {
        return path.empty() ? key : path + "." + key;
    }

    std::optional<double> number(const json &parent, const char *key, const std::string &path, bool required) {
        const std::string p = join(path, key);
        if (!parent.contains(key)) {
            if (required) fail(p, "is required");
            return std::nullopt;
        }
        return number_value(parent.at(key), p);
    }

    std::optional<double> number_value(const json &j, const std::string &p) {
        if (!j.is_number()) {
            fail(p, "must be a number");
            return std::nullopt;
        }
        double v = j.get<double>();
        if (!std::isfinite(v)) {
            fail(p, "must be finite");
            return std::nullopt;
        }
        return v;
    }

    std::optional<std::int64_t> integer(const json &parent, const char *key, const std::string &path, bool required) {
        const std::string p = join(path, key);
        if (!parent.contains(key)) {
            if (required) fail(p, "is required");
            return std::nullopt;
        }
        const json &j = parent.at(key);
        if (j.is_number_integer()) return j.get<std::int64_t>();
        if (j.is_number_float()) {
            double v = j.get<double>();
            if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9e15) return static_cast<std::int64_t>(v);
        }
        fail(p, "must be an integer");
        return std::nullopt;
    }

    std::optional<bool> boolean(const json &parent, const char *key, const std::string &path) {
        if (!parent.contains(key)) return std::nullopt;
        const json &j = parent.at(key);
        if (j.is_boolean()) return j.get<bool>();
        fail(join(path, key), "must be true or false");
        return std::nullopt;
    }

    std::optional<std::string> string(const json &parent, const char *key, const std::string &path, bool required) {
        const std::string p = join(path, key);
        if (!parent.contains(key)) {
            if (required) fail(p, "is required");
            return std::nullopt;
        }
        const json &j = parent.at(key);
        if (j.is_string()) return j.get<std::string>();
        fail(p, "must be a string");
        return std::nullopt;
    }

    std::optional<std::uint64_t> seed(const json &parent, const char *key, const std::string &path) {
        if (!parent.contains(key)) return std::nullopt;
        const json &j = parent.at(key);
        if (j.is_number_unsigned()) return j.get<std::uint64_t>();
        if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return j.get<std::uint64_t>();
        fail(join(path, key), "must be an unsigned 64-bit integer");
        return std::nullopt;
    }
};

struct ParsedRate {
    RateFunction fn = RateFunction::constant(0.0);
    json resolved;
};

// number | {constant: v} | {sinusoidal: {amplitude, frequency, offset}} | {table: [[t, v], ...]}
std::optional<ParsedRate> parse_rate(Checker &ck, const json &j, const std::string &path) {
    if (j.is_number()) {
        auto v = ck.number_value(j, path);
        if (!v) return std::nullopt;
        return ParsedRate{RateFunction::constant(*v), json{{"constant", *v}}};
    }
    if (!j.is_object() || j.size() != 1) {
        ck.fail(path, "must be a number or an object with one of constant, sinusoidal, table");
        return std::nullopt;
    }
    const std::string kind = j.begin().key();
    const json &body = j.begin().value();
    const std::string p = Checker::join(path, kind);
    if (kind == "constant") {
        auto v = ck.number_value(body, p);
        if (!v) return std::nullopt;
        return ParsedRate{RateFunction::constant(*v), json{{"constant", *v}}};
    }
    if (kind == "sinusoidal") {
        if (!ck.object(body, p)) return std::nullopt;
        ck.known_keys(body, p, {"amplitude", "frequency", "offset"});
        auto a = ck.number(body, "amplitude", p, true);
        auto f = ck.number(body, "frequency", p, true);
        double c = ck.number(body, "offset", p, false).value_or(0.0);
        if (!a || !f) return std::nullopt;
        return ParsedRate{RateFunction::sinusoidal(*a, *f, c),
                          json{{"sinusoidal", {{"amplitude", *a}, {"frequency", *f}, {"offset", c}}}}};
    }
    if (kind == "table") {
        if (!body.is_array() || body.empty()) {
            ck.fail(p, "must be a non-empty list of [t, value] pairs");
            return std::nullopt;
        }
        std::vector<std::pair<double, double>> points;
        bool good = true;
        for (std::size_t i = 0; i < body.size(); ++i) {
            const std::string pi = p + "[" + std::to_string(i) + "]";
            const json &pt = body[i];
            if (!pt.is_array() || pt.size() != 2) {
                ck.fail(pi, "must be a [t, value] pair");
                good = false;
                continue;
            }
            auto t = ck.number_value(pt[0], pi + "[0]");
            auto v = ck.number_value(pt[1], pi + "[1]");
            if (!t || !v) {
                good = false;
                continue;
            }
            if (!points.empty() && *t <= points.back().first) {
                ck.fail(pi, "times must be strictly increasing");
                good = false;
            }
            points.emplace_back(*t, *v);
        }
        if (!good) return std::nullopt;
        json resolved = json::array();
        for (auto &[t, v] : points) resolved.push_back({t, v});
        return ParsedRate{RateFunction::table(points), json{{"table", resolved}}};
    }
    ck.fail(path, "unknown rate type '" + kind + "'");
    return std::nullopt;
}

std::optional<ParsedRate> rate_field(Checker &ck, const json &noise, const char *key, const std::string &path) {
    if (!noise.contains(key)) return ParsedRate{RateFunction::constant(0.0), json{{"constant", 0.0}}};
    return parse_rate(ck, noise.at(key), Checker::join(path, key));
}

std::optional<std::vector<double>> parse_grid(Checker &ck, const json &j, const std::string &p) {
    std::vector<double> grid;
    if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) {
            auto v = ck.number_value(j[i], p + "[" + std::to_string(i) + "]");
            if (v) grid.push_back(*v);
        }
        if (grid.size() != j.size()) return std::nullopt;
    } else if (j.is_object()) {
        ck.known_keys(j, p, {"start", "stop", "count"});
        auto start = ck.number(j, "start", p, true);
        auto stop = ck.number(j, "stop", p, true);
        auto count = ck.integer(j, "count", p, true);
        if (!start || !stop || !count) return std::nullopt;
        if (*count < 1) {
            ck.fail(p + ".count", "must be >= 1");
            return std::nullopt;
        }
        if (*count == 1) {
            grid.push_back(*start);
        } else {
            for (std::int64_t i = 0; i < *count; ++i) {
                const double last = static_cast<double>(*count - 1);
                grid.push_back((*start * (last - static_cast<double>(i)) + *stop * static_cast<double>(i)) / last);
            }
        }
    } else {
        ck.fail(p, "must be a list of times or {start, stop, count}");
        return std::nullopt;
    }
    if (grid.empty()) {
        ck.fail(p, "must not be empty");
        return std::nullopt;
    }
    bool good = true;
    for (double t : grid) {
        if (t < 0.0) {
            ck.fail(p, "times must be non-negative");
            good = false;
            break;
        }
    }
    if (!good) return std::nullopt;
    return grid;
}

void parse_sensing(Checker &ck, const json &doc, ExperimentConfig &cfg, json &out) {
    const std::string p = "sensing";
    if (!doc.contains("sensing")) {
        ck.fail(p, "is required");
        return;
    }
    const json &s = doc.at("sensing");
    if (!ck.object(s, p)) return;
    ck.known_keys(s, p, {"mode", "field_nT", "omega_s", "gamma_e", "tau_grid_us", "measure_full_half_periods"});

    std::string mode = ck.string(s, "mode", p, false).value_or("dc");
    if (mode == "dc") {
        cfg.sensing.mode = SensingMode::DC;
    } else if (mode == "ac") {
        cfg.sensing.mode = SensingMode::AC;
    } else {
        ck.fail(p + ".mode", "must be \"dc\" or \"ac\"");
    }
    if (auto b = ck.number(s, "field_nT", p, true)) cfg.sensing.field_nt = *b;
    if (auto g = ck.number(s, "gamma_e", p, false)) {
        if (*g <= 0.0) ck.fail(p + ".gamma_e", "must be positive");
        cfg.sensing.gamma_e = *g;
    }
    if (auto f = ck.boolean(s, "measure_full_half_periods", p)) cfg.sensing.measure_full_half_periods = *f;
    bool omega_ok = true;
    if (cfg.sensing.mode == SensingMode::AC) {
        auto w = ck.number(s, "omega_s", p, true);
        omega_ok = w.has_value();
        if (w) {
            if (*w <= 0.0) {
                ck.fail(p + ".omega_s", "must be positive");
                omega_ok = false;
            }
            cfg.sensing.omega_s = *w;
        }
    } else if (s.contains("omega_s")) {
        ck.fail(p + ".omega_s", "only applies to mode \"ac\"");
    }

    std::optional<std::vector<double>> grid;
    if (!s.contains("tau_grid_us")) {
        ck.fail(p + ".tau_grid_us", "is required");
    } else {
        grid = parse_grid(ck, s.at("tau_grid_us"), p + ".tau_grid_us");
    }
    if (grid) {
        cfg.sensing.tau = *grid;
        if (cfg.sensing.mode == SensingMode::AC && omega_ok) {
            for (double t : *grid) {
                try {
                    accumulate_phase(cfg.sensing, t);
                } catch (const Error &e) {
                    ck.fail(p + ".tau_grid_us", e.what());
                    break;
                }
            }
        }
    }

    out["sensing"] = {{"mode", mode},
                      {"field_nT", cfg.sensing.field_nt},
                      {"gamma_e", cfg.sensing.gamma_e},
                      {"tau_grid_us", cfg.sensing.tau},
                      {"measure_full_half_periods", cfg.sensing.measure_full_half_periods}};
    if (cfg.sensing.mode == SensingMode::AC) out["sensing"]["omega_s"] = cfg.sensing.omega_s;
}

void parse_noise(Checker &ck, const json &doc, ExperimentConfig &cfg, json &out) {
    const std::string p = "noise";
    if (!doc.contains("noise")) {
        ck.fail(p, "is required");
        return;
    }
    const json &n = doc.at("noise");
    if (!ck.object(n, p)) return;
    auto kind = ck.string(n, "kind", p, true);
    if (!kind) return;

    json r = {{"kind", *kind}};
    if (*kind == "dephasing" || *kind == "relaxation" || *kind == "thermalization") {
        NoiseChannelSpec spec;
        if (*kind == "thermalization") {
            ck.known_keys(n, p, {"kind", "gamma0", "n_thermal", "omega_noise"});
            spec.kind = NoiseKind::Thermalization;
            auto g0 = ck.number(n, "gamma0", p, true);
            auto nt = ck.number(n, "n_thermal", p, true);
            if (g0 && nt) {
                ThermalParams tp{*g0, *nt};
                try {
                    tp.validate();
                    spec.thermal = tp;
                } catch (const Error &e) {
                    ck.fail(p, e.what());
                }
                r["gamma0"] = *g0;
                r["n_thermal"] = *nt;
            }
        } else {
            ck.known_keys(n, p, {"kind", "gamma", "omega_noise"});
            spec.kind = *kind == "dephasing" ? NoiseKind::Dephasing : NoiseKind::Relaxation;
            if (auto g = rate_field(ck, n, "gamma", p)) {
                spec.rates.gamma = g->fn;
                r["gamma"] = g->resolved;
            }
        }
        if (auto w = rate_field(ck, n, "omega_noise", p)) {
            spec.rates.omega_noise = w->fn;
            r["omega_noise"] = w->resolved;
        }
        cfg.noise = spec;
    } else if (*kind == "custom_ptm") {
        ck.known_keys(n, p, {"kind", "ptm"});
        NoiseChannelSpec spec;
        spec.kind = NoiseKind::CustomPtm;
        if (!n.contains("ptm")) {
            ck.fail(p + ".ptm", "is required");
        } else {
            const json &m = n.at("ptm");
            bool shape = m.is_array() && m.size() == 4;
            for (std::size_t i = 0; shape && i < 4; ++i) shape = m[i].is_array() && m[i].size() == 4;
            if (!shape) {
                ck.fail(p + ".ptm", "must be a 4x4 list of numbers");
            } else {
                bool good = true;
                for (int i = 0; i < 4; ++i) {
                    for (int k = 0; k < 4; ++k) {
                        auto v = ck.number_value(m[i][k], p + ".ptm[" + std::to_string(i) + "][" + std::to_string(k) + "]");
                        good = good && v.has_value();
                        if (v) spec.custom_ptm(i, k) = *v;
                    }
                }
                if (good) {
                    CPTPReport rep = check_cptp(ChannelRep::from_ptm(spec.custom_ptm), 1e-9);
                    if (!rep.cp || !rep.tp) ck.fail(p + ".ptm", "is not a CPTP map");
                    json rows = json::array();
                    for (int i = 0; i < 4; ++i) {
                        rows.push_back({spec.custom_ptm(i, 0), spec.custom_ptm(i, 1), spec.custom_ptm(i, 2),
                                        spec.custom_ptm(i, 3)});
                    }
                    r["ptm"] = rows;
                }
            }
        }
        cfg.noise = spec;
    } else if (*kind == "spin_bath") {
        ck.known_keys(n, p, {"kind", "density_per_nm2", "r_cut_nm", "nv_depth_nm", "n_configurations", "gcce_order",
                             "fixed_spin_xyz_nm", "flipflop", "seed"});
        BathParams b;
        if (auto v = ck.number(n, "density_per_nm2", p, true)) {
            if (*v < 0.0) ck.fail(p + ".density_per_nm2", "must be >= 0");
            b.density = *v;
        }
        if (auto v = ck.number(n, "r_cut_nm", p, false)) {
            if (*v <= 0.0) ck.fail(p + ".r_cut_nm", "must be positive");
            b.r_cut = *v;
        }
        if (auto v = ck.number(n, "nv_depth_nm", p, false)) {
            if (*v <= 0.0) ck.fail(p + ".nv_depth_nm", "must be positive");
            b.nv_depth = *v;
        }
        if (auto v = ck.integer(n, "n_configurations", p, false)) {
            if (*v < 1 || *v > 10000000) ck.fail(p + ".n_configurations", "must be between 1 and 10000000");
            b.n_configurations = static_cast<int>(std::clamp<std::int64_t>(*v, 1, 10000000));
        }
        if (auto v = ck.integer(n, "gcce_order", p, false)) {
            if (*v < 0 || *v > 2) ck.fail(p + ".gcce_order", "must be 0, 1 or 2");
            b.gcce_order = static_cast<int>(std::clamp<std::int64_t>(*v, 0, 2));
        }
        if (auto v = ck.boolean(n, "flipflop", p)) b.flipflop = *v;
        if (n.contains("fixed_spin_xyz_nm")) {
            const json &f = n.at("fixed_spin_xyz_nm");
            if (!f.is_array() || f.size() != 3) {
                ck.fail(p + ".fixed_spin_xyz_nm", "must be [x, y, z]");
            } else {
                Vec3 v;
                bool good = true;
                for (int i = 0; i < 3; ++i) {
                    auto c = ck.number_value(f[i], p + ".fixed_spin_xyz_nm[" + std::to_string(i) + "]");
                    good = good && c.has_value();
                    if (c) v[i] = *c;
                }
                if (good) b.fixed_spin = v;
            }
        }
        auto bath_seed = ck.seed(n, "seed", p);
        if (bath_seed) b.seed = *bath_seed;
        r["density_per_nm2"] = b.density;
        r["r_cut_nm"] = b.r_cut;
        r["nv_depth_nm"] = b.nv_depth;
        r["n_configurations"] = b.n_configurations;
        r["gcce_order"] = b.gcce_order;
        r["flipflop"] = b.flipflop;
        if (b.fixed_spin) r["fixed_spin_xyz_nm"] = {(*b.fixed_spin)[0], (*b.fixed_spin)[1], (*b.fixed_spin)[2]};
        if (bath_seed) r["seed"] = *bath_seed;
        cfg.noise = b;
    } else {
        ck.fail(p + ".kind", "must be one of dephasing, relaxation, thermalization, custom_ptm, spin_bath");
        return;
    }
    out["noise"] = r;
}

const char *strategy_name(Strategy s) {
    switch (s) {
        case Strategy::None: return "none";
        case Strategy::Inverse: return "inverse";
        case Strategy::Optimized: return "optimized";
        case Strategy::Analytic: return "analytic";
    }
    return "none";
}

// Bath draws use their own seed so they never share streams with shot sampling.
std::uint64_t bath_seed(const ExperimentConfig &config, const BathParams &b, bool explicit_seed) {
    if (explicit_seed) return b.seed;
    return stream_rng(config.seed, std::numeric_limits<std::uint64_t>::max())();
}

bool has_explicit_bath_seed(const ExperimentConfig &config) {
    return config.resolved.contains("noise") && config.resolved["noise"].contains("seed");
}

NoiseSource noise_source(const ExperimentConfig &config, int threads) {
    if (const auto *spec = std::get_if<NoiseChannelSpec>(&config.noise)) return *spec;
    return bath_curve(config, threads);
}

SweepOptions sweep_options(const ExperimentConfig &config, int threads) {
    SweepOptions opt;
    opt.strategy = config.strategy;
    opt.shots = config.shots;
    opt.seed = config.seed;
    opt.threads = threads;
    opt.optimize = config.optimize;
    return opt;
}

std::string shots_text(const std::vector<std::int64_t> &shots) {
    std::string s;
    for (std::size_t i = 0; i < shots.size(); ++i) {
        if (i) s += ';';
        s += std::to_string(shots[i]);
    }
    return s;
}

std::string optional_text(const std::optional<double> &v) { return v ? format_real(*v) : std::string(); }

json real_json(double v) {
    if (std::isfinite(v)) return v;
    return format_real(v);
}

json optional_json(const std::optional<double> &v) { return v ? real_json(*v) : json(nullptr); }

}  // namespace

ValidationResult validate_config(const json &doc) {
    Checker ck;
    ValidationResult result;
    if (!doc.is_object()) {
        result.errors.push_back("config: top level must be an object");
        return result;
    }
    ck.known_keys(doc, "", {"seed", "shots", "sensing", "noise", "mitigation_strategy", "optimizer_refine", "output"});

    ExperimentConfig cfg;
    json out = json::object();
    if (auto s = ck.seed(doc, "seed", "")) cfg.seed = *s;
    if (auto n = ck.integer(doc, "shots", "", false)) {
        if (*n < 1) ck.fail("shots", "shots must be ≥ 1");
        cfg.shots = *n;
    }
    parse_sensing(ck, doc, cfg, out);
    parse_noise(ck, doc, cfg, out);

    std::string strategy = ck.string(doc, "mitigation_strategy", "", false).value_or("optimized");
    if (strategy == "none") {
        cfg.strategy = Strategy::None;
    } else if (strategy == "inverse") {
        cfg.strategy = Strategy::Inverse;
    } else if (strategy == "optimized") {
        cfg.strategy = Strategy::Optimized;
    } else if (strategy == "analytic") {
        cfg.strategy = Strategy::Analytic;
        const auto *spec = std::get_if<NoiseChannelSpec>(&cfg.noise);
        if (spec && spec->kind == NoiseKind::CustomPtm && out.contains("noise")) {
            ck.fail("mitigation_strategy", "analytic plans are not available for custom_ptm noise");
        }
    } else {
        ck.fail("mitigation_strategy", "must be one of inverse, optimized, analytic, none");
    }
    if (auto r = ck.boolean(doc, "optimizer_refine", "")) cfg.optimize.refine = *r;

    std::string format = "csv";
    if (doc.contains("output")) {
        const json &o = doc.at("output");
        if (ck.object(o, "output")) {
            ck.known_keys(o, "output", {"path", "format"});
            if (auto path = ck.string(o, "path", "output", false)) cfg.output_path = *path;
            format = ck.string(o, "format", "output", false).value_or("csv");
            if (format == "json") {
                cfg.format = OutputFormat::Json;
            } else if (format != "csv") {
                ck.fail("output.format", "must be \"csv\" or \"json\"");
            }
        }
    }

    result.errors = std::move(ck.errors);
    if (!result.errors.empty()) return result;

    out["seed"] = cfg.seed;
    out["shots"] = cfg.shots;
    out["mitigation_strategy"] = strategy_name(cfg.strategy);
    out["optimizer_refine"] = cfg.optimize.refine;
    out["output"] = {{"path", cfg.output_path}, {"format", format}};
    cfg.resolved = std::move(out);
    result.config = std::move(cfg);
    return result;
}

ValidationResult validate_config_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        ValidationResult r;
        r.errors.push_back(path + ": cannot open file");
        return r;
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error &e) {
        ValidationResult r;
        r.errors.push_back(path + ": " + e.what());
        return r;
    }
    return validate_config(doc);
}

void apply_overrides(ExperimentConfig &config, std::optional<std::uint64_t> seed, std::optional<std::string> out,
                     std::optional<OutputFormat> format) {
    if (seed) {
        config.seed = *seed;
        config.resolved["seed"] = *seed;
    }
    if (out) {
        config.output_path = *out;
        config.resolved["output"]["path"] = *out;
    }
    if (format) {
        config.format = *format;
        config.resolved["output"]["format"] = *format == OutputFormat::Json ? "json" : "csv";
    }
}

std::string config_hash(const ExperimentConfig &config) {
    const std::string text = config.resolved.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

CoherenceCurve bath_curve(const ExperimentConfig &config, int threads) {
    const auto *b = std::get_if<BathParams>(&config.noise);
    if (!b) throw Error(ErrorCode::InvalidInput, "the experiment has no spin-bath noise");
    BathParams params = *b;
    params.seed = bath_seed(config, *b, has_explicit_bath_seed(config));
    return ensemble_signal(params, config.sensing.tau, threads);
}

std::vector<SweepRow> run_experiment(const ExperimentConfig &config, int threads) {
    return sweep(config.sensing, noise_source(config, threads), sweep_options(config, threads));
}

std::vector<MitigationPlan> experiment_plans(const ExperimentConfig &config, int threads) {
    NoiseSource source = noise_source(config, threads);
    SweepOptions opt = sweep_options(config, threads);
    if (opt.strategy == Strategy::None) opt.strategy = Strategy::Optimized;
    const auto &grid = config.sensing.tau;
    std::vector<MitigationPlan> plans(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        try {
            plans[i] = sweep_plan(source, grid, i, opt);
        } catch (const Error &e) {
            if (e.code() != ErrorCode::NotInvertible) throw;
            plans[i].p = std::numeric_limits<double>::infinity();
        }
    });
    return plans;
}

const std::vector<std::string> &output_columns() {
    static const std::vector<std::string> columns = {
        "tau_us", "theta_rad", "p", "s_ideal", "s_noisy", "s_mitigated", "s_mitigated_std",
        "eta_mitigated", "eta_naqs", "eta_bound", "circuits_used", "shots_per_circuit"};
    return columns;
}

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void write_rows_csv(std::ostream &os, const std::vector<SweepRow> &rows) {
    const auto &cols = output_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    for (const SweepRow &r : rows) {
        os << format_real(r.tau) << ',' << format_real(r.theta) << ',' << format_real(r.p) << ','
           << format_real(r.s_ideal) << ',' << format_real(r.s_noisy) << ',' << optional_text(r.s_mitigated) << ','
           << optional_text(r.s_mitigated_std) << ',' << optional_text(r.eta_mitigated) << ','
           << optional_text(r.eta_naqs) << ',' << optional_text(r.eta_bound) << ',' << r.circuits_used << ','
           << shots_text(r.shots) << '\n';
    }
}

json rows_to_json(const std::vector<SweepRow> &rows) {
    json out = json::array();
    for (const SweepRow &r : rows) {
        out.push_back({{"tau_us", r.tau},
                       {"theta_rad", r.theta},
                       {"p", real_json(r.p)},
                       {"s_ideal", r.s_ideal},
                       {"s_noisy", r.s_noisy},
                       {"s_mitigated", optional_json(r.s_mitigated)},
                       {"s_mitigated_std", optional_json(r.s_mitigated_std)},
                       {"eta_mitigated", optional_json(r.eta_mitigated)},
                       {"eta_naqs", optional_json(r.eta_naqs)},
                       {"eta_bound", optional_json(r.eta_bound)},
                       {"circuits_used", r.circuits_used},
                       {"shots_per_circuit", r.shots},
                       {"invertible", r.invertible},
                       {"nonlinear", r.nonlinear}});
    }
    return out;
}

void write_plan_csv(std::ostream &os, const std::vector<double> &tau, const std::vector<MitigationPlan> &plans) {
    os << "tau_us,p,circuit,sign,weight,shot_fraction,nu,mu,needs_ancilla,"
          "pre_axis_x,pre_axis_y,pre_axis_z,pre_angle,post_axis_x,post_axis_y,post_axis_z,post_angle\n";
    for (std::size_t i = 0; i < plans.size(); ++i) {
        const MitigationPlan &plan = plans[i];
        if (plan.circuits.empty()) {
            os << format_real(tau[i]) << ',' << format_real(plan.p) << ",,,,,,,,,,,,,,,\n";
            continue;
        }
        for (std::size_t j = 0; j < plan.circuits.size(); ++j) {
            const MitigationCircuit &c = plan.circuits[j];
            const ExtremalRealization &r = c.realization;
            os << format_real(tau[i]) << ',' << format_real(plan.p) << ',' << j << ','
               << (c.sign == CircuitSign::Plus ? "+" : "-") << ',' << format_real(c.weight) << ','
               << format_real(c.shot_fraction) << ',' << format_real(r.nu) << ',' << format_real(r.mu) << ','
               << (r.needs_ancilla ? "true" : "false");
            for (const Rotation *rot : {&r.pre_rotation, &r.post_rotation}) {
                for (int k = 0; k < 3; ++k) os << ',' << format_real(rot->axis[k]);
                os << ',' << format_real(rot->angle);
            }
            os << '\n';
        }
    }
}

json plans_to_json(const std::vector<double> &tau, const std::vector<MitigationPlan> &plans) {
    json out = json::array();
    for (std::size_t i = 0; i < plans.size(); ++i) {
        json circuits = json::array();
        for (const MitigationCircuit &c : plans[i].circuits) {
            const ExtremalRealization &r = c.realization;
            auto rot = [](const Rotation &q) {
                return json{{"axis", {q.axis[0], q.axis[1], q.axis[2]}}, {"angle", q.angle}};
            };
            circuits.push_back({{"sign", c.sign == CircuitSign::Plus ? "+" : "-"},
                                {"weight", c.weight},
                                {"shot_fraction", c.shot_fraction},
                                {"nu", r.nu},
                                {"mu", r.mu},
                                {"needs_ancilla", r.needs_ancilla},
                                {"pre_rotation", rot(r.pre_rotation)},
                                {"post_rotation", rot(r.post_rotation)}});
        }
        out.push_back({{"tau_us", tau[i]}, {"p", real_json(plans[i].p)}, {"circuits", circuits}});
    }
    return out;
}

void write_curve_csv(std::ostream &os, const CoherenceCurve &curve) {
    os << "tau_us,re_w,im_w,abs_w\n";
    for (std::size_t i = 0; i < curve.times.size(); ++i) {
        const Complex w = curve.values[i];
        os << format_real(curve.times[i]) << ',' << format_real(w.real()) << ',' << format_real(w.imag()) << ','
           << format_real(std::abs(w)) << '\n';
    }
}

json curve_to_json(const CoherenceCurve &curve) {
    json points = json::array();
    for (std::size_t i = 0; i < curve.times.size(); ++i) {
        const Complex w = curve.values[i];
        points.push_back({{"tau_us", curve.times[i]}, {"re_w", w.real()}, {"im_w", w.imag()}, {"abs_w", std::abs(w)}});
    }
    return json{{"order", curve.order}, {"points", points}};
}

json run_metadata(const ExperimentConfig &config) {
    return json{{"config_hash", config_hash(config)},
                {"seed", config.seed},
                {"version", kVersion},
                {"config", config.resolved}};
}

}  // namespace qemsense
