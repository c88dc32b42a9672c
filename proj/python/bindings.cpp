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

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qemsense/channels.hpp"
#include "qemsense/config.hpp"
#include "qemsense/errors.hpp"
#include "qemsense/mitigation.hpp"
#include "qemsense/sensing.hpp"
#include "qemsense/spinbath.hpp"

namespace py = pybind11;
using namespace qemsense;

namespace {

py::dict rotation_dict(const Rotation &r) {
    py::dict d;
    d["axis"] = std::vector<double>{r.axis[0], r.axis[1], r.axis[2]};
    d["angle"] = r.angle;
    return d;
}

py::dict plan_dict(const MitigationPlan &plan) {
    py::list circuits;
    for (const auto &c : plan.circuits) {
        py::dict d;
        d["sign"] = c.sign == CircuitSign::Plus ? "+" : "-";
        d["weight"] = c.weight;
        d["shot_fraction"] = c.shot_fraction;
        d["nu"] = c.realization.nu;
        d["mu"] = c.realization.mu;
        d["needs_ancilla"] = c.realization.needs_ancilla;
        d["pre_rotation"] = rotation_dict(c.realization.pre_rotation);
        d["post_rotation"] = rotation_dict(c.realization.post_rotation);
        d["ptm"] = RealMat4(c.realization.ptm());
        circuits.append(d);
    }
    py::dict out;
    out["p"] = plan.p;
    out["circuits"] = circuits;
    out["weighted_ptm"] = plan.weighted_ptm();
    out["reconstruction_error"] = plan.reconstruction_error();
    return out;
}

py::object opt(const std::optional<double> &v) { return v ? py::cast(*v) : py::none(); }

py::list rows_list(const std::vector<SweepRow> &rows) {
    py::list out;
    for (const auto &r : rows) {
        py::dict d;
        d["tau_us"] = r.tau;
        d["theta_rad"] = r.theta;
        d["p"] = r.p;
        d["invertible"] = r.invertible;
        d["s_ideal"] = r.s_ideal;
        d["s_noisy"] = r.s_noisy;
        d["s_mitigated"] = opt(r.s_mitigated);
        d["s_mitigated_std"] = opt(r.s_mitigated_std);
        d["eta_mitigated"] = opt(r.eta_mitigated);
        d["eta_naqs"] = opt(r.eta_naqs);
        d["eta_bound"] = opt(r.eta_bound);
        d["circuits_used"] = r.circuits_used;
        d["shots_per_circuit"] = r.shots;
        out.append(d);
    }
    return out;
}

ExperimentConfig parse_config(const std::string &text) {
    ValidationResult v = validate_config(nlohmann::json::parse(text));
    if (!v.ok()) {
        std::string msg;
        for (const auto &e : v.errors) msg += (msg.empty() ? "" : "\n") + e;
        throw py::value_error(msg);
    }
    return *v.config;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Quasi-probabilistic error mitigation for qubit sensors";
    m.attr("__version__") = kVersion;

    py::register_exception<Error>(m, "QemsenseError", PyExc_RuntimeError);

    m.def("dephasing_ptm", [](double g, double phi) { return dephasing_channel(g, phi).ptm(); },
          py::arg("big_gamma"), py::arg("phi") = 0.0);
    m.def("relaxation_ptm", [](double g, double phi) { return relaxation_channel(g, phi).ptm(); },
          py::arg("big_gamma"), py::arg("phi") = 0.0);
    m.def(
        "thermalization_ptm",
        [](double gamma0, double n, double t, double phi) {
            return thermalization_channel(ThermalParams{gamma0, n}, t, phi).ptm();
        },
        py::arg("gamma0"), py::arg("n_thermal"), py::arg("t"), py::arg("phi") = 0.0);
    m.def("measurement_frame_ptm", [](const RealMat4 &ptm) {
        return frame_conjugate(ChannelRep::from_ptm(ptm), measurement_frame()).ptm();
    });

    m.def("is_cptp", [](const RealMat4 &ptm, double tol) { return check_cptp(ChannelRep::from_ptm(ptm), tol).cptp(); },
          py::arg("ptm"), py::arg("tolerance") = 1e-10);
    m.def("choi", [](const RealMat4 &ptm) { return Mat4(ChannelRep::from_ptm(ptm).choi()); });
    m.def("inverse_ptm", [](const RealMat4 &noise) { return invert_channel(ChannelRep::from_ptm(noise)).ptm(); });
    m.def("overhead", [](const RealMat4 &map) { return overhead(GeneralMap::from_ptm(map)); });
    m.def("build_plan", [](const RealMat4 &map) { return plan_dict(build_plan(GeneralMap::from_ptm(map))); },
          "Plan realising a trace-preserving map given by its PTM.");
    m.def(
        "optimize",
        [](const RealMat4 &noise, bool refine) {
            OptimizeOptions o;
            o.refine = refine;
            OptimizedMitigation r = optimize_mitigation_map(ChannelRep::from_ptm(noise), o);
            py::dict d;
            d["ptm"] = r.map.ptm();
            d["p"] = r.p;
            d["p_inverse"] = r.p_inverse;
            d["candidate_index"] = r.candidate_index;
            d["plan"] = plan_dict(r.plan);
            return d;
        },
        py::arg("noise_ptm"), py::arg("refine") = false);
    m.def(
        "realize_extremal",
        [](const RealMat4 &ptm) {
            ExtremalRealization r = realize_extremal(ChannelRep::from_ptm(ptm));
            py::dict d;
            d["nu"] = r.nu;
            d["mu"] = r.mu;
            d["needs_ancilla"] = r.needs_ancilla;
            d["pre_rotation"] = rotation_dict(r.pre_rotation);
            d["post_rotation"] = rotation_dict(r.post_rotation);
            return d;
        });

    m.def(
        "bath_signal",
        [](double density, double r_cut, double depth, int n_configurations, int order, std::uint64_t seed,
           const std::vector<double> &tau, std::optional<std::vector<double>> fixed_spin, bool flipflop,
           int threads) {
            BathParams b;
            b.density = density;
            b.r_cut = r_cut;
            b.nv_depth = depth;
            b.n_configurations = n_configurations;
            b.gcce_order = order;
            b.seed = seed;
            b.flipflop = flipflop;
            if (fixed_spin) {
                if (fixed_spin->size() != 3) throw py::value_error("fixed_spin must have three coordinates");
                b.fixed_spin = Vec3((*fixed_spin)[0], (*fixed_spin)[1], (*fixed_spin)[2]);
            }
            py::gil_scoped_release release;
            return ensemble_signal(b, tau, threads).values;
        },
        py::arg("density"), py::arg("r_cut"), py::arg("nv_depth"), py::arg("n_configurations"), py::arg("order"),
        py::arg("seed"), py::arg("tau"), py::arg("fixed_spin") = py::none(), py::arg("flipflop") = true,
        py::arg("threads") = 1);
    m.def("dipolar_coupling", [](const std::vector<double> &sep) {
        if (sep.size() != 3) throw py::value_error("separation must have three coordinates");
        DipolarCoupling c = dipolar_coupling(Vec3(sep[0], sep[1], sep[2]));
        return std::make_pair(c.a_zz, c.a_flipflop);
    });

    m.def(
        "validate_config",
        [](const std::string &text) {
            ValidationResult v = validate_config(nlohmann::json::parse(text));
            py::dict d;
            d["ok"] = v.ok();
            d["errors"] = v.errors;
            d["resolved"] = v.config ? v.config->resolved.dump() : std::string();
            return d;
        },
        "Validates a JSON document given as text.");
    m.def(
        "run",
        [](const std::string &text, int threads) {
            ExperimentConfig cfg = parse_config(text);
            std::vector<SweepRow> rows;
            {
                py::gil_scoped_release release;
                rows = run_experiment(cfg, threads);
            }
            return rows_list(rows);
        },
        py::arg("config_json"), py::arg("threads") = 1);
    m.def("output_columns", &output_columns);
}
