// pybind11 bindings for the main operations: states and entanglement
// metrics, projector algebra, the source model, counting, and the analysis
// stack (fringes, CHSH, tomography, scenarios).

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sagnacsim/analysis.hpp"
#include "sagnacsim/io.hpp"
#include "sagnacsim/scenario.hpp"

namespace py = pybind11;
using namespace sagnacsim;

namespace {

TomographyData tomography_data_from_counts(const std::vector<double>& counts,
                                           const std::vector<double>& times) {
    const auto& settings = tomography_settings();
    if (counts.size() != settings.size()) {
        throw std::invalid_argument("need 16 counts in tomography_settings() order");
    }
    if (!times.empty() && times.size() != counts.size()) {
        throw std::invalid_argument("times must be empty or match counts");
    }
    std::vector<CountRecord> records;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        CountRecord r;
        r.setting_label = settings[k].name();
        r.raw_coincidences = static_cast<std::int64_t>(std::llround(counts[k]));
        r.acquisition_time = times.empty() ? 1.0 : times[k];
        records.push_back(std::move(r));
    }
    return TomographyData(std::move(records));
}

WaveplateKind waveplate_kind_from_string(const std::string& kind) {
    if (kind == "half") {
        return WaveplateKind::half;
    }
    if (kind == "quarter") {
        return WaveplateKind::quarter;
    }
    throw std::invalid_argument("waveplate kind must be 'half' or 'quarter'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Sagnac-source entanglement simulator: states, projectors, "
              "coincidence statistics, CHSH and tomography analysis";

    py::register_exception<invalid_state_error>(m, "InvalidStateError");
    py::register_exception<degenerate_phase_error>(m, "DegeneratePhaseError");
    py::register_exception<fit_degenerate_error>(m, "FitDegenerateError");
    py::register_exception<undefined_visibility_error>(m, "UndefinedVisibilityError");
    py::register_exception<undefined_correlator_error>(m, "UndefinedCorrelatorError");
    py::register_exception<bootstrap_error>(m, "BootstrapError");
    py::register_exception<config_error>(m, "ConfigError");
    py::register_exception<convergence_error>(m, "ConvergenceError");

    py::class_<DensityMatrix>(m, "DensityMatrix")
        .def(py::init<const Eigen::Matrix4cd&>(), py::arg("matrix"))
        .def_property_readonly("matrix",
                               [](const DensityMatrix& rho) { return rho.matrix(); })
        .def("min_eigenvalue", &DensityMatrix::min_eigenvalue)
        .def("to_json", [](const DensityMatrix& rho) { return density_matrix_to_json(rho); })
        .def_static("from_json", &density_matrix_from_json, py::arg("text"))
        .def("__repr__", [](const DensityMatrix& rho) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "<DensityMatrix trace=%.6f>",
                          rho.matrix().trace().real());
            return std::string(buf);
        });

    py::class_<PhysicalityReport>(m, "PhysicalityReport")
        .def_readonly("hermiticity_defect", &PhysicalityReport::hermiticity_defect)
        .def_readonly("trace_defect", &PhysicalityReport::trace_defect)
        .def_readonly("min_eigenvalue", &PhysicalityReport::min_eigenvalue)
        .def_property_readonly("passes", &PhysicalityReport::pass);

    m.def("wrap_phase", &wrap_phase, py::arg("phi"));
    m.def(
        "bell_phase_state",
        [](double phi) { return bell_phase_state(BellPhaseSpec(phi)); }, py::arg("phi"));
    m.def(
        "x_state",
        [](double concurrence_target, double phi) {
            return x_state(XStateSpec(concurrence_target, phi));
        },
        py::arg("concurrence_target"), py::arg("phi"));
    m.def("calibrated_x_state", &calibrated_x_state, py::arg("vis_hv"),
          py::arg("vis_ad"), py::arg("phi"));
    m.def("mix", &mix, py::arg("components"));
    m.def("concurrence", &concurrence, py::arg("rho"));
    m.def(
        "fidelity_to_pure",
        [](const DensityMatrix& rho, double target_phi) {
            return fidelity_to_pure(rho, BellPhaseSpec(target_phi));
        },
        py::arg("rho"), py::arg("target_phi"));
    m.def("infer_phase", &infer_phase, py::arg("rho"));
    m.def("validate_physical", &validate_physical, py::arg("rho"));

    // Projector algebra: plain 2x2 / 4x4 complex arrays on the python side.
    m.def(
        "linear_projector",
        [](double theta) { return linear_projector(AnalyzerSetting(theta)).p; },
        py::arg("theta"));
    m.def(
        "perpendicular",
        [](double theta) { return perpendicular(AnalyzerSetting(theta)).theta; },
        py::arg("theta"));
    m.def(
        "waveplate_operator",
        [](const std::string& kind, double axis_angle) {
            return waveplate_operator(waveplate_kind_from_string(kind), axis_angle);
        },
        py::arg("kind"), py::arg("axis_angle"));
    m.def(
        "projector_from_waveplates",
        [](double qwp, double hwp) { return projector_from_waveplates(qwp, hwp).p; },
        py::arg("qwp"), py::arg("hwp"));
    m.def(
        "analyzer_projector",
        [](double theta, double phase) { return analyzer_projector(theta, phase).p; },
        py::arg("theta"), py::arg("phase") = 0.0);
    m.def(
        "joint_projector",
        [](const Eigen::Matrix2cd& signal, const Eigen::Matrix2cd& idler) {
            return joint_projector(SingleQubitProjector{signal},
                                   SingleQubitProjector{idler})
                .p;
        },
        py::arg("signal"), py::arg("idler"));
    m.def(
        "born_probability",
        [](const DensityMatrix& rho, const Eigen::Matrix4cd& projector) {
            return born_probability(rho, TwoQubitProjector{projector});
        },
        py::arg("rho"), py::arg("projector"));
    m.def("tomography_settings", [] {
        py::list out;
        for (const TomographySetting& s : tomography_settings()) {
            py::dict entry;
            entry["name"] = s.name();
            entry["qwp_s"] = s.wp_signal.qwp;
            entry["hwp_s"] = s.wp_signal.hwp;
            entry["qwp_i"] = s.wp_idler.qwp;
            entry["hwp_i"] = s.wp_idler.hwp;
            entry["projector"] = s.projector.p;
            out.append(entry);
        }
        return out;
    });
    m.def("tomography_settings_csv", &tomography_settings_csv);

    // Source model.
    py::class_<PumpSpatialProfile>(m, "PumpSpatialProfile")
        .def(py::init([](const std::vector<std::pair<double, double>>& samples) {
                 std::vector<PumpSample> out;
                 for (const auto& [x, w] : samples) {
                     out.push_back(PumpSample{x, w});
                 }
                 return PumpSpatialProfile(std::move(out));
             }),
             py::arg("samples"))
        .def_property_readonly("samples", [](const PumpSpatialProfile& p) {
            std::vector<std::pair<double, double>> out;
            for (const PumpSample& s : p.samples) {
                out.emplace_back(s.position_mm, s.weight);
            }
            return out;
        });

    py::class_<DistortionMap>(m, "DistortionMap")
        .def(py::init([](const std::vector<std::tuple<double, double, double>>& entries) {
                 std::vector<DistortionMap::Entry> out;
                 for (const auto& [x, phi, c] : entries) {
                     out.push_back(DistortionMap::Entry{x, phi, c});
                 }
                 return DistortionMap(std::move(out));
             }),
             py::arg("entries"))
        .def_static("constant", &DistortionMap::constant, py::arg("phi"),
                    py::arg("concurrence") = 1.0)
        .def_static("linear_ramp", &DistortionMap::linear_ramp, py::arg("phi_center"),
                    py::arg("slope_rad_per_mm"), py::arg("half_span_mm"),
                    py::arg("concurrence") = 1.0)
        .def_static("from_csv_file", &DistortionMap::from_csv_file, py::arg("path"))
        .def("to_csv", &DistortionMap::to_csv)
        .def(
            "at",
            [](const DistortionMap& map, double x) {
                const DistortionMap::Entry e = map.at(x);
                return std::make_pair(e.phi, e.concurrence);
            },
            py::arg("position_mm"));

    m.def("led_profile", &led_profile, py::arg("diameter_mm"), py::arg("n_samples"));
    m.def("laser_profile", &laser_profile, py::arg("diameter_mm"),
          py::arg("center_mm") = 0.0);
    m.def("sagnac_output", &sagnac_output, py::arg("pump"), py::arg("distortion"));
    m.def(
        "fiber_mode_count",
        [](double core_diameter_um, double numerical_aperture, double wavelength_nm) {
            return fiber_mode_count(
                FiberSpec(core_diameter_um, numerical_aperture, wavelength_nm));
        },
        py::arg("core_diameter_um"), py::arg("numerical_aperture"),
        py::arg("wavelength_nm"));

    // Counting.
    m.def("accidental_rate", &accidental_rate, py::arg("singles_signal"),
          py::arg("singles_idler"), py::arg("tau"));
    m.def(
        "predict_rate",
        [](const DensityMatrix& rho, const Eigen::Matrix4cd& projector, double pair_rate,
           double singles_signal, double singles_idler, double tau) {
            return predict_rate(rho, TwoQubitProjector{projector},
                                RateBudget(pair_rate, singles_signal, singles_idler, tau));
        },
        py::arg("rho"), py::arg("projector"), py::arg("pair_rate"),
        py::arg("singles_signal"), py::arg("singles_idler"), py::arg("tau"));
    m.def("sample_counts", &sample_counts, py::arg("rate"), py::arg("time"),
          py::arg("seed"));
    m.def("derive_seed", &derive_seed, py::arg("root"), py::arg("index"));

    // Fringes.
    m.def(
        "fit_fringe",
        [](const std::vector<double>& theta_i, const std::vector<double>& rates) {
            if (theta_i.size() != rates.size()) {
                throw std::invalid_argument("theta_i and rates must have equal length");
            }
            FringeScan scan{PolLabel::H, 0.0, {}};
            for (std::size_t k = 0; k < theta_i.size(); ++k) {
                scan.points.push_back(FringePoint{theta_i[k], rates[k], 1.0});
            }
            const FringeFit fit = fit_fringe(scan);
            py::dict out;
            out["offset"] = fit.offset;
            out["amplitude"] = fit.amplitude;
            out["theta0"] = fit.theta0;
            out["visibility"] = fit.visibility;
            out["residual_sum_squares"] = fit.residual_sum_squares;
            out["degenerate_amplitude"] = fit.degenerate_amplitude;
            return out;
        },
        py::arg("theta_i"), py::arg("rates"));
    m.def("visibility_from_extrema", &visibility_from_extrema, py::arg("n_max"),
          py::arg("n_min"));

    // CHSH.
    py::enum_<ChshMinusTerm>(m, "ChshMinusTerm")
        .value("s_i", ChshMinusTerm::s_i)
        .value("s_iprime", ChshMinusTerm::s_iprime)
        .value("sprime_i", ChshMinusTerm::sprime_i)
        .value("sprime_iprime", ChshMinusTerm::sprime_iprime);

    py::class_<ChshSettings>(m, "ChshSettings")
        .def(py::init<>())
        .def_readwrite("theta_s", &ChshSettings::theta_s)
        .def_readwrite("theta_s_prime", &ChshSettings::theta_s_prime)
        .def_readwrite("theta_i", &ChshSettings::theta_i)
        .def_readwrite("theta_i_prime", &ChshSettings::theta_i_prime)
        .def_readwrite("minus_term", &ChshSettings::minus_term)
        .def_readwrite("analyzer_phase_s", &ChshSettings::analyzer_phase_s)
        .def_readwrite("analyzer_phase_i", &ChshSettings::analyzer_phase_i);

    m.def("canonical_chsh_settings", &canonical_chsh_settings);
    m.def("published_chsh_settings", &published_chsh_settings);
    m.def("chsh_E", &chsh_E, py::arg("n_para_para"), py::arg("n_perp_perp"),
          py::arg("n_para_perp"), py::arg("n_perp_para"));
    m.def("chsh_S", &chsh_S, py::arg("settings"), py::arg("e_values"));
    m.def("chsh_predict", &chsh_predict, py::arg("rho"), py::arg("settings"));
    m.def(
        "chsh_optimize",
        [](const DensityMatrix& rho, double grid_step_deg) {
            const ChshOptimum best = chsh_optimize(rho, grid_step_deg);
            return std::make_pair(best.settings, best.s_value);
        },
        py::arg("rho"), py::arg("grid_step_deg") = 0.5);

    // Tomography from counts in tomography_settings() order.
    m.def(
        "tomography_linear",
        [](const std::vector<double>& counts, const std::vector<double>& times,
           double tau) {
            return tomography_linear(tomography_data_from_counts(counts, times), tau);
        },
        py::arg("counts"), py::arg("times") = std::vector<double>{},
        py::arg("tau") = 0.0);
    m.def(
        "tomography_mle",
        [](const std::vector<double>& counts, const std::vector<double>& times,
           double tau) {
            const MleResult result =
                tomography_mle(tomography_data_from_counts(counts, times), tau);
            py::dict info;
            info["iterations"] = result.iterations;
            info["gradient_norm"] = result.gradient_norm;
            info["negative_log_likelihood"] = result.negative_log_likelihood;
            info["converged"] = result.converged;
            return std::make_pair(result.rho, info);
        },
        py::arg("counts"), py::arg("times") = std::vector<double>{},
        py::arg("tau") = 0.0);

    // Bootstrap over a 16-setting tomography count table: per-scalar
    // (mean, std) for concurrence, phase_over_pi, fidelity.
    m.def(
        "bootstrap_tomography",
        [](const std::vector<double>& counts, const std::vector<double>& times,
           int n_resamples, std::uint64_t seed, double tau, double target_phi) {
            ExperimentCounts data;
            data.window_tau = tau;
            data.target_phase = target_phi;
            data.tomography = tomography_data_from_counts(counts, times).records;
            const BootstrapSummary summary = bootstrap(data, n_resamples, seed);
            py::dict out;
            for (const auto& [key, stats] : summary.scalars) {
                out[key.c_str()] = std::make_pair(stats.mean, stats.stddev);
            }
            out["n_failed"] = summary.n_failed;
            return out;
        },
        py::arg("counts"), py::arg("times") = std::vector<double>{},
        py::arg("n_resamples") = 200, py::arg("seed") = 1, py::arg("tau") = 0.0,
        py::arg("target_phi") = kPi);

    // Scenario front-end.
    m.def(
        "run_scenario_file",
        [](const std::string& path) { return run_scenario(load_scenario(path)).report_json; },
        py::arg("path"));
    m.def(
        "run_scenario_text",
        [](const std::string& text) {
            return run_scenario(parse_scenario_text(text)).report_json;
        },
        py::arg("text"));
    m.def("builtin_scenario", [](const std::string& name) {
        const auto& presets = builtin_scenarios();
        auto it = presets.find(name);
        if (it == presets.end()) {
            throw std::invalid_argument("unknown builtin scenario " + name);
        }
        return it->second;
    });
    m.def(
        "reproduce",
        [](const std::string& target) {
            const ReproduceResult result = reproduce(reproduce_target_from_string(target));
            return std::make_pair(result.all_pass, format_reproduce_table(result));
        },
        py::arg("target"));

    m.attr("PI") = kPi;
    m.attr("__version__") = "0.1.0";
}
