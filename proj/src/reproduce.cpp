// Reference-value reproduction tables for the `reproduce` subcommand, plus
// the bundled scenario presets. Reference numbers and tolerances come from
// the experiment this toolkit models; tolerances marked "model gap" cover
// the idealizations (perfect analyzers, X-state family) documented in the
// README.

#include <cmath>
#include <sstream>

#include "sagnacsim/io.hpp"
#include "sagnacsim/scenario.hpp"

namespace sagnacsim {

namespace {

// Published values reproduced by the tables below.
struct ReferenceValues {
    // Fringe visibilities in the H, V, A, D bases.
    std::array<double, 4> vis_led{0.9807, 0.9585, 0.8145, 0.8131};
    std::array<double, 4> vis_laser{0.9769, 0.9462, 0.9508, 0.9340};
    double s_led = 2.532;
    double s_laser = 2.695;
    double c_led = 0.834;
    double c_laser = 0.952;
    double phase_led_over_pi = -0.941;
    double phase_laser_over_pi = -0.943;
    double fidelity_led = 0.8988;
    double fidelity_laser = 0.9636;
    // Two-path probe states and their equal mixture.
    double c_path1 = 0.933, phase_path1_over_pi = 0.5558;
    double c_path2 = 0.916, phase_path2_over_pi = 0.3220;
    double c_mixture = 0.8558;
    // Counting.
    double accidental_laser = 50.0;       // s^-1
    double accidental_led_per_min = 0.006;
    double singles_laser = 155000.0, singles_led = 220.0, tau = 1e-9;
    double max_rate_laser = 11300.0;
    // Fibers.
    double mode_count_claim = 45000.0;
    double spdc_mode_estimate = 1500.0;   // scenario constant, not derived
};

const ReferenceValues kRef{};

std::string fmt(double v, int precision = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    return buf;
}

ReproduceRow abs_row(const std::string& quantity, double computed, double reference,
                     double tol) {
    return ReproduceRow{quantity, fmt(computed, 6), fmt(reference, 6),
                        "|diff| <= " + fmt(tol, 3),
                        std::abs(computed - reference) <= tol};
}

ReproduceRow rel_row(const std::string& quantity, double computed, double reference,
                     double rel_tol) {
    return ReproduceRow{quantity, fmt(computed, 6), "~" + fmt(reference, 3),
                        "within " + fmt(100.0 * rel_tol, 3) + "%",
                        std::abs(computed - reference) <= rel_tol * reference};
}

ReproduceRow greater_row(const std::string& quantity, double computed, double bound) {
    return ReproduceRow{quantity, fmt(computed, 6), "> " + fmt(bound, 6),
                        "computed > " + fmt(bound, 6), computed > bound};
}

ReproduceRow range_row(const std::string& quantity, double computed, double reference,
                       double lo, double hi) {
    return ReproduceRow{quantity, fmt(computed, 6), fmt(reference, 6),
                        "in [" + fmt(lo, 4) + ", " + fmt(hi, 4) + "]",
                        computed >= lo && computed <= hi};
}

// Noiseless fringe visibilities of a state in the four scan bases, from a
// sinusoidal fit of exact Born probabilities.
std::array<double, 4> noiseless_visibilities(const DensityMatrix& rho) {
    const std::array<PolLabel, 4> bases{PolLabel::H, PolLabel::V, PolLabel::A,
                                        PolLabel::D};
    std::array<double, 4> vis{};
    for (std::size_t b = 0; b < bases.size(); ++b) {
        FringeScan scan{bases[b], fringe_basis_angle(bases[b]), {}};
        for (int deg = 0; deg <= 180; deg += 15) {
            const double theta_i = deg_to_rad(static_cast<double>(deg));
            const double p = born_probability(
                rho, joint_linear_projector(scan.theta_s, theta_i));
            scan.points.push_back(FringePoint{theta_i, p, 1.0});
        }
        vis[b] = fit_fringe(scan).visibility;
    }
    return vis;
}

TomographyData exact_tomography_data(const DensityMatrix& rho, double scale) {
    std::vector<CountRecord> records;
    for (const TomographySetting& s : tomography_settings()) {
        CountRecord r;
        r.setting_label = s.name();
        r.raw_coincidences = std::llround(scale * born_probability(rho, s.projector));
        r.acquisition_time = 1.0;
        records.push_back(std::move(r));
    }
    return TomographyData(std::move(records));
}

DensityMatrix scenario_source_state(const std::string& name) {
    const Scenario scenario = parse_scenario_text(builtin_scenarios().at(name));
    return sagnac_output(build_pump_profile(scenario), build_distortion_map(scenario));
}

ReproduceResult reproduce_modes() {
    ReproduceResult result;
    const double capacity = fiber_mode_count(FiberSpec(200.0, 0.39, 810.0));
    const double pump_capacity = fiber_mode_count(FiberSpec(50.0, 0.22, 405.0));
    result.rows.push_back(greater_row("collection fiber modes (200um/0.39 @ 810nm)",
                                      capacity, kRef.mode_count_claim));
    result.rows.push_back(greater_row("capacity over the ~1500 SPDC modes", capacity,
                                      kRef.spdc_mode_estimate));
    result.rows.push_back(abs_row("pump fiber modes (50um/0.22 @ 405nm)",
                                  pump_capacity, 3640.4, 1.0));
    return result;
}

ReproduceResult reproduce_accidentals() {
    ReproduceResult result;
    const double laser = accidental_rate(kRef.singles_laser, kRef.singles_laser, kRef.tau);
    const double led_per_min =
        accidental_rate(kRef.singles_led, kRef.singles_led, kRef.tau) * 60.0;
    result.rows.push_back(
        rel_row("laser accidentals (s^-1)", laser, kRef.accidental_laser, 0.10));
    result.rows.push_back(rel_row("LED accidentals (min^-1)", led_per_min,
                                  kRef.accidental_led_per_min, 0.10));
    CountRecord max_setting;
    max_setting.raw_coincidences = std::llround(kRef.max_rate_laser * 10.0);
    max_setting.acquisition_time = 10.0;
    max_setting.singles_signal = kRef.singles_laser;
    max_setting.singles_idler = kRef.singles_laser;
    result.rows.push_back(abs_row("corrected laser peak rate (s^-1)",
                                  correct_counts(max_setting, kRef.tau),
                                  kRef.max_rate_laser - laser, 0.01));
    return result;
}

ReproduceResult reproduce_fig4() {
    ReproduceResult result;
    const DensityMatrix path1 =
        x_state(XStateSpec(kRef.c_path1, kRef.phase_path1_over_pi * kPi));
    const DensityMatrix path2 =
        x_state(XStateSpec(kRef.c_path2, kRef.phase_path2_over_pi * kPi));
    result.rows.push_back(
        abs_row("path-1 concurrence", concurrence(path1), kRef.c_path1, 1e-6));
    result.rows.push_back(abs_row("path-1 phase / pi", infer_phase(path1) / kPi,
                                  kRef.phase_path1_over_pi, 1e-9));
    result.rows.push_back(
        abs_row("path-2 concurrence", concurrence(path2), kRef.c_path2, 1e-6));
    result.rows.push_back(abs_row("path-2 phase / pi", infer_phase(path2) / kPi,
                                  kRef.phase_path2_over_pi, 1e-9));
    const DensityMatrix mixture = mix({{0.5, path1}, {0.5, path2}});
    const double c_mix = concurrence(mixture);
    result.rows.push_back(abs_row("equal-mixture concurrence", c_mix,
                                  kRef.c_mixture, 0.02));
    result.rows.push_back(ReproduceRow{
        "mixture below both components", fmt(c_mix, 6),
        "< " + fmt(std::min(kRef.c_path1, kRef.c_path2), 4), "strict ordering",
        c_mix < std::min(kRef.c_path1, kRef.c_path2)});
    result.files["fig4_mixture.json"] = density_matrix_to_json(mixture) + "\n";
    return result;
}

ReproduceResult reproduce_fig3() {
    ReproduceResult result;
    struct Case {
        const char* name;
        double c, phase_over_pi, fidelity;
    };
    const std::array<Case, 2> cases{{
        {"LED", kRef.c_led, kRef.phase_led_over_pi, kRef.fidelity_led},
        {"laser", kRef.c_laser, kRef.phase_laser_over_pi, kRef.fidelity_laser},
    }};
    for (const Case& c : cases) {
        const DensityMatrix model = x_state(XStateSpec(c.c, c.phase_over_pi * kPi));
        const MleResult mle = tomography_mle(exact_tomography_data(model, 1e12));
        const std::string prefix = std::string(c.name) + " ";
        result.rows.push_back(
            abs_row(prefix + "concurrence", concurrence(mle.rho), c.c, 5e-3));
        result.rows.push_back(abs_row(prefix + "phase / pi",
                                      infer_phase(mle.rho) / kPi, c.phase_over_pi,
                                      5e-3));
        // Model gap: the X-state family carries no HH/VV population, which
        // nudges the fidelity a little above the measured value.
        result.rows.push_back(abs_row(prefix + "fidelity to the target state",
                                      fidelity_to_pure(mle.rho, BellPhaseSpec(kPi)),
                                      c.fidelity, 0.02));
        result.rows.push_back(ReproduceRow{
            prefix + "reconstruction physical", validate_physical(mle.rho).pass() ? "yes" : "no",
            "yes", "validate_physical", validate_physical(mle.rho).pass()});
        result.files[std::string("fig3_") + c.name + "_mle.json"] =
            density_matrix_to_json(mle.rho) + "\n";
    }
    return result;
}

ReproduceResult reproduce_fig2() {
    ReproduceResult result;
    const std::array<const char*, 4> basis_names{"H", "V", "A", "D"};

    const DensityMatrix rho_led = scenario_source_state("led");
    const DensityMatrix rho_laser = scenario_source_state("laser");
    const auto vis_led = noiseless_visibilities(rho_led);
    const auto vis_laser = noiseless_visibilities(rho_laser);
    for (std::size_t b = 0; b < 4; ++b) {
        // Model gap 0.06: the simulated analyzers are ideal, so H/V
        // visibilities sit at 1 while the measured ones include polarizer
        // imperfections.
        result.rows.push_back(abs_row(std::string("LED visibility ") + basis_names[b],
                                      vis_led[b], kRef.vis_led[b], 0.06));
    }
    for (std::size_t b = 0; b < 4; ++b) {
        result.rows.push_back(abs_row(std::string("laser visibility ") + basis_names[b],
                                      vis_laser[b], kRef.vis_laser[b], 0.06));
    }

    // S from states calibrated to the measured visibilities.
    const DensityMatrix led_cal = calibrated_x_state(0.97, 0.81, kPi);
    const DensityMatrix laser_cal = calibrated_x_state(0.97, 0.94, kPi);
    result.rows.push_back(range_row("LED S (visibility-calibrated, optimized)",
                                    chsh_optimize(led_cal).s_value, kRef.s_led, 2.45,
                                    2.60));
    result.rows.push_back(range_row("laser S (visibility-calibrated, optimized)",
                                    chsh_optimize(laser_cal).s_value, kRef.s_laser,
                                    2.62, 2.75));

    std::ostringstream csv;
    csv << "pump,basis,visibility_model,visibility_reference\n";
    for (std::size_t b = 0; b < 4; ++b) {
        csv << "led," << basis_names[b] << ',' << fmt(vis_led[b], 6) << ','
            << fmt(kRef.vis_led[b], 6) << '\n';
    }
    for (std::size_t b = 0; b < 4; ++b) {
        csv << "laser," << basis_names[b] << ',' << fmt(vis_laser[b], 6) << ','
            << fmt(kRef.vis_laser[b], 6) << '\n';
    }
    result.files["fig2_visibilities.csv"] = csv.str();
    return result;
}

}  // namespace

ReproduceTarget reproduce_target_from_string(const std::string& name) {
    if (name == "fig2") return ReproduceTarget::fig2;
    if (name == "fig3") return ReproduceTarget::fig3;
    if (name == "fig4") return ReproduceTarget::fig4;
    if (name == "modes") return ReproduceTarget::modes;
    if (name == "accidentals") return ReproduceTarget::accidentals;
    throw std::invalid_argument(
        "unknown reproduce target '" + name + "' (expected fig2|fig3|fig4|modes|accidentals)");
}

ReproduceResult reproduce(ReproduceTarget target) {
    ReproduceResult result;
    switch (target) {
        case ReproduceTarget::fig2: result = reproduce_fig2(); break;
        case ReproduceTarget::fig3: result = reproduce_fig3(); break;
        case ReproduceTarget::fig4: result = reproduce_fig4(); break;
        case ReproduceTarget::modes: result = reproduce_modes(); break;
        case ReproduceTarget::accidentals: result = reproduce_accidentals(); break;
    }
    result.all_pass = true;
    for (const ReproduceRow& row : result.rows) {
        result.all_pass = result.all_pass && row.pass;
    }
    std::ostringstream csv;
    csv << "quantity,computed,reference,criterion,pass\n";
    for (const ReproduceRow& row : result.rows) {
        csv << '"' << row.quantity << "\"," << row.computed << ",\"" << row.reference
            << "\",\"" << row.criterion << "\"," << (row.pass ? "pass" : "FAIL")
            << '\n';
    }
    result.files["reproduce_table.csv"] = csv.str();
    return result;
}

std::string format_reproduce_table(const ReproduceResult& result) {
    std::size_t widths[4] = {8, 8, 9, 9};
    for (const ReproduceRow& row : result.rows) {
        widths[0] = std::max(widths[0], row.quantity.size());
        widths[1] = std::max(widths[1], row.computed.size());
        widths[2] = std::max(widths[2], row.reference.size());
        widths[3] = std::max(widths[3], row.criterion.size());
    }
    std::ostringstream out;
    const auto pad = [](const std::string& s, std::size_t w) {
        return s + std::string(w - s.size(), ' ');
    };
    out << pad("quantity", widths[0]) << "  " << pad("computed", widths[1]) << "  "
        << pad("reference", widths[2]) << "  " << pad("criterion", widths[3])
        << "  result\n";
    for (const ReproduceRow& row : result.rows) {
        out << pad(row.quantity, widths[0]) << "  " << pad(row.computed, widths[1])
            << "  " << pad(row.reference, widths[2]) << "  "
            << pad(row.criterion, widths[3]) << "  " << (row.pass ? "pass" : "FAIL")
            << '\n';
    }
    out << (result.all_pass ? "all rows pass\n" : "some rows FAILED\n");
    return out.str();
}

const std::map<std::string, std::string>& builtin_scenarios() {
    static const std::map<std::string, std::string> presets = {
        {"led", R"(# LED-pumped run: a broad, spatially incoherent pump crosses the dPBS
# phase ramp, so the collected state is a mixture over the two-photon phase.
# Counting statistics follow the measured LED budget (~100 coincidences per
# minute at the fringe maximum, singles ~220 s^-1, 1 ns window, 5 minutes
# per setting).
#
# Units: angles deg, rates s^-1, times s, positions mm.

pump.kind = led
pump.diameter_mm = 1.0
pump.n_samples = 41

distortion.preset = ramp
distortion.phi_center_over_pi = -0.941
distortion.slope_rad_per_mm = 1.72
distortion.half_span_mm = 0.75
distortion.concurrence = 0.952

rates.pair_rate = 1.6666666666666667
rates.singles_signal = 220
rates.singles_idler = 220
rates.window_tau = 1e-9

acquisition.time_per_setting_s = 300
acquisition.n_repeats = 1

analysis.chsh = canonical
analysis.tomography = true
analysis.bootstrap_n = 200
analysis.seed = 20250405
analysis.fringe_step_deg = 15
)"},
        {"laser", R"(# Laser-pumped run: a narrow coherent pump probes a single point of the
# dPBS phase ramp. Counting statistics follow the measured laser budget
# (~11300 coincidences per second at the fringe maximum, singles
# ~155000 s^-1, 1 ns window, 10 s per setting).
#
# Units: angles deg, rates s^-1, times s, positions mm.

pump.kind = laser
pump.diameter_mm = 0.1
pump.center_mm = 0.0

distortion.preset = ramp
distortion.phi_center_over_pi = -0.941
distortion.slope_rad_per_mm = 1.72
distortion.half_span_mm = 0.75
distortion.concurrence = 0.952

rates.pair_rate = 11300
rates.singles_signal = 155000
rates.singles_idler = 155000
rates.window_tau = 1e-9

acquisition.time_per_setting_s = 10
acquisition.n_repeats = 1

analysis.chsh = canonical
analysis.tomography = true
analysis.bootstrap_n = 200
analysis.seed = 20250406
analysis.fringe_step_deg = 15
)"},
        {"fig4_paths", R"(# Two-path distortion probe: an equally weighted two-sample profile 1 mm
# apart, each path producing its own (concurrence, phase) pair; the detected
# state is their equal mixture. The ramp endpoints reproduce
# (C, phi) = (0.933, 0.5558 pi) at -0.5 mm and (0.916, 0.3220 pi) at +0.5 mm.
# Laser-scale counting statistics.
#
# Units: angles deg, rates s^-1, times s, positions mm.

pump.kind = led
pump.diameter_mm = 1.0
pump.n_samples = 2

distortion.preset = ramp
distortion.phi_center_over_pi = 0.4389
distortion.slope_rad_per_mm = -0.7345043657
distortion.half_span_mm = 0.75
distortion.concurrence = 0.9245
distortion.concurrence_slope_per_mm = -0.017

rates.pair_rate = 11300
rates.singles_signal = 155000
rates.singles_idler = 155000
rates.window_tau = 1e-9

acquisition.time_per_setting_s = 10
acquisition.n_repeats = 1

analysis.chsh = optimize
analysis.tomography = true
analysis.bootstrap_n = 200
analysis.seed = 20250407
analysis.fringe_step_deg = 15
)"},
    };
    return presets;
}

}  // namespace sagnacsim
