// scenario.hpp
// Batch front-end plumbing: scenario configuration (a commented key = value
// format with dotted keys), the end-to-end simulated experiment behind
// `run-scenario`, and the reference-value reproduction tables behind
// `reproduce`.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sagnacsim/analysis.hpp"
#include "sagnacsim/source.hpp"

namespace sagnacsim {

struct PumpConfig {
    enum class Kind { led, laser };
    Kind kind = Kind::led;
    double diameter_mm = 1.0;
    int n_samples = 41;       // led profiles
    double center_mm = 0.0;   // laser profiles
};

struct DistortionConfig {
    std::string file;         // CSV path (resolved against the scenario file)
    std::string preset;       // "ramp" or "constant" when no file is given
    double phi_center_over_pi = -0.941;
    double slope_rad_per_mm = 1.72;
    double half_span_mm = 0.75;
    double concurrence = 0.952;               // at the ramp center
    double concurrence_slope_per_mm = 0.0;    // linear concurrence variation
};

struct AcquisitionConfig {
    double time_per_setting_s = 300.0;
    int n_repeats = 1;
};

struct AnalysisConfig {
    enum class ChshMode { canonical, as_published, optimize };
    ChshMode chsh_mode = ChshMode::canonical;
    bool tomography = true;
    int bootstrap_n = 200;
    std::uint64_t seed = 1;
    double fringe_step_deg = 15.0;
    double target_phase_over_pi = 1.0;
};

struct Scenario {
    PumpConfig pump;
    DistortionConfig distortion;
    RateBudget rates{1.0, 0.0, 0.0, 1e-9};
    AcquisitionConfig acquisition;
    AnalysisConfig analysis;
    std::string source_text;  // raw config bytes, fingerprinted in reports
    std::string base_dir;     // for resolving relative file references
};

// Throws config_error (with line and field diagnostics) on any problem.
Scenario parse_scenario_text(const std::string& text, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);

// Bundled presets; names: "led", "laser", "fig4_paths". The scenarios/
// directory ships the same text as files.
const std::map<std::string, std::string>& builtin_scenarios();

PumpSpatialProfile build_pump_profile(const Scenario& scenario);
DistortionMap build_distortion_map(const Scenario& scenario);

struct ScenarioResult {
    std::string report_json;
    // File name -> content for everything the run emits (report.json included).
    std::map<std::string, std::string> files;
};

ScenarioResult run_scenario(const Scenario& scenario);
void write_result_files(const ScenarioResult& result, const std::string& outdir);

// ---------------------------------------------------------------------------
// Reproduction tables

enum class ReproduceTarget { fig2, fig3, fig4, modes, accidentals };

ReproduceTarget reproduce_target_from_string(const std::string& name);

struct ReproduceRow {
    std::string quantity;
    std::string computed;
    std::string reference;
    std::string criterion;
    bool pass = false;
};

struct ReproduceResult {
    std::vector<ReproduceRow> rows;
    bool all_pass = true;
    std::map<std::string, std::string> files;  // exported tables
};

ReproduceResult reproduce(ReproduceTarget target);

std::string format_reproduce_table(const ReproduceResult& result);

}  // namespace sagnacsim
