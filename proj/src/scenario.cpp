#include "sagnacsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sagnacsim/io.hpp"

namespace sagnacsim {

using nlohmann::json;

namespace {

struct ConfigEntry {
    std::string value;
    int line = 0;
};

struct ConfigTable {
    std::map<std::string, ConfigEntry> entries;
    std::set<std::string> consumed;

    bool has(const std::string& key) const { return entries.count(key) != 0; }

    const ConfigEntry* find(const std::string& key) {
        auto it = entries.find(key);
        if (it == entries.end()) {
            return nullptr;
        }
        consumed.insert(key);
        return &it->second;
    }

    std::string require_string(const std::string& key) {
        const ConfigEntry* e = find(key);
        if (!e) {
            throw config_error("missing required field " + key, 0, key);
        }
        return e->value;
    }

    double require_double(const std::string& key) {
        const ConfigEntry* e = find(key);
        if (!e) {
            throw config_error("missing required field " + key, 0, key);
        }
        try {
            std::size_t used = 0;
            const double v = std::stod(e->value, &used);
            if (used != e->value.size()) {
                throw std::invalid_argument("trailing characters");
            }
            return v;
        } catch (const std::exception&) {
            throw config_error("field " + key + " is not a number: '" + e->value + "'",
                               e->line, key);
        }
    }

    double get_double(const std::string& key, double fallback) {
        return has(key) ? require_double(key) : fallback;
    }

    long long get_integer(const std::string& key, long long fallback) {
        if (!has(key)) {
            return fallback;
        }
        const ConfigEntry* e = find(key);
        try {
            std::size_t used = 0;
            const long long v = std::stoll(e->value, &used);
            if (used != e->value.size()) {
                throw std::invalid_argument("trailing characters");
            }
            return v;
        } catch (const std::exception&) {
            throw config_error("field " + key + " is not an integer: '" + e->value + "'",
                               e->line, key);
        }
    }

    bool get_bool(const std::string& key, bool fallback) {
        if (!has(key)) {
            return fallback;
        }
        const ConfigEntry* e = find(key);
        if (e->value == "true") return true;
        if (e->value == "false") return false;
        throw config_error("field " + key + " must be true or false", e->line, key);
    }

    int line_of(const std::string& key) const {
        auto it = entries.find(key);
        return it == entries.end() ? 0 : it->second.line;
    }
};

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return {};
    }
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

ConfigTable tokenize(const std::string& text) {
    ConfigTable table;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw config_error("expected key = value", line_no);
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw config_error("expected key = value", line_no);
        }
        if (table.entries.count(key)) {
            throw config_error("duplicate field " + key, line_no, key);
        }
        table.entries[key] = ConfigEntry{value, line_no};
    }
    return table;
}

std::string iso8601_utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

const char* chsh_mode_name(AnalysisConfig::ChshMode mode) {
    switch (mode) {
        case AnalysisConfig::ChshMode::canonical: return "canonical";
        case AnalysisConfig::ChshMode::as_published: return "as-published";
        case AnalysisConfig::ChshMode::optimize: return "optimize";
    }
    return "?";
}

const char* minus_term_name(ChshMinusTerm term) {
    switch (term) {
        case ChshMinusTerm::s_i: return "s_i";
        case ChshMinusTerm::s_iprime: return "s_iprime";
        case ChshMinusTerm::sprime_i: return "sprime_i";
        case ChshMinusTerm::sprime_iprime: return "sprime_iprime";
    }
    return "?";
}

}  // namespace

Scenario parse_scenario_text(const std::string& text, const std::string& base_dir) {
    ConfigTable table = tokenize(text);
    Scenario scenario;
    scenario.source_text = text;
    scenario.base_dir = base_dir;

    // pump
    const std::string kind = table.require_string("pump.kind");
    if (kind == "led") {
        scenario.pump.kind = PumpConfig::Kind::led;
    } else if (kind == "laser") {
        scenario.pump.kind = PumpConfig::Kind::laser;
    } else {
        throw config_error("pump.kind must be led or laser", table.line_of("pump.kind"),
                           "pump.kind");
    }
    scenario.pump.diameter_mm = table.require_double("pump.diameter_mm");
    if (!(scenario.pump.diameter_mm > 0.0)) {
        throw config_error("pump.diameter_mm must be positive",
                           table.line_of("pump.diameter_mm"), "pump.diameter_mm");
    }
    scenario.pump.n_samples =
        static_cast<int>(table.get_integer("pump.n_samples", 41));
    if (scenario.pump.n_samples < 1) {
        throw config_error("pump.n_samples must be at least 1",
                           table.line_of("pump.n_samples"), "pump.n_samples");
    }
    scenario.pump.center_mm = table.get_double("pump.center_mm", 0.0);

    // distortion
    if (table.has("distortion.file")) {
        scenario.distortion.file = table.require_string("distortion.file");
        const std::filesystem::path path =
            std::filesystem::path(base_dir) / scenario.distortion.file;
        if (!std::filesystem::exists(path)) {
            throw config_error("distortion.file does not exist: " + path.string(),
                               table.line_of("distortion.file"), "distortion.file");
        }
    } else {
        scenario.distortion.preset = table.has("distortion.preset")
                                         ? table.require_string("distortion.preset")
                                         : "ramp";
        if (scenario.distortion.preset != "ramp" &&
            scenario.distortion.preset != "constant") {
            throw config_error("distortion.preset must be ramp or constant",
                               table.line_of("distortion.preset"), "distortion.preset");
        }
    }
    scenario.distortion.phi_center_over_pi =
        table.get_double("distortion.phi_center_over_pi", -0.941);
    scenario.distortion.slope_rad_per_mm =
        table.get_double("distortion.slope_rad_per_mm", 1.72);
    scenario.distortion.half_span_mm = table.get_double("distortion.half_span_mm", 0.75);
    if (!(scenario.distortion.half_span_mm > 0.0)) {
        throw config_error("distortion.half_span_mm must be positive",
                           table.line_of("distortion.half_span_mm"),
                           "distortion.half_span_mm");
    }
    scenario.distortion.concurrence = table.get_double("distortion.concurrence", 0.952);
    if (scenario.distortion.concurrence < 0.0 || scenario.distortion.concurrence > 1.0) {
        throw config_error("distortion.concurrence must lie in [0, 1]",
                           table.line_of("distortion.concurrence"),
                           "distortion.concurrence");
    }
    scenario.distortion.concurrence_slope_per_mm =
        table.get_double("distortion.concurrence_slope_per_mm", 0.0);
    {
        const DistortionConfig& d = scenario.distortion;
        const double edge = std::abs(d.concurrence_slope_per_mm) * d.half_span_mm;
        if (d.file.empty() && (d.concurrence - edge < -1e-12 || d.concurrence + edge > 1.0 + 1e-12)) {
            throw config_error("distortion.concurrence_slope_per_mm drives the concurrence outside [0, 1]",
                               table.line_of("distortion.concurrence_slope_per_mm"),
                               "distortion.concurrence_slope_per_mm");
        }
    }

    // rates
    const double pair_rate = table.require_double("rates.pair_rate");
    const double singles_s = table.require_double("rates.singles_signal");
    const double singles_i = table.require_double("rates.singles_idler");
    const double tau = table.require_double("rates.window_tau");
    if (!(pair_rate >= 0.0)) {
        throw config_error("rates.pair_rate must be nonnegative",
                           table.line_of("rates.pair_rate"), "rates.pair_rate");
    }
    if (!(singles_s >= 0.0) || !(singles_i >= 0.0)) {
        throw config_error("rates.singles_signal and rates.singles_idler must be nonnegative",
                           table.line_of("rates.singles_signal"), "rates.singles_signal");
    }
    if (!(tau > 0.0)) {
        throw config_error("rates.window_tau must be positive (seconds)",
                           table.line_of("rates.window_tau"), "rates.window_tau");
    }
    scenario.rates = RateBudget(pair_rate, singles_s, singles_i, tau);

    // acquisition
    scenario.acquisition.time_per_setting_s =
        table.require_double("acquisition.time_per_setting_s");
    if (!(scenario.acquisition.time_per_setting_s > 0.0)) {
        throw config_error("acquisition.time_per_setting_s must be positive",
                           table.line_of("acquisition.time_per_setting_s"),
                           "acquisition.time_per_setting_s");
    }
    scenario.acquisition.n_repeats =
        static_cast<int>(table.get_integer("acquisition.n_repeats", 1));
    if (scenario.acquisition.n_repeats < 1) {
        throw config_error("acquisition.n_repeats must be at least 1",
                           table.line_of("acquisition.n_repeats"),
                           "acquisition.n_repeats");
    }

    // analysis
    const std::string chsh_mode = table.has("analysis.chsh")
                                      ? table.require_string("analysis.chsh")
                                      : "canonical";
    if (chsh_mode == "canonical") {
        scenario.analysis.chsh_mode = AnalysisConfig::ChshMode::canonical;
    } else if (chsh_mode == "as-published") {
        scenario.analysis.chsh_mode = AnalysisConfig::ChshMode::as_published;
    } else if (chsh_mode == "optimize") {
        scenario.analysis.chsh_mode = AnalysisConfig::ChshMode::optimize;
    } else {
        throw config_error("analysis.chsh must be canonical, as-published or optimize",
                           table.line_of("analysis.chsh"), "analysis.chsh");
    }
    scenario.analysis.tomography = table.get_bool("analysis.tomography", true);
    scenario.analysis.bootstrap_n =
        static_cast<int>(table.get_integer("analysis.bootstrap_n", 200));
    if (scenario.analysis.bootstrap_n < 0) {
        throw config_error("analysis.bootstrap_n must be nonnegative",
                           table.line_of("analysis.bootstrap_n"), "analysis.bootstrap_n");
    }
    scenario.analysis.seed =
        static_cast<std::uint64_t>(table.get_integer("analysis.seed", 1));
    scenario.analysis.fringe_step_deg = table.get_double("analysis.fringe_step_deg", 15.0);
    if (!(scenario.analysis.fringe_step_deg > 0.0) ||
        scenario.analysis.fringe_step_deg > 30.0) {
        throw config_error("analysis.fringe_step_deg must lie in (0, 30]",
                           table.line_of("analysis.fringe_step_deg"),
                           "analysis.fringe_step_deg");
    }
    scenario.analysis.target_phase_over_pi =
        table.get_double("analysis.target_phase_over_pi", 1.0);

    for (const auto& [key, entry] : table.entries) {
        if (!table.consumed.count(key)) {
            throw config_error("unknown field " + key, entry.line, key);
        }
    }
    return scenario;
}

Scenario load_scenario(const std::string& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const std::runtime_error& e) {
        throw config_error(e.what());
    }
    const std::string base = std::filesystem::path(path).parent_path().string();
    return parse_scenario_text(text, base.empty() ? "." : base);
}

PumpSpatialProfile build_pump_profile(const Scenario& scenario) {
    if (scenario.pump.kind == PumpConfig::Kind::led) {
        return led_profile(scenario.pump.diameter_mm, scenario.pump.n_samples);
    }
    return laser_profile(scenario.pump.diameter_mm, scenario.pump.center_mm);
}

DistortionMap build_distortion_map(const Scenario& scenario) {
    const DistortionConfig& d = scenario.distortion;
    if (!d.file.empty()) {
        const std::filesystem::path path = std::filesystem::path(scenario.base_dir) / d.file;
        return DistortionMap::from_csv_file(path.string());
    }
    if (d.preset == "constant") {
        return DistortionMap::constant(d.phi_center_over_pi * kPi, d.concurrence);
    }
    const double phi_center = d.phi_center_over_pi * kPi;
    const double h = d.half_span_mm;
    const auto clamp01 = [](double c) { return std::clamp(c, 0.0, 1.0); };
    return DistortionMap({
        DistortionMap::Entry{-h, phi_center - d.slope_rad_per_mm * h,
                             clamp01(d.concurrence - d.concurrence_slope_per_mm * h)},
        DistortionMap::Entry{h, phi_center + d.slope_rad_per_mm * h,
                             clamp01(d.concurrence + d.concurrence_slope_per_mm * h)},
    });
}

namespace {

// Record enumeration order fixes the seed stream: fringe scans (H, V, A, D),
// then CHSH, then tomography.
struct Simulator {
    const Scenario& scenario;
    std::uint64_t next_index = 0;

    CountRecord simulate(const DensityMatrix& rho, const TwoQubitProjector& proj,
                         const std::string& label, std::optional<double> theta_s,
                         std::optional<double> theta_i) {
        const RateBudget& budget = scenario.rates;
        const double rate = predict_rate(rho, proj, budget);
        const double time = scenario.acquisition.time_per_setting_s;
        std::int64_t total = 0;
        for (int r = 0; r < scenario.acquisition.n_repeats; ++r) {
            total += sample_counts(
                rate, time, derive_seed(scenario.analysis.seed, next_index++));
        }
        CountRecord record;
        record.setting_label = label;
        record.theta_s = theta_s;
        record.theta_i = theta_i;
        record.raw_coincidences = total;
        record.acquisition_time = time * scenario.acquisition.n_repeats;
        record.singles_signal = budget.singles_signal;
        record.singles_idler = budget.singles_idler;
        return record;
    }
};

json settings_to_json(const ChshSettings& settings, const std::string& mode) {
    json j;
    j["mode"] = mode;
    j["theta_s_deg"] = rad_to_deg(settings.theta_s);
    j["theta_s_prime_deg"] = rad_to_deg(settings.theta_s_prime);
    j["theta_i_deg"] = rad_to_deg(settings.theta_i);
    j["theta_i_prime_deg"] = rad_to_deg(settings.theta_i_prime);
    j["theta_s_rad"] = settings.theta_s;
    j["theta_s_prime_rad"] = settings.theta_s_prime;
    j["theta_i_rad"] = settings.theta_i;
    j["theta_i_prime_rad"] = settings.theta_i_prime;
    j["minus_term"] = minus_term_name(settings.minus_term);
    j["analyzer_phase_s_rad"] = settings.analyzer_phase_s;
    j["analyzer_phase_i_rad"] = settings.analyzer_phase_i;
    return j;
}

std::string fringe_fit_csv(const FringeFit& fit) {
    std::ostringstream out;
    out << "theta_i_deg,fitted_rate\n";
    out.precision(17);
    for (int deg = 0; deg <= 180; ++deg) {
        const double theta = deg_to_rad(static_cast<double>(deg));
        const double rate =
            fit.offset + fit.amplitude * std::cos(2.0 * (theta - fit.theta0));
        out << deg << ',' << rate << '\n';
    }
    return out.str();
}

}  // namespace

ScenarioResult run_scenario(const Scenario& scenario) {
    const DensityMatrix rho = sagnac_output(build_pump_profile(scenario),
                                            build_distortion_map(scenario));

    ChshSettings settings{};
    switch (scenario.analysis.chsh_mode) {
        case AnalysisConfig::ChshMode::canonical:
            settings = canonical_chsh_settings();
            break;
        case AnalysisConfig::ChshMode::as_published:
            settings = published_chsh_settings();
            break;
        case AnalysisConfig::ChshMode::optimize:
            settings = chsh_optimize(rho).settings;
            break;
    }

    Simulator sim{scenario};
    ExperimentCounts data;
    data.window_tau = scenario.rates.window_tau;
    data.target_phase = scenario.analysis.target_phase_over_pi * kPi;

    // Fringe scans over the idler angle in each fixed signal basis.
    const std::array<PolLabel, 4> bases = {PolLabel::H, PolLabel::V, PolLabel::A,
                                           PolLabel::D};
    for (PolLabel basis : bases) {
        const double theta_s = fringe_basis_angle(basis);
        std::vector<CountRecord> records;
        for (double deg = 0.0; deg <= 180.0 + 1e-9;
             deg += scenario.analysis.fringe_step_deg) {
            const double theta_i = deg_to_rad(deg);
            records.push_back(
                sim.simulate(rho, joint_linear_projector(theta_s, theta_i),
                             std::string{label_char(basis)}, theta_s, theta_i));
        }
        data.fringe_scans[basis] = std::move(records);
    }

    // CHSH: four setting pairs, four perpendicular outcomes each.
    {
        ChshCountData chsh;
        chsh.settings = settings;
        const std::array<std::pair<double, double>, 4> pairs{{
            {settings.theta_s, settings.theta_i},
            {settings.theta_s, settings.theta_i_prime},
            {settings.theta_s_prime, settings.theta_i},
            {settings.theta_s_prime, settings.theta_i_prime},
        }};
        const double half_pi = kPi / 2.0;
        for (const auto& [ts, ti] : pairs) {
            const std::array<std::pair<double, double>, 4> outcomes{{
                {ts, ti},
                {ts + half_pi, ti + half_pi},
                {ts, ti + half_pi},
                {ts + half_pi, ti},
            }};
            for (const auto& [as, ai] : outcomes) {
                const TwoQubitProjector proj = joint_projector(
                    analyzer_projector(as, settings.analyzer_phase_s),
                    analyzer_projector(ai, settings.analyzer_phase_i));
                chsh.records.push_back(sim.simulate(rho, proj, "chsh", as, ai));
            }
        }
        data.chsh = std::move(chsh);
    }

    // Tomography at the canonical 16 settings.
    if (scenario.analysis.tomography) {
        std::vector<CountRecord> records;
        for (const TomographySetting& s : tomography_settings()) {
            records.push_back(
                sim.simulate(rho, s.projector, s.name(), std::nullopt, std::nullopt));
        }
        data.tomography = std::move(records);
    }

    const auto scalars = analyze_experiment(data);

    json report;
    json visibilities;
    for (PolLabel basis : bases) {
        const std::string key = std::string("vis_") + label_char(basis);
        visibilities[std::string{label_char(basis)}] = scalars.at(key);
    }
    report["visibilities"] = visibilities;
    report["S"] = scalars.at("S");
    if (scenario.analysis.tomography) {
        report["concurrence"] = scalars.at("concurrence");
        report["phase_over_pi"] = scalars.at("phase_over_pi");
        report["fidelity"] = scalars.at("fidelity");
    } else {
        report["concurrence"] = nullptr;
        report["phase_over_pi"] = nullptr;
        report["fidelity"] = nullptr;
    }
    report["settings"] = settings_to_json(settings,
                                          chsh_mode_name(scenario.analysis.chsh_mode));

    json stds;
    if (scenario.analysis.bootstrap_n >= 2) {
        const BootstrapSummary summary =
            bootstrap(data, scenario.analysis.bootstrap_n,
                      derive_seed(scenario.analysis.seed, 0xB00F));
        const auto std_of = [&](const std::string& key) -> json {
            auto it = summary.scalars.find(key);
            if (it == summary.scalars.end()) {
                return nullptr;
            }
            return it->second.stddev;
        };
        report["S_std"] = std_of("S");
        report["concurrence_std"] = std_of("concurrence");
        report["phase_over_pi_std"] = std_of("phase_over_pi");
        report["fidelity_std"] = std_of("fidelity");
        json vis_std;
        for (PolLabel basis : bases) {
            vis_std[std::string{label_char(basis)}] =
                std_of(std::string("vis_") + label_char(basis));
        }
        report["visibilities_std"] = vis_std;
        report["bootstrap_failures"] = summary.n_failed;
    } else {
        report["S_std"] = nullptr;
        report["concurrence_std"] = nullptr;
        report["phase_over_pi_std"] = nullptr;
        report["fidelity_std"] = nullptr;
        report["visibilities_std"] = nullptr;
        report["bootstrap_failures"] = 0;
    }

    json provenance;
    provenance["seed"] = scenario.analysis.seed;
    provenance["n_resamples"] = scenario.analysis.bootstrap_n;
    provenance["config_hash"] = fnv1a_hex(scenario.source_text);
    provenance["timestamp"] = iso8601_utc_now();
    report["provenance"] = provenance;

    ScenarioResult result;
    result.report_json = report.dump(2) + "\n";
    result.files["report.json"] = result.report_json;

    for (const auto& [basis, records] : data.fringe_scans) {
        const std::string name = std::string{label_char(basis)};
        result.files["fringe_" + name + ".csv"] = count_records_to_csv(records);
        FringeScan scan{basis, fringe_basis_angle(basis), {}};
        for (const CountRecord& r : records) {
            scan.points.push_back(FringePoint{*r.theta_i,
                                              correct_counts(r, data.window_tau),
                                              r.acquisition_time});
        }
        result.files["fringe_fit_" + name + ".csv"] = fringe_fit_csv(fit_fringe(scan));
    }
    result.files["chsh_counts.csv"] = count_records_to_csv(data.chsh->records);
    if (data.tomography) {
        result.files["tomography_counts.csv"] = count_records_to_csv(*data.tomography);
        const MleResult mle =
            tomography_mle(TomographyData(*data.tomography), data.window_tau);
        result.files["density_matrix_mle.json"] =
            density_matrix_to_json(mle.rho) + "\n";
    }
    return result;
}

void write_result_files(const ScenarioResult& result, const std::string& outdir) {
    std::filesystem::create_directories(outdir);
    for (const auto& [name, content] : result.files) {
        write_text_file((std::filesystem::path(outdir) / name).string(), content);
    }
}

}  // namespace sagnacsim
