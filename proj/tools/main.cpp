// sagnacsim CLI: simulated polarization-entanglement experiments and their
// analysis. Exit codes: 0 ok, 2 configuration/input error, 3 convergence
// failure, 4 reproduction mismatch.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "sagnacsim/io.hpp"
#include "sagnacsim/scenario.hpp"

namespace {

using namespace sagnacsim;

std::string default_outdir(const std::string& flag_value) {
    if (!flag_value.empty()) {
        return flag_value;
    }
    if (const char* env = std::getenv("SAGNACSIM_OUTDIR")) {
        if (*env != '\0') {
            return env;
        }
    }
    return ".";
}

int run_scenario_command(const std::string& path, const std::string& outdir_flag) {
    const Scenario scenario = load_scenario(path);
    const ScenarioResult result = run_scenario(scenario);
    const std::string outdir = default_outdir(outdir_flag);
    write_result_files(result, outdir);
    std::cout << result.report_json;
    std::cerr << "wrote " << result.files.size() << " files to " << outdir << "\n";
    return 0;
}

int reproduce_command(const std::string& target_name, const std::string& outdir_flag) {
    const ReproduceResult result = reproduce(reproduce_target_from_string(target_name));
    std::cout << format_reproduce_table(result);
    const std::string outdir = default_outdir(outdir_flag);
    std::filesystem::create_directories(outdir);
    for (const auto& [name, content] : result.files) {
        write_text_file((std::filesystem::path(outdir) / name).string(), content);
    }
    if (!result.all_pass) {
        std::cerr << "reproduce " << target_name << ": failed rows:\n";
        for (const ReproduceRow& row : result.rows) {
            if (!row.pass) {
                std::cerr << "  " << row.quantity << " = " << row.computed
                          << " (reference " << row.reference << ", " << row.criterion
                          << ")\n";
            }
        }
        return 4;
    }
    return 0;
}

int mode_count_command(double diameter_um, double na, double wavelength_nm) {
    const FiberSpec fiber(diameter_um, na, wavelength_nm);
    const double n = fiber_mode_count(fiber);
    const double v = kPi * diameter_um * 1e3 * na / wavelength_nm;
    std::cout << "V = " << v << "\n";
    std::cout << "modes = " << n << " (step-index V^2/2)\n";
    return 0;
}

std::vector<CountRecord> reorder_tomography_records(std::vector<CountRecord> records) {
    std::map<std::string, CountRecord> by_label;
    for (CountRecord& r : records) {
        if (by_label.count(r.setting_label)) {
            throw std::invalid_argument("duplicate tomography setting " + r.setting_label);
        }
        by_label[r.setting_label] = std::move(r);
    }
    std::vector<CountRecord> ordered;
    for (const TomographySetting& s : tomography_settings()) {
        auto it = by_label.find(s.name());
        if (it == by_label.end()) {
            throw std::invalid_argument("missing tomography setting " + s.name());
        }
        ordered.push_back(std::move(it->second));
    }
    return ordered;
}

int tomography_command(const std::string& csv_path, bool linear_only, double tau,
                       double target_phase_over_pi, const std::string& outdir_flag) {
    const TomographyData data(
        reorder_tomography_records(count_records_from_csv_file(csv_path)));

    DensityMatrix rho = [&] {
        if (linear_only) {
            return tomography_linear(data, tau);
        }
        return tomography_mle(data, tau).rho;
    }();

    const PhysicalityReport physical = validate_physical(rho);
    std::cout << "method = " << (linear_only ? "linear-inversion" : "mle") << "\n";
    std::cout << "hermiticity_defect = " << physical.hermiticity_defect << "\n";
    std::cout << "trace_defect = " << physical.trace_defect << "\n";
    std::cout << "min_eigenvalue = " << physical.min_eigenvalue << "\n";
    std::cout << "physical = " << (physical.pass() ? "yes" : "no") << "\n";
    if (physical.min_eigenvalue >= -1e-6) {
        std::cout << "concurrence = " << concurrence(rho) << "\n";
        try {
            std::cout << "phase_over_pi = " << infer_phase(rho) / kPi << "\n";
        } catch (const degenerate_phase_error&) {
            std::cout << "phase_over_pi = undefined (coherence element is zero)\n";
        }
        std::cout << "fidelity_to_target = "
                  << fidelity_to_pure(rho, BellPhaseSpec(target_phase_over_pi * kPi))
                  << "\n";
    }

    const std::string outdir = default_outdir(outdir_flag);
    std::filesystem::create_directories(outdir);
    const std::string out_path =
        (std::filesystem::path(outdir) /
         (linear_only ? "density_matrix_linear.json" : "density_matrix_mle.json"))
            .string();
    write_text_file(out_path, density_matrix_to_json(rho) + "\n");
    std::cerr << "wrote " << out_path << "\n";
    return 0;
}

// Rates keyed by analyzer angle pairs. Angles are folded to [0, pi) and
// matched against the table's canonical angle lists with a 1e-6 rad
// tolerance (integer-key lookups would break when adding pi/2 to an angle
// that was itself parsed from text).
class RateTable {
public:
    explicit RateTable(const std::vector<CountRecord>& records, double tau) {
        for (const CountRecord& r : records) {
            if (!r.theta_s || !r.theta_i) {
                continue;
            }
            const int is = insert_index(signal_angles_, *r.theta_s);
            const int ii = insert_index(idler_angles_, *r.theta_i);
            rates_[{is, ii}] = correct_counts(r, tau);
        }
        if (rates_.empty()) {
            throw std::invalid_argument("count CSV has no records with analyzer angles");
        }
    }

    double rate(double theta_s, double theta_i) const {
        const int is = find_index(signal_angles_, theta_s);
        const int ii = find_index(idler_angles_, theta_i);
        auto it = (is >= 0 && ii >= 0) ? rates_.find({is, ii}) : rates_.end();
        if (it == rates_.end()) {
            char buf[128];
            std::snprintf(buf, sizeof(buf),
                          "missing record at theta_s = %.4f deg, theta_i = %.4f deg",
                          rad_to_deg(AnalyzerSetting(theta_s).theta),
                          rad_to_deg(AnalyzerSetting(theta_i).theta));
            throw std::invalid_argument(buf);
        }
        return it->second;
    }

    bool has(double theta_s, double theta_i) const {
        const int is = find_index(signal_angles_, theta_s);
        const int ii = find_index(idler_angles_, theta_i);
        return is >= 0 && ii >= 0 && rates_.count({is, ii}) != 0;
    }

    const std::vector<double>& signal_angles() const { return signal_angles_; }
    const std::vector<double>& idler_angles() const { return idler_angles_; }

private:
    // Distance on the pi-periodic analyzer circle.
    static double circular_distance(double a, double b) {
        const double d = std::abs(a - b);
        return std::min(d, kPi - d);
    }

    static int find_index(const std::vector<double>& angles, double theta) {
        const double folded = AnalyzerSetting(theta).theta;
        for (std::size_t k = 0; k < angles.size(); ++k) {
            if (circular_distance(angles[k], folded) < 1e-6) {
                return static_cast<int>(k);
            }
        }
        return -1;
    }

    static int insert_index(std::vector<double>& angles, double theta) {
        const int existing = find_index(angles, theta);
        if (existing >= 0) {
            return existing;
        }
        angles.push_back(AnalyzerSetting(theta).theta);
        return static_cast<int>(angles.size() - 1);
    }

    std::vector<double> signal_angles_;
    std::vector<double> idler_angles_;
    std::map<std::pair<int, int>, double> rates_;
};

double table_S(const RateTable& table, const ChshSettings& settings) {
    const std::array<std::pair<double, double>, 4> pairs{{
        {settings.theta_s, settings.theta_i},
        {settings.theta_s, settings.theta_i_prime},
        {settings.theta_s_prime, settings.theta_i},
        {settings.theta_s_prime, settings.theta_i_prime},
    }};
    const double half_pi = kPi / 2.0;
    std::array<double, 4> e{};
    for (int k = 0; k < 4; ++k) {
        const auto& [ts, ti] = pairs[k];
        e[k] = chsh_E(table.rate(ts, ti), table.rate(ts + half_pi, ti + half_pi),
                      table.rate(ts, ti + half_pi), table.rate(ts + half_pi, ti));
    }
    return chsh_S(settings, e);
}

bool combo_available(const RateTable& table, const ChshSettings& s) {
    const double half_pi = kPi / 2.0;
    for (double ts : {s.theta_s, s.theta_s_prime}) {
        for (double ti : {s.theta_i, s.theta_i_prime}) {
            if (!table.has(ts, ti) || !table.has(ts + half_pi, ti + half_pi) ||
                !table.has(ts, ti + half_pi) || !table.has(ts + half_pi, ti)) {
                return false;
            }
        }
    }
    return true;
}

int chsh_command(const std::string& csv_path, bool optimize, bool as_published,
                 double tau, std::vector<double> angles_deg) {
    const RateTable table(count_records_from_csv_file(csv_path), tau);

    if (optimize) {
        // Search every angle combination present in the table for the largest
        // valid CHSH combination (all sixteen outcomes available).
        const std::vector<double> s_angles = table.signal_angles();
        const std::vector<double> i_angles = table.idler_angles();
        bool found = false;
        ChshSettings best{};
        double best_s = -1.0;
        for (double a : s_angles) {
            for (double ap : s_angles) {
                if (std::abs(a - ap) < 1e-9) continue;
                for (double b : i_angles) {
                    for (double bp : i_angles) {
                        if (std::abs(b - bp) < 1e-9) continue;
                        ChshSettings s{};
                        s.theta_s = a;
                        s.theta_s_prime = ap;
                        s.theta_i = b;
                        s.theta_i_prime = bp;
                        if (!combo_available(table, s)) continue;
                        const double value = table_S(table, s);
                        if (value > best_s) {
                            best_s = value;
                            best = s;
                            found = true;
                        }
                    }
                }
            }
        }
        if (!found) {
            throw std::invalid_argument(
                "no complete CHSH combination (with perpendicular partners) in the table");
        }
        std::cout << "S = " << best_s << " (optimized over the table)\n";
        std::cout << "theta_s = " << rad_to_deg(best.theta_s)
                  << " deg, theta_s' = " << rad_to_deg(best.theta_s_prime)
                  << " deg, theta_i = " << rad_to_deg(best.theta_i)
                  << " deg, theta_i' = " << rad_to_deg(best.theta_i_prime) << " deg\n";
        return 0;
    }

    ChshSettings settings =
        as_published ? published_chsh_settings() : canonical_chsh_settings();
    if (!angles_deg.empty()) {
        if (angles_deg.size() != 4) {
            throw std::invalid_argument("--angles needs theta_s,theta_s',theta_i,theta_i' (deg)");
        }
        settings.theta_s = deg_to_rad(angles_deg[0]);
        settings.theta_s_prime = deg_to_rad(angles_deg[1]);
        settings.theta_i = deg_to_rad(angles_deg[2]);
        settings.theta_i_prime = deg_to_rad(angles_deg[3]);
    }
    const double s_value = table_S(table, settings);
    std::cout << "S = " << s_value << "\n";
    std::cout << "violation (S > 2): " << (s_value > 2.0 ? "yes" : "no") << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulated Sagnac-source entanglement experiments: coincidence "
                 "counting, CHSH tests, tomography, and reference-value reproduction"};
    app.require_subcommand(1);

    std::string scenario_path, outdir, target_name, csv_path;
    double diameter_um = 200.0, na = 0.39, wavelength_nm = 810.0;
    bool linear_only = false, optimize = false, as_published = false;
    bool print_settings = false;
    double tau = 1e-9, target_phase_over_pi = 1.0;
    std::vector<double> angles_deg;

    CLI::App* run = app.add_subcommand("run-scenario", "Run a scenario config end to end");
    run->add_option("config", scenario_path, "Scenario file")->required();
    run->add_option("--out", outdir, "Output directory (default $SAGNACSIM_OUTDIR or .)");

    CLI::App* rep = app.add_subcommand("reproduce", "Compare computed values against the reference experiment");
    rep->add_option("target", target_name, "fig2|fig3|fig4|modes|accidentals")->required();
    rep->add_option("--out", outdir, "Output directory (default $SAGNACSIM_OUTDIR or .)");

    CLI::App* modes = app.add_subcommand("mode-count", "Step-index fiber mode count V^2/2");
    modes->add_option("--diameter-um", diameter_um, "Core diameter (um)")->required();
    modes->add_option("--na", na, "Numerical aperture")->required();
    modes->add_option("--wavelength-nm", wavelength_nm, "Wavelength (nm)")->required();

    CLI::App* tomo = app.add_subcommand("tomography", "Reconstruct a density matrix from a 16-setting count CSV");
    tomo->add_option("counts", csv_path, "Count CSV (16 labeled records)");
    tomo->add_flag("--linear", linear_only, "Linear inversion only (no MLE)");
    tomo->add_option("--tau", tau, "Coincidence window for accidental subtraction (s)");
    tomo->add_option("--target-phase-over-pi", target_phase_over_pi,
                     "Fidelity target phase, units of pi");
    tomo->add_flag("--print-settings", print_settings,
                   "Print the 16-setting table as CSV and exit");
    tomo->add_option("--out", outdir, "Output directory (default $SAGNACSIM_OUTDIR or .)");

    CLI::App* chsh = app.add_subcommand("chsh", "CHSH S from a count CSV with analyzer angles");
    chsh->add_option("counts", csv_path, "Count CSV")->required();
    chsh->add_flag("--optimize", optimize, "Search the table for the largest valid S");
    chsh->add_flag("--as-published", as_published,
                   "Use the literally printed angle labels (S = 0 on the ideal singlet)");
    chsh->add_option("--angles", angles_deg,
                     "theta_s,theta_s',theta_i,theta_i' in degrees")
        ->delimiter(',');
    chsh->add_option("--tau", tau, "Coincidence window for accidental subtraction (s)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(run)) {
            return run_scenario_command(scenario_path, outdir);
        }
        if (app.got_subcommand(rep)) {
            return reproduce_command(target_name, outdir);
        }
        if (app.got_subcommand(modes)) {
            return mode_count_command(diameter_um, na, wavelength_nm);
        }
        if (app.got_subcommand(tomo)) {
            if (print_settings) {
                std::cout << tomography_settings_csv();
                return 0;
            }
            if (csv_path.empty()) {
                std::cerr << "error: tomography needs a count CSV (or --print-settings)\n";
                return 2;
            }
            return tomography_command(csv_path, linear_only, tau, target_phase_over_pi,
                                      outdir);
        }
        if (app.got_subcommand(chsh)) {
            return chsh_command(csv_path, optimize, as_published, tau, angles_deg);
        }
    } catch (const config_error& e) {
        std::cerr << "config error";
        if (e.line > 0) {
            std::cerr << " (line " << e.line << ")";
        }
        if (!e.field.empty()) {
            std::cerr << " [" << e.field << "]";
        }
        std::cerr << ": " << e.what() << "\n";
        return 2;
    } catch (const convergence_error& e) {
        std::cerr << "convergence error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
