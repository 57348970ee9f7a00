#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sagnacsim/io.hpp"
#include "sagnacsim/scenario.hpp"
#include "test_support.hpp"

using namespace sagnacsim;
namespace st = sagnacsim::testing;
namespace fs = std::filesystem;

namespace {

const std::string kSourceDir = SAGNACSIM_SOURCE_DIR;
const std::string kCliPath = SAGNACSIM_CLI_PATH;

std::string strip_timestamp_lines(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find("\"timestamp\"") == std::string::npos) {
            out << line << '\n';
        }
    }
    return out.str();
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("sagnacsim_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = kCliPath + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

// Preset with the statistics shrunk so scenario-level tests stay fast.
std::string quick_scenario_text() {
    std::string text = builtin_scenarios().at("led");
    const auto replace = [&](const std::string& from, const std::string& to) {
        const auto pos = text.find(from);
        REQUIRE(pos != std::string::npos);
        text.replace(pos, from.size(), to);
    };
    replace("analysis.bootstrap_n = 200", "analysis.bootstrap_n = 8");
    replace("pump.n_samples = 41", "pump.n_samples = 11");
    return text;
}

}  // namespace

TEST_CASE("scenario parsing rejects bad configs with field diagnostics") {
    CHECK_NOTHROW(parse_scenario_text(builtin_scenarios().at("led")));

    // Negative coincidence window names the offending field.
    std::string bad_tau = builtin_scenarios().at("led");
    bad_tau.replace(bad_tau.find("rates.window_tau = 1e-9"),
                    std::string("rates.window_tau = 1e-9").size(),
                    "rates.window_tau = -1e-9");
    try {
        parse_scenario_text(bad_tau);
        FAIL("expected config_error");
    } catch (const config_error& e) {
        CHECK(e.field == "rates.window_tau");
        CHECK(std::string(e.what()).find("rates.window_tau") != std::string::npos);
        CHECK(e.line > 0);
    }

    CHECK_THROWS_AS(parse_scenario_text("pump.kind = led\n"), config_error);
    CHECK_THROWS_AS(parse_scenario_text(builtin_scenarios().at("led") + "bogus.key = 1\n"),
                    config_error);
    CHECK_THROWS_AS(parse_scenario_text(builtin_scenarios().at("led") + "pump.kind = maser\n"),
                    config_error);  // duplicate key

    std::string bad_kind = builtin_scenarios().at("led");
    bad_kind.replace(bad_kind.find("pump.kind = led"),
                     std::string("pump.kind = led").size(), "pump.kind = maser");
    CHECK_THROWS_AS(parse_scenario_text(bad_kind), config_error);

    std::string missing_file = builtin_scenarios().at("led");
    missing_file += "distortion.file = does_not_exist.csv\n";
    missing_file.replace(missing_file.find("distortion.preset = ramp"),
                         std::string("distortion.preset = ramp").size(),
                         "# preset removed");
    CHECK_THROWS_AS(parse_scenario_text(missing_file), config_error);
}

TEST_CASE("bundled scenario files match the builtin presets") {
    for (const auto& [name, text] : builtin_scenarios()) {
        const std::string path = kSourceDir + "/scenarios/" + name + ".scenario";
        CHECK(read_text_file(path) == text);
    }
}

TEST_CASE("tomography settings golden file is current") {
    CHECK(read_text_file(kSourceDir + "/data/tomography_settings.csv") ==
          tomography_settings_csv());
}

TEST_CASE("file-based distortion maps feed the source model") {
    const std::string csv_path = kSourceDir + "/data/dpbs_ramp.csv";
    const DistortionMap from_file = DistortionMap::from_csv_file(csv_path);

    const Scenario led = parse_scenario_text(builtin_scenarios().at("led"));
    const DistortionMap from_preset = build_distortion_map(led);
    for (double x : {-0.5, -0.1, 0.0, 0.3, 0.5}) {
        CHECK(from_file.at(x).phi == doctest::Approx(from_preset.at(x).phi).epsilon(1e-12));
        CHECK(from_file.at(x).concurrence ==
              doctest::Approx(from_preset.at(x).concurrence).epsilon(1e-12));
    }

    // Scenario wiring: distortion.file relative to the base directory.
    std::string text = quick_scenario_text();
    text.replace(text.find("distortion.preset = ramp"),
                 std::string("distortion.preset = ramp").size(),
                 "distortion.file = data/dpbs_ramp.csv");
    const Scenario scenario = parse_scenario_text(text, kSourceDir);
    const DensityMatrix rho =
        sagnac_output(build_pump_profile(scenario), build_distortion_map(scenario));
    CHECK(validate_physical(rho).pass());
}

TEST_CASE("identical config and seed give byte-identical reports") {
    const std::string text = quick_scenario_text();
    const ScenarioResult a = run_scenario(parse_scenario_text(text));
    const ScenarioResult b = run_scenario(parse_scenario_text(text));
    CHECK(strip_timestamp_lines(a.report_json) == strip_timestamp_lines(b.report_json));
    REQUIRE(a.files.size() == b.files.size());
    for (const auto& [name, content] : a.files) {
        if (name == "report.json") {
            continue;
        }
        CHECK(content == b.files.at(name));
    }

    // A different seed must change the simulated data.
    std::string reseeded = text;
    reseeded.replace(reseeded.find("analysis.seed = 20250405"),
                     std::string("analysis.seed = 20250405").size(),
                     "analysis.seed = 999");
    const ScenarioResult c = run_scenario(parse_scenario_text(reseeded));
    CHECK(strip_timestamp_lines(a.report_json) != strip_timestamp_lines(c.report_json));
}

TEST_CASE("scenario reports are schema-stable and files parse back") {
    const ScenarioResult result = run_scenario(parse_scenario_text(quick_scenario_text()));
    // Every emitted CSV/JSON must parse under its documented schema.
    for (const auto& [name, content] : result.files) {
        if (name.rfind("fringe_fit_", 0) == 0) {
            CHECK(content.rfind("theta_i_deg,fitted_rate\n", 0) == 0);
        } else if (name.rfind("fringe_", 0) == 0 || name == "chsh_counts.csv" ||
                   name == "tomography_counts.csv") {
            CHECK_NOTHROW(count_records_from_csv(content));
        } else if (name == "density_matrix_mle.json") {
            const DensityMatrix rho = density_matrix_from_json(content);
            CHECK(validate_physical(rho).pass());
        }
    }
    for (const char* key :
         {"\"visibilities\"", "\"S\"", "\"S_std\"", "\"concurrence\"",
          "\"concurrence_std\"", "\"phase_over_pi\"", "\"fidelity\"", "\"settings\"",
          "\"provenance\"", "\"config_hash\"", "\"n_resamples\"", "\"seed\""}) {
        CHECK(result.report_json.find(key) != std::string::npos);
    }
}

TEST_CASE("as-published and optimize CHSH modes are wired through") {
    std::string literal = quick_scenario_text();
    literal.replace(literal.find("analysis.chsh = canonical"),
                    std::string("analysis.chsh = canonical").size(),
                    "analysis.chsh = as-published");
    const ScenarioResult a = run_scenario(parse_scenario_text(literal));
    CHECK(a.report_json.find("\"mode\": \"as-published\"") != std::string::npos);
    // The literally printed labels cancel on singlet-like states.
    CHECK(nlohmann::json::parse(a.report_json)["S"].get<double>() < 0.5);

    std::string optimize = quick_scenario_text();
    optimize.replace(optimize.find("analysis.chsh = canonical"),
                     std::string("analysis.chsh = canonical").size(),
                     "analysis.chsh = optimize");
    const ScenarioResult b = run_scenario(parse_scenario_text(optimize));
    CHECK(b.report_json.find("\"mode\": \"optimize\"") != std::string::npos);
    CHECK(nlohmann::json::parse(b.report_json)["S"].get<double>() > 2.0);
}

TEST_CASE("density matrix JSON round-trips bit for bit") {
    auto gen = st::rng(71);
    for (int trial = 0; trial < 20; ++trial) {
        const DensityMatrix rho = st::random_physical_state(gen);
        const std::string text = density_matrix_to_json(rho);
        const DensityMatrix back = density_matrix_from_json(text);
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                CHECK(back(i, j).real() == rho(i, j).real());
                CHECK(back(i, j).imag() == rho(i, j).imag());
            }
        }
        CHECK(density_matrix_to_json(back) == text);
    }

    CHECK_THROWS_AS(density_matrix_from_json("{\"basis\": [\"XX\"]}"),
                    std::invalid_argument);
    CHECK_THROWS_AS(density_matrix_from_json("not json"), std::invalid_argument);
}

TEST_CASE("cli: mode-count, reproduce, and exit codes") {
    const fs::path dir = fresh_dir("cli");
    const fs::path log = dir / "log.txt";

    CHECK(run_cli("mode-count --diameter-um 200 --na 0.39 --wavelength-nm 810", log) == 0);
    CHECK(read_text_file(log.string()).find("45760") != std::string::npos);

    CHECK(run_cli("reproduce modes --out " + (dir / "modes").string(), log) == 0);
    CHECK(read_text_file(log.string()).find("all rows pass") != std::string::npos);
    CHECK(fs::exists(dir / "modes" / "reproduce_table.csv"));

    CHECK(run_cli("reproduce nonsense", log) == 2);
    CHECK(run_cli("bogus-subcommand", log) == 2);
    CHECK(run_cli("--help", log) == 0);
}

TEST_CASE("cli: run-scenario writes reports and rejects bad configs") {
    const fs::path dir = fresh_dir("cli_run");
    const fs::path log = dir / "log.txt";

    write_text_file((dir / "quick.scenario").string(), quick_scenario_text());
    CHECK(run_cli("run-scenario " + (dir / "quick.scenario").string() + " --out " +
                      (dir / "out").string(),
                  log) == 0);
    CHECK(fs::exists(dir / "out" / "report.json"));
    CHECK(fs::exists(dir / "out" / "fringe_H.csv"));
    CHECK(fs::exists(dir / "out" / "tomography_counts.csv"));

    std::string bad = quick_scenario_text();
    bad.replace(bad.find("rates.window_tau = 1e-9"),
                std::string("rates.window_tau = 1e-9").size(),
                "rates.window_tau = -1e-9");
    write_text_file((dir / "bad.scenario").string(), bad);
    CHECK(run_cli("run-scenario " + (dir / "bad.scenario").string(), log) == 2);
    CHECK(read_text_file(log.string()).find("rates.window_tau") != std::string::npos);

    CHECK(run_cli("run-scenario " + (dir / "missing.scenario").string(), log) == 2);

    // Env-var output directory.
    const std::string env_dir = (dir / "env_out").string();
    const std::string cmd = "SAGNACSIM_OUTDIR=" + env_dir + " " + kCliPath +
                            " run-scenario " + (dir / "quick.scenario").string() +
                            " > " + log.string() + " 2>&1";
    CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    CHECK(fs::exists(fs::path(env_dir) / "report.json"));
}

TEST_CASE("cli: tomography and chsh consume the emitted count files") {
    const fs::path dir = fresh_dir("cli_counts");
    const fs::path log = dir / "log.txt";

    write_text_file((dir / "quick.scenario").string(), quick_scenario_text());
    REQUIRE(run_cli("run-scenario " + (dir / "quick.scenario").string() + " --out " +
                        (dir / "out").string(),
                    log) == 0);

    CHECK(run_cli("tomography " + (dir / "out" / "tomography_counts.csv").string() +
                      " --out " + (dir / "tomo").string(),
                  log) == 0);
    std::string tomo_log = read_text_file(log.string());
    CHECK(tomo_log.find("concurrence =") != std::string::npos);
    CHECK(tomo_log.find("physical = yes") != std::string::npos);
    CHECK(fs::exists(dir / "tomo" / "density_matrix_mle.json"));

    CHECK(run_cli("tomography " + (dir / "out" / "tomography_counts.csv").string() +
                      " --linear --out " + (dir / "tomo").string(),
                  log) == 0);
    CHECK(fs::exists(dir / "tomo" / "density_matrix_linear.json"));

    CHECK(run_cli("tomography --print-settings", log) == 0);
    CHECK(read_text_file(log.string()).rfind("label_s,label_i", 0) == 0);

    CHECK(run_cli("chsh " + (dir / "out" / "chsh_counts.csv").string(), log) == 0);
    std::string chsh_log = read_text_file(log.string());
    double s_canonical = 0.0;
    REQUIRE(std::sscanf(chsh_log.c_str(), "S = %lf", &s_canonical) == 1);

    // The table contains the canonical combination, so the table search must
    // return at least its S.
    CHECK(run_cli("chsh " + (dir / "out" / "chsh_counts.csv").string() + " --optimize",
                  log) == 0);
    double s_optimized = 0.0;
    REQUIRE(std::sscanf(read_text_file(log.string()).c_str(), "S = %lf", &s_optimized) == 1);
    CHECK(s_optimized >= s_canonical - 1e-9);

    // Angles that are not in the table are an input error.
    CHECK(run_cli("chsh " + (dir / "out" / "chsh_counts.csv").string() +
                      " --angles 1,46,23.5,68.5",
                  log) == 2);
}
