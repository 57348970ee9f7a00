#include "sagnacsim/counting.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace sagnacsim {

namespace {

double uniform01(std::mt19937_64& rng) {
    // 53-bit mantissa in [0, 1); independent of std::distribution internals.
    return (rng() >> 11) * 0x1.0p-53;
}

// Knuth's multiplication method; cost grows with mu, used only for small mu.
std::int64_t poisson_knuth(double mu, std::mt19937_64& rng) {
    const double limit = std::exp(-mu);
    double prod = 1.0;
    std::int64_t k = -1;
    do {
        prod *= uniform01(rng);
        ++k;
    } while (prod > limit);
    return k;
}

// Hormann's PTRS transformed-rejection sampler, exact for mu >= 10.
std::int64_t poisson_ptrs(double mu, std::mt19937_64& rng) {
    const double log_mu = std::log(mu);
    const double b = 0.931 + 2.53 * std::sqrt(mu);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    while (true) {
        const double u = uniform01(rng) - 0.5;
        const double v = uniform01(rng);
        const double us = 0.5 - std::abs(u);
        const auto k = static_cast<std::int64_t>(
            std::floor((2.0 * a / us + b) * u + mu + 0.43));
        if (us >= 0.07 && v <= v_r) {
            return k;
        }
        if (k < 0 || (us < 0.013 && v > us)) {
            continue;
        }
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            static_cast<double>(k) * log_mu - mu - std::lgamma(static_cast<double>(k) + 1.0)) {
            return k;
        }
    }
}

std::string format_optional_deg(const std::optional<double>& theta) {
    if (!theta) {
        return {};
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", rad_to_deg(*theta));
    return buf;
}

}  // namespace

RateBudget::RateBudget(double pair_rate_in, double singles_signal_in,
                       double singles_idler_in, double window_tau_in)
    : pair_rate(pair_rate_in),
      singles_signal(singles_signal_in),
      singles_idler(singles_idler_in),
      window_tau(window_tau_in) {
    if (!(pair_rate >= 0.0) || !(singles_signal >= 0.0) || !(singles_idler >= 0.0)) {
        throw std::invalid_argument("rates must be nonnegative");
    }
    if (!(window_tau > 0.0)) {
        throw std::invalid_argument("coincidence window must be positive");
    }
}

double accidental_rate(double singles_signal, double singles_idler, double tau) {
    if (!(singles_signal >= 0.0) || !(singles_idler >= 0.0) || !(tau >= 0.0)) {
        throw std::invalid_argument("accidental_rate arguments must be nonnegative");
    }
    return 2.0 * singles_signal * singles_idler * tau;
}

double predict_rate(const DensityMatrix& rho, const TwoQubitProjector& proj,
                    const RateBudget& budget) {
    const double p = born_probability(rho, proj);
    return 2.0 * budget.pair_rate * p +
           accidental_rate(budget.singles_signal, budget.singles_idler,
                           budget.window_tau);
}

std::int64_t sample_counts(double rate, double time, std::uint64_t seed) {
    if (!(rate >= 0.0)) {
        throw std::invalid_argument("rate must be nonnegative");
    }
    if (!(time > 0.0)) {
        throw std::invalid_argument("time must be positive");
    }
    const double mu = rate * time;
    if (mu == 0.0) {
        return 0;
    }
    std::mt19937_64 rng(seed);
    if (mu < 10.0) {
        return poisson_knuth(mu, rng);
    }
    return poisson_ptrs(mu, rng);
}

double correct_counts(const CountRecord& record, double tau) {
    if (!(record.acquisition_time > 0.0)) {
        throw std::invalid_argument("acquisition time must be positive");
    }
    if (record.raw_coincidences < 0) {
        throw std::invalid_argument("raw coincidences must be nonnegative");
    }
    const double raw_rate =
        static_cast<double>(record.raw_coincidences) / record.acquisition_time;
    const double acc =
        accidental_rate(record.singles_signal, record.singles_idler, tau);
    return std::max(0.0, raw_rate - acc);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
    std::uint64_t z = root + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::string count_records_to_csv(const std::vector<CountRecord>& records) {
    std::ostringstream out;
    out << "setting_label,theta_s_deg,theta_i_deg,raw_counts,time_s,singles_s,singles_i\n";
    out.precision(17);
    for (const CountRecord& r : records) {
        out << r.setting_label << ',' << format_optional_deg(r.theta_s) << ','
            << format_optional_deg(r.theta_i) << ',' << r.raw_coincidences << ','
            << r.acquisition_time << ',' << r.singles_signal << ','
            << r.singles_idler << '\n';
    }
    return out.str();
}

std::vector<CountRecord> count_records_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) ||
        line.rfind("setting_label,theta_s_deg,theta_i_deg,raw_counts", 0) != 0) {
        throw std::invalid_argument(
            "count CSV must start with header setting_label,theta_s_deg,theta_i_deg,"
            "raw_counts,time_s,singles_s,singles_i");
    }
    std::vector<CountRecord> records;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::istringstream row(line);
        std::array<std::string, 7> cells;
        std::size_t n = 0;
        std::string cell;
        while (n < cells.size() && std::getline(row, cell, ',')) {
            cells[n++] = cell;
        }
        if (n < 7) {
            throw std::invalid_argument("count CSV: short row at line " +
                                        std::to_string(line_no));
        }
        try {
            CountRecord r;
            r.setting_label = cells[0];
            if (!cells[1].empty()) {
                r.theta_s = deg_to_rad(std::stod(cells[1]));
            }
            if (!cells[2].empty()) {
                r.theta_i = deg_to_rad(std::stod(cells[2]));
            }
            r.raw_coincidences = std::stoll(cells[3]);
            r.acquisition_time = std::stod(cells[4]);
            r.singles_signal = std::stod(cells[5]);
            r.singles_idler = std::stod(cells[6]);
            records.push_back(std::move(r));
        } catch (const std::invalid_argument&) {
            throw std::invalid_argument("count CSV: bad value at line " +
                                        std::to_string(line_no));
        }
    }
    return records;
}

std::vector<CountRecord> count_records_from_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open count CSV file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return count_records_from_csv(buf.str());
}

}  // namespace sagnacsim
