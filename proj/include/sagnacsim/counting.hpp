// counting.hpp
// From Born probabilities to detected coincidences: rate prediction against a
// measured-rate budget, accidental coincidences 2*Ss*Si*tau, seeded Poisson
// sampling, and accidental subtraction.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sagnacsim/polarimetry.hpp"

namespace sagnacsim {

// pair_rate is the coincidence rate at the fringe maximum (the probability
// 1/2 setting), matching how maximum coincidence rates are quoted.
struct RateBudget {
    double pair_rate;        // s^-1 at the optimal projection
    double singles_signal;   // s^-1
    double singles_idler;    // s^-1
    double window_tau;       // s

    RateBudget(double pair_rate_in, double singles_signal_in,
               double singles_idler_in, double window_tau_in);
};

struct CountRecord {
    std::string setting_label;        // e.g. "DR" for tomography, "H" for a fringe scan
    std::optional<double> theta_s;    // radians, linear settings only
    std::optional<double> theta_i;
    std::int64_t raw_coincidences = 0;
    double acquisition_time = 1.0;    // s
    double singles_signal = 0.0;      // s^-1
    double singles_idler = 0.0;       // s^-1
};

// 2 * Ss * Si * tau.
double accidental_rate(double singles_signal, double singles_idler, double tau);

// 2 * pair_rate * born_probability + accidentals. The factor 2 normalizes the
// probability-1/2 fringe maximum to pair_rate.
double predict_rate(const DensityMatrix& rho, const TwoQubitProjector& proj,
                    const RateBudget& budget);

// One Poisson(rate * time) draw, deterministic in seed (own sampler, not the
// standard library's, so sequences are stable across platforms).
std::int64_t sample_counts(double rate, double time, std::uint64_t seed);

// Raw rate minus the accidental estimate, clamped at zero.
double correct_counts(const CountRecord& record, double tau);

// Child-seed derivation for parallel/sequenced sampling: splitmix64 applied
// to root + index * golden-gamma. Documented so shards stay reproducible.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);

// CSV: setting_label,theta_s_deg,theta_i_deg,raw_counts,time_s,singles_s,singles_i
std::string count_records_to_csv(const std::vector<CountRecord>& records);
std::vector<CountRecord> count_records_from_csv(const std::string& text);
std::vector<CountRecord> count_records_from_csv_file(const std::string& path);

}  // namespace sagnacsim
