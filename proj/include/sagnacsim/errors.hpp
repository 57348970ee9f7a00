// errors.hpp
// Exception types shared across the library. Plain argument errors use
// std::invalid_argument; everything with domain meaning gets its own type so
// callers can react per failure mode.

#pragma once

#include <stdexcept>
#include <string>

namespace sagnacsim {

// A density matrix violates physicality beyond tolerance (negative
// eigenvalue, broken Hermiticity, wrong trace).
class invalid_state_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The coherence element carrying the two-photon phase is numerically zero.
class degenerate_phase_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A fringe scan cannot support the sinusoidal model (rank-deficient fit).
class fit_degenerate_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// N_max and N_min are both zero: visibility is 0/0.
class undefined_visibility_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// All four coincidence rates of a correlator are zero.
class undefined_correlator_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// More than half of the bootstrap resamples failed to analyze.
class bootstrap_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Scenario/config file problem, with a line number and field path for
// diagnostics where known (0 / empty when not applicable).
class config_error : public std::runtime_error {
public:
    config_error(const std::string& message, int line = 0, std::string field = {})
        : std::runtime_error(message), line(line), field(std::move(field)) {}

    int line = 0;
    std::string field;
};

}  // namespace sagnacsim
