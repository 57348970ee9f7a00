// analysis.hpp
// Statistical analysis of coincidence data: sinusoidal fringe fits and
// visibilities, CHSH correlators and the S parameter (measured, predicted,
// and optimized), density-matrix reconstruction by linear inversion and
// Poisson maximum likelihood, and bootstrap uncertainties.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sagnacsim/counting.hpp"
#include "sagnacsim/polarimetry.hpp"
#include "sagnacsim/qstate.hpp"

namespace sagnacsim {

// ---------------------------------------------------------------------------
// Fringes

struct FringePoint {
    double theta_i;          // radians
    double corrected_rate;   // s^-1
    double acquisition_time; // s
};

struct FringeScan {
    PolLabel signal_basis;   // H, V, A or D
    double theta_s;          // radians
    std::vector<FringePoint> points;
};

struct FringeFit {
    double offset;      // A in A + B cos(2(theta - theta0))
    double amplitude;   // B >= 0
    double theta0;      // radians
    double visibility;  // |B|/A clamped to [0, 1]
    double residual_sum_squares;
    // Amplitude below 3x its own standard error; the fit is reported but the
    // visibility should not be trusted.
    bool degenerate_amplitude;
};

// Least-squares fit of rate(theta_i) = A + B cos(2(theta_i - theta0)). The
// angular frequency is fixed at 2 (the physics of a polarizer pair), not
// fitted. Throws fit_degenerate_error when the scan cannot constrain the
// model (fewer than 3 distinct angles / singular normal equations).
FringeFit fit_fringe(const FringeScan& scan);

// (n_max - n_min) / (n_max + n_min).
double visibility_from_extrema(double n_max, double n_min);

// Fixed signal-basis angles used for fringe scans: H 0, D 45, V 90, A 135 deg.
double fringe_basis_angle(PolLabel basis);

// ---------------------------------------------------------------------------
// CHSH

// Which correlator of S = |E1 + E2 + E3 + E4| carries the minus sign.
enum class ChshMinusTerm { s_i, s_iprime, sprime_i, sprime_iprime };

struct ChshSettings {
    double theta_s;
    double theta_s_prime;
    double theta_i;
    double theta_i_prime;
    ChshMinusTerm minus_term = ChshMinusTerm::s_iprime;
    // Analyzer phases (elliptical bases); zero means plain linear analyzers.
    double analyzer_phase_s = 0.0;
    double analyzer_phase_i = 0.0;
};

// a = 0 deg, a' = 45 deg, b = 22.5 deg, b' = 67.5 deg, minus on E(a, b'):
// saturates |S| = 2*sqrt(2) on the singlet.
ChshSettings canonical_chsh_settings();

// The angle labels as printed in the source experiment (b = 67.5 deg,
// b' = 22.5 deg, minus on E(a, b')). Under the standard correlator convention
// this combination evaluates to S = 0 on the ideal singlet; it is provided
// verbatim for comparison, not as a default.
ChshSettings published_chsh_settings();

// E = (N(a,b) + N(a_perp,b_perp) - N(a,b_perp) - N(a_perp,b)) / sum.
double chsh_E(double n_para_para, double n_perp_perp, double n_para_perp,
              double n_perp_para);

// E values ordered (s,i), (s,i'), (s',i), (s',i').
double chsh_S(const ChshSettings& settings, const std::array<double, 4>& e_values);

// Count table: rows follow the E ordering above, columns are the four
// perpendicular outcomes in chsh_E argument order.
using ChshCountTable = std::array<std::array<double, 4>, 4>;
double chsh_S_from_counts(const ChshSettings& settings, const ChshCountTable& counts);

// Noiseless S from exact Born probabilities.
double chsh_predict(const DensityMatrix& rho, const ChshSettings& settings);

struct ChshOptimum {
    ChshSettings settings;
    double s_value;
};

// Grid search (default 0.5 deg) over idler angle pairs and per-arm analyzer
// phases with analytic signal angles, followed by local refinement. The
// returned value is >= chsh_predict at the canonical settings.
ChshOptimum chsh_optimize(const DensityMatrix& rho, double grid_step_deg = 0.5);

// ---------------------------------------------------------------------------
// Tomography

struct TomographyData {
    // Exactly 16 records whose labels match tomography_settings() in order.
    std::vector<CountRecord> records;

    explicit TomographyData(std::vector<CountRecord> records_in);
};

// Linear inversion of normalized rates against the projector Gram matrix.
// Hermitian and trace-one by construction; *not* guaranteed positive. The
// tau overloads subtract accidentals (2*Ss*Si*tau per record) first.
DensityMatrix tomography_linear(const TomographyData& data);
DensityMatrix tomography_linear(const TomographyData& data, double tau);

struct MleOptions {
    int max_iterations = 20000;
    double gradient_tol = 1e-8;
    double step_tol = 1e-12;
};

struct MleResult {
    DensityMatrix rho;
    int iterations = 0;
    double gradient_norm = 0.0;
    double negative_log_likelihood = 0.0;
    bool converged = false;
};

// Carries the best iterate so callers can inspect a non-converged solve.
class convergence_error : public std::runtime_error {
public:
    convergence_error(const std::string& message, MleResult best);

    const MleResult& best() const { return best_; }

private:
    MleResult best_;
};

// Poisson maximum-likelihood reconstruction with rho = T^dagger T / tr(T^dagger T)
// (T triangular), seeded from the linear-inversion estimate projected onto
// the physical set. Always returns a physical state. Tolerances apply to the
// per-count negative log-likelihood.
MleResult tomography_mle(const TomographyData& data, const MleOptions& options = {});
MleResult tomography_mle(const TomographyData& data, double tau,
                         const MleOptions& options = {});

// Projects onto the physical set: clamps negative eigenvalues to zero and
// renormalizes the trace. Used for the MLE seed.
DensityMatrix project_to_physical(const DensityMatrix& rho);

// Per-count Poisson negative log-likelihood of a candidate state against the
// data (the quantity tomography_mle minimizes); for diagnostics and tests.
double tomography_nll(const TomographyData& data, const DensityMatrix& rho,
                      double tau = 0.0);

// ---------------------------------------------------------------------------
// Bootstrap

// Raw-count data for one experiment; whichever parts are present are
// resampled and reanalyzed together.
struct ChshCountData {
    ChshSettings settings;
    // 16 records, row-major in the (setting, outcome) order of ChshCountTable.
    std::vector<CountRecord> records;
};

struct ExperimentCounts {
    std::map<PolLabel, std::vector<CountRecord>> fringe_scans;
    std::optional<ChshCountData> chsh;
    std::optional<std::vector<CountRecord>> tomography;
    double window_tau = 1e-9;   // s, for accidental subtraction
    double target_phase = kPi;  // fidelity target
};

struct ScalarStats {
    double mean = 0.0;
    double stddev = 0.0;
};

struct BootstrapSummary {
    // Keys: vis_H, vis_V, vis_A, vis_D (present when scanned), S, concurrence,
    // phase_over_pi, fidelity.
    std::map<std::string, ScalarStats> scalars;
    int n_resamples = 0;
    int n_failed = 0;
};

// Poisson-resamples every raw count around its observed value, reruns the
// full analysis per resample, and reports mean and sample standard deviation
// for each derived scalar. Deterministic in seed; resamples are analyzed in
// index order. Throws bootstrap_error if more than half the resamples fail.
BootstrapSummary bootstrap(const ExperimentCounts& data, int n_resamples,
                           std::uint64_t seed);

// Single-pass analysis of an ExperimentCounts (the quantity the bootstrap
// distributes). Keys match BootstrapSummary::scalars.
std::map<std::string, double> analyze_experiment(const ExperimentCounts& data);

}  // namespace sagnacsim
