// qstate.hpp
// Two-photon polarization states on the fixed basis (HH, HV, VH, VV) and the
// entanglement metrics derived from them: concurrence, fidelity to a
// Bell-phase target, and the phase carried by the |VH><HV| coherence.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <utility>
#include <vector>

#include "sagnacsim/errors.hpp"

namespace sagnacsim {

inline constexpr double kPi = 3.14159265358979323846;

// Basis order used for every 4x4 operator in the library.
enum BasisIndex : int { kHH = 0, kHV = 1, kVH = 2, kVV = 3 };

// Maps an angle to the canonical branch (-pi, pi].
double wrap_phase(double phi);

// Two-photon phase of the pure state (|HV> + e^{i phi}|VH>)/sqrt(2).
struct BellPhaseSpec {
    double phi;

    explicit BellPhaseSpec(double phi_in);
};

// Phase-damped Bell-phase state: diagonal (0, 1/2, 1/2, 0) with coherence
// <HV|rho|VH> = (c/2) e^{-i phi}. Its concurrence equals c by construction.
struct XStateSpec {
    double concurrence_target;
    double phi;

    XStateSpec(double concurrence_target_in, double phi_in);
};

// 4x4 two-photon operator. Construction only requires finite entries and
// Hermiticity within 1e-6; trace and positivity are *not* enforced here so
// that defective matrices (linear-inversion output, broken inputs) can be
// carried and diagnosed via validate_physical(). Operations that need a
// physical state check their own preconditions.
class DensityMatrix {
public:
    explicit DensityMatrix(const Eigen::Matrix4cd& m);

    const Eigen::Matrix4cd& matrix() const { return m_; }
    std::complex<double> operator()(int row, int col) const { return m_(row, col); }

    // Smallest eigenvalue (exact Hermitian solve on the symmetrized matrix).
    double min_eigenvalue() const;

private:
    Eigen::Matrix4cd m_;
};

struct PhysicalityReport {
    double hermiticity_defect;  // max_ij |rho_ij - conj(rho_ji)|
    double trace_defect;        // |tr(rho) - 1|
    double min_eigenvalue;
    bool hermitian_ok;
    bool trace_ok;
    bool psd_ok;

    bool pass() const { return hermitian_ok && trace_ok && psd_ok; }
};

// Tolerances used by validate_physical.
inline constexpr double kHermiticityTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kEigenvalueFloor = -1e-9;

// Amplitudes of (|HV> + e^{i phi}|VH>)/sqrt(2) in the (HH, HV, VH, VV) basis.
Eigen::Vector4cd bell_phase_vector(double phi);

DensityMatrix bell_phase_state(const BellPhaseSpec& spec);

DensityMatrix x_state(const XStateSpec& spec);

// Convex combination. Weights must be nonnegative and sum to one within 1e-9.
DensityMatrix mix(const std::vector<std::pair<double, DensityMatrix>>& components);

// Wootters concurrence. Throws invalid_state_error if rho has an eigenvalue
// below -1e-6.
double concurrence(const DensityMatrix& rho);

// <psi(phi_target)| rho |psi(phi_target)>, clamped to [0, 1].
double fidelity_to_pure(const DensityMatrix& rho, const BellPhaseSpec& target);

// Argument of <VH|rho|HV>, mapped to (-pi, pi]. Throws degenerate_phase_error
// when the element magnitude is below 1e-12.
double infer_phase(const DensityMatrix& rho);

PhysicalityReport validate_physical(const DensityMatrix& rho);

// X-state generalized with equal HH/VV populations so that the ideal H/V
// fringe visibility equals vis_hv while the unbiased-basis (A/D) visibility
// equals vis_ad when phi = pi. Used to calibrate simulated sources against
// measured visibilities.
DensityMatrix calibrated_x_state(double vis_hv, double vis_ad, double phi);

}  // namespace sagnacsim
