// polarimetry.hpp
// Polarization projector algebra: analyzer angles, Jones matrices for ideal
// waveplates, the labeled single-qubit bases, the 16-setting tomography table,
// and Born-rule probabilities.
//
// Conventions (fixed here, tested in tests/test_polarimetry.cpp):
//   - |H> = (1, 0), |V> = (0, 1); a linear analyzer at angle theta passes
//     cos(theta)|H> + sin(theta)|V>.
//   - Waveplate with fast axis at angle a: R(a) * diag(1, e^{i G}) * R(-a)
//     with retardance G = pi (half) or pi/2 (quarter).
//   - Circular handedness: |R> = (|H> - i|V>)/sqrt(2), |L> = (|H> + i|V>)/sqrt(2).

#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

#include "sagnacsim/qstate.hpp"

namespace sagnacsim {

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Linear-analyzer angle from horizontal, normalized to [0, pi).
struct AnalyzerSetting {
    double theta;

    explicit AnalyzerSetting(double theta_in);
};

struct SingleQubitProjector {
    Eigen::Matrix2cd p;
};

struct TwoQubitProjector {
    Eigen::Matrix4cd p;
};

enum class WaveplateKind { half, quarter };

enum class PolLabel { H, V, D, A, R, L };

char label_char(PolLabel label);
PolLabel label_from_char(char c);

SingleQubitProjector linear_projector(const AnalyzerSetting& theta);

AnalyzerSetting perpendicular(const AnalyzerSetting& theta);

Eigen::Matrix2cd waveplate_operator(WaveplateKind kind, double axis_angle);

// Projector onto the polarization that a QWP (first) and HWP (second) map to
// |H>, i.e. the state transmitted by the analysis stack QWP -> HWP -> PBS.
SingleQubitProjector projector_from_waveplates(double qwp, double hwp);

// Analyzer passing cos(theta)|H> + e^{i phase} sin(theta)|V>. phase = 0 is a
// plain linear analyzer; nonzero phase models the elliptical bases reachable
// with the QWP in the analysis stack.
SingleQubitProjector analyzer_projector(double theta, double phase = 0.0);

TwoQubitProjector joint_projector(const SingleQubitProjector& signal,
                                  const SingleQubitProjector& idler);
TwoQubitProjector joint_linear_projector(double theta_s, double theta_i);

Eigen::Vector2cd label_state(PolLabel label);
SingleQubitProjector label_projector(PolLabel label);

// Waveplate pair realizing each labeled basis, radians.
struct WaveplatePair {
    double qwp;
    double hwp;
};

WaveplatePair label_waveplates(PolLabel label);

struct TomographySetting {
    PolLabel signal;
    PolLabel idler;
    WaveplatePair wp_signal;
    WaveplatePair wp_idler;
    TwoQubitProjector projector;

    std::string name() const;  // e.g. "DR"
};

// The canonical 16-setting table: {H, V, D, R} x {H, V, D, R} in row-major
// order. Informationally complete (tested via the Gram determinant).
const std::vector<TomographySetting>& tomography_settings();

// CSV export: label_s,label_i,qwp_s_deg,hwp_s_deg,qwp_i_deg,hwp_i_deg
std::string tomography_settings_csv();

// tr(rho * P), real within 1e-12, clamped to [0, 1]. Throws
// invalid_state_error for rho with an eigenvalue below -1e-6.
double born_probability(const DensityMatrix& rho, const TwoQubitProjector& proj);

}  // namespace sagnacsim
