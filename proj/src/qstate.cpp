#include "sagnacsim/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sagnacsim {

namespace {

const std::complex<double> kI(0.0, 1.0);

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) {
        throw std::invalid_argument(std::string(what) + " must be finite");
    }
}

// sigma_y (x) sigma_y, the spin-flip operator of the Wootters construction.
Eigen::Matrix4cd spin_flip() {
    Eigen::Matrix4cd f = Eigen::Matrix4cd::Zero();
    f(0, 3) = -1.0;
    f(1, 2) = 1.0;
    f(2, 1) = 1.0;
    f(3, 0) = -1.0;
    return f;
}

// Square roots amplify eigenvalue noise (sqrt(1e-16) = 1e-8), so true zeros
// of rank-deficient states must be flushed before taking them.
Eigen::Vector4d floored_eigenvalues(const Eigen::Vector4d& evals) {
    Eigen::Vector4d out = evals;
    for (int i = 0; i < 4; ++i) {
        if (out(i) < 1e-12) {
            out(i) = 0.0;
        }
    }
    return out;
}

Eigen::Matrix4cd hermitian_sqrt(const Eigen::Matrix4cd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m);
    const Eigen::Vector4d evals = floored_eigenvalues(es.eigenvalues());
    return es.eigenvectors() * evals.cwiseSqrt().asDiagonal() *
           es.eigenvectors().adjoint();
}

}  // namespace

double wrap_phase(double phi) {
    double w = std::remainder(phi, 2.0 * kPi);
    if (w <= -kPi) {
        w += 2.0 * kPi;
    }
    return w;
}

BellPhaseSpec::BellPhaseSpec(double phi_in) {
    require_finite(phi_in, "phi");
    phi = wrap_phase(phi_in);
}

XStateSpec::XStateSpec(double concurrence_target_in, double phi_in) {
    require_finite(concurrence_target_in, "concurrence_target");
    require_finite(phi_in, "phi");
    if (concurrence_target_in < 0.0 || concurrence_target_in > 1.0) {
        throw std::invalid_argument("concurrence_target must lie in [0, 1]");
    }
    concurrence_target = concurrence_target_in;
    phi = wrap_phase(phi_in);
}

DensityMatrix::DensityMatrix(const Eigen::Matrix4cd& m) : m_(m) {
    if (!m.allFinite()) {
        throw std::invalid_argument("density matrix entries must be finite");
    }
    // Loose gate only: defective-but-diagnosable matrices (wrong trace, small
    // negative eigenvalues) must remain representable for validate_physical
    // and linear-inversion output.
    const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-6) {
        throw std::invalid_argument("density matrix is not Hermitian");
    }
}

double DensityMatrix::min_eigenvalue() const {
    Eigen::Matrix4cd sym = 0.5 * (m_ + m_.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(sym);
    return es.eigenvalues().minCoeff();
}

Eigen::Vector4cd bell_phase_vector(double phi) {
    Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    v(kHV) = inv_sqrt2;
    v(kVH) = std::exp(kI * phi) * inv_sqrt2;
    return v;
}

DensityMatrix bell_phase_state(const BellPhaseSpec& spec) {
    const Eigen::Vector4cd v = bell_phase_vector(spec.phi);
    return DensityMatrix((v * v.adjoint()).eval());
}

DensityMatrix x_state(const XStateSpec& spec) {
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m(kHV, kHV) = 0.5;
    m(kVH, kVH) = 0.5;
    const std::complex<double> coherence =
        0.5 * spec.concurrence_target * std::exp(-kI * spec.phi);
    m(kHV, kVH) = coherence;
    m(kVH, kHV) = std::conj(coherence);
    return DensityMatrix(m);
}

DensityMatrix mix(const std::vector<std::pair<double, DensityMatrix>>& components) {
    if (components.empty()) {
        throw std::invalid_argument("mix requires at least one component");
    }
    double total = 0.0;
    for (const auto& [w, rho] : components) {
        if (!std::isfinite(w) || w < 0.0) {
            throw std::invalid_argument("mixture weights must be nonnegative");
        }
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("mixture weights must sum to one");
    }
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    for (const auto& [w, rho] : components) {
        m += w * rho.matrix();
    }
    return DensityMatrix(m);
}

double concurrence(const DensityMatrix& rho) {
    if (rho.min_eigenvalue() < -1e-6) {
        throw invalid_state_error("concurrence: state has a negative eigenvalue");
    }
    const Eigen::Matrix4cd m = 0.5 * (rho.matrix() + rho.matrix().adjoint());
    const Eigen::Matrix4cd flip = spin_flip();
    const Eigen::Matrix4cd rho_tilde = flip * m.conjugate() * flip;

    // Eigenvalues of rho * rho_tilde equal those of the Hermitian product
    // sqrt(rho) * rho_tilde * sqrt(rho); the latter is numerically safer.
    const Eigen::Matrix4cd root = hermitian_sqrt(m);
    Eigen::Matrix4cd h = root * rho_tilde * root;
    h = 0.5 * (h + h.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h);
    Eigen::Vector4d lam = floored_eigenvalues(es.eigenvalues()).cwiseSqrt();
    std::sort(lam.data(), lam.data() + 4, std::greater<double>());
    return std::max(0.0, lam(0) - lam(1) - lam(2) - lam(3));
}

double fidelity_to_pure(const DensityMatrix& rho, const BellPhaseSpec& target) {
    if (rho.min_eigenvalue() < -1e-6) {
        throw invalid_state_error("fidelity_to_pure: state has a negative eigenvalue");
    }
    const Eigen::Vector4cd v = bell_phase_vector(target.phi);
    const double f = std::real((v.adjoint() * rho.matrix() * v)(0, 0));
    return std::clamp(f, 0.0, 1.0);
}

double infer_phase(const DensityMatrix& rho) {
    const std::complex<double> element = rho(kVH, kHV);
    if (std::abs(element) <= 1e-12) {
        throw degenerate_phase_error(
            "infer_phase: |<VH|rho|HV>| is zero; phase is undefined");
    }
    return wrap_phase(std::arg(element));
}

PhysicalityReport validate_physical(const DensityMatrix& rho) {
    PhysicalityReport report{};
    const Eigen::Matrix4cd& m = rho.matrix();
    report.hermiticity_defect = (m - m.adjoint()).cwiseAbs().maxCoeff();
    report.trace_defect = std::abs(m.trace() - 1.0);
    report.min_eigenvalue = rho.min_eigenvalue();
    report.hermitian_ok = report.hermiticity_defect <= kHermiticityTol;
    report.trace_ok = report.trace_defect <= kTraceTol;
    report.psd_ok = report.min_eigenvalue >= kEigenvalueFloor;
    return report;
}

DensityMatrix calibrated_x_state(double vis_hv, double vis_ad, double phi) {
    require_finite(phi, "phi");
    if (!(vis_hv > 0.0 && vis_hv <= 1.0) || vis_ad < 0.0 || vis_ad > 1.0) {
        throw std::invalid_argument("visibilities must lie in (0, 1] / [0, 1]");
    }
    // Equal HH/VV populations eps give H/V fringe visibility 1 - 4*eps.
    const double eps = (1.0 - vis_hv) / 4.0;
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m(kHH, kHH) = eps;
    m(kVV, kVV) = eps;
    m(kHV, kHV) = 0.5 - eps;
    m(kVH, kVH) = 0.5 - eps;
    const std::complex<double> coherence = 0.5 * vis_ad * std::exp(-kI * wrap_phase(phi));
    if (std::abs(coherence) > m(kHV, kHV).real()) {
        throw std::invalid_argument(
            "calibrated_x_state: vis_ad too large for the requested vis_hv");
    }
    m(kHV, kVH) = coherence;
    m(kVH, kHV) = std::conj(coherence);
    return DensityMatrix(m);
}

}  // namespace sagnacsim
