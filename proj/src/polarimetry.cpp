#include "sagnacsim/polarimetry.hpp"

#include <cmath>
#include <sstream>

namespace sagnacsim {

namespace {

const std::complex<double> kImag(0.0, 1.0);

Eigen::Matrix2cd rotation(double angle) {
    Eigen::Matrix2cd r;
    r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return r;
}

}  // namespace

AnalyzerSetting::AnalyzerSetting(double theta_in) {
    if (!std::isfinite(theta_in)) {
        throw std::invalid_argument("analyzer angle must be finite");
    }
    double t = std::fmod(theta_in, kPi);
    if (t < 0.0) {
        t += kPi;
    }
    theta = t;
}

char label_char(PolLabel label) {
    switch (label) {
        case PolLabel::H: return 'H';
        case PolLabel::V: return 'V';
        case PolLabel::D: return 'D';
        case PolLabel::A: return 'A';
        case PolLabel::R: return 'R';
        case PolLabel::L: return 'L';
    }
    throw std::invalid_argument("unknown polarization label");
}

PolLabel label_from_char(char c) {
    switch (c) {
        case 'H': return PolLabel::H;
        case 'V': return PolLabel::V;
        case 'D': return PolLabel::D;
        case 'A': return PolLabel::A;
        case 'R': return PolLabel::R;
        case 'L': return PolLabel::L;
        default: break;
    }
    throw std::invalid_argument(std::string("unknown polarization label '") + c + "'");
}

SingleQubitProjector linear_projector(const AnalyzerSetting& theta) {
    return analyzer_projector(theta.theta, 0.0);
}

AnalyzerSetting perpendicular(const AnalyzerSetting& theta) {
    return AnalyzerSetting(theta.theta + kPi / 2.0);
}

Eigen::Matrix2cd waveplate_operator(WaveplateKind kind, double axis_angle) {
    if (!std::isfinite(axis_angle)) {
        throw std::invalid_argument("waveplate axis angle must be finite");
    }
    const double retardance = (kind == WaveplateKind::half) ? kPi : kPi / 2.0;
    Eigen::Matrix2cd core = Eigen::Matrix2cd::Zero();
    core(0, 0) = 1.0;
    core(1, 1) = std::exp(kImag * retardance);
    return rotation(axis_angle) * core * rotation(-axis_angle);
}

SingleQubitProjector projector_from_waveplates(double qwp, double hwp) {
    const Eigen::Matrix2cd u = waveplate_operator(WaveplateKind::half, hwp) *
                               waveplate_operator(WaveplateKind::quarter, qwp);
    const Eigen::Vector2cd h(1.0, 0.0);
    const Eigen::Vector2cd analyzed = u.adjoint() * h;
    return SingleQubitProjector{analyzed * analyzed.adjoint()};
}

SingleQubitProjector analyzer_projector(double theta, double phase) {
    if (!std::isfinite(theta) || !std::isfinite(phase)) {
        throw std::invalid_argument("analyzer parameters must be finite");
    }
    Eigen::Vector2cd v;
    v << std::cos(theta), std::exp(kImag * phase) * std::sin(theta);
    return SingleQubitProjector{v * v.adjoint()};
}

TwoQubitProjector joint_projector(const SingleQubitProjector& signal,
                                  const SingleQubitProjector& idler) {
    Eigen::Matrix4cd p;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            p.block<2, 2>(2 * i, 2 * j) = signal.p(i, j) * idler.p;
        }
    }
    return TwoQubitProjector{p};
}

TwoQubitProjector joint_linear_projector(double theta_s, double theta_i) {
    return joint_projector(linear_projector(AnalyzerSetting(theta_s)),
                           linear_projector(AnalyzerSetting(theta_i)));
}

Eigen::Vector2cd label_state(PolLabel label) {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    Eigen::Vector2cd v;
    switch (label) {
        case PolLabel::H: v << 1.0, 0.0; break;
        case PolLabel::V: v << 0.0, 1.0; break;
        case PolLabel::D: v << inv_sqrt2, inv_sqrt2; break;
        case PolLabel::A: v << inv_sqrt2, -inv_sqrt2; break;
        case PolLabel::R: v << inv_sqrt2, -kImag * inv_sqrt2; break;
        case PolLabel::L: v << inv_sqrt2, kImag * inv_sqrt2; break;
    }
    return v;
}

SingleQubitProjector label_projector(PolLabel label) {
    const Eigen::Vector2cd v = label_state(label);
    return SingleQubitProjector{v * v.adjoint()};
}

WaveplatePair label_waveplates(PolLabel label) {
    // Solutions of projector_from_waveplates(qwp, hwp) == label_projector,
    // one representative per label (degrees: H 0/0, V 0/45, D 45/22.5,
    // A 135/157.5, R 0/22.5, L 0/157.5).
    switch (label) {
        case PolLabel::H: return {0.0, 0.0};
        case PolLabel::V: return {0.0, kPi / 4.0};
        case PolLabel::D: return {kPi / 4.0, kPi / 8.0};
        case PolLabel::A: return {3.0 * kPi / 4.0, 7.0 * kPi / 8.0};
        case PolLabel::R: return {0.0, kPi / 8.0};
        case PolLabel::L: return {0.0, 7.0 * kPi / 8.0};
    }
    throw std::invalid_argument("unknown polarization label");
}

std::string TomographySetting::name() const {
    return std::string{label_char(signal), label_char(idler)};
}

const std::vector<TomographySetting>& tomography_settings() {
    static const std::vector<TomographySetting> table = [] {
        const std::array<PolLabel, 4> basis = {PolLabel::H, PolLabel::V,
                                               PolLabel::D, PolLabel::R};
        std::vector<TomographySetting> settings;
        settings.reserve(16);
        for (PolLabel s : basis) {
            for (PolLabel i : basis) {
                TomographySetting entry{
                    s, i, label_waveplates(s), label_waveplates(i),
                    joint_projector(label_projector(s), label_projector(i))};
                settings.push_back(entry);
            }
        }
        return settings;
    }();
    return table;
}

std::string tomography_settings_csv() {
    std::ostringstream out;
    out << "label_s,label_i,qwp_s_deg,hwp_s_deg,qwp_i_deg,hwp_i_deg\n";
    char buf[128];
    for (const TomographySetting& s : tomography_settings()) {
        std::snprintf(buf, sizeof(buf), "%c,%c,%.1f,%.1f,%.1f,%.1f\n",
                      label_char(s.signal), label_char(s.idler),
                      rad_to_deg(s.wp_signal.qwp), rad_to_deg(s.wp_signal.hwp),
                      rad_to_deg(s.wp_idler.qwp), rad_to_deg(s.wp_idler.hwp));
        out << buf;
    }
    return out.str();
}

double born_probability(const DensityMatrix& rho, const TwoQubitProjector& proj) {
    if (rho.min_eigenvalue() < -1e-6) {
        throw invalid_state_error("born_probability: state has a negative eigenvalue");
    }
    const std::complex<double> tr = (rho.matrix() * proj.p).trace();
    return std::clamp(tr.real(), 0.0, 1.0);
}

}  // namespace sagnacsim
