#include "sagnacsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <set>

namespace sagnacsim {

namespace {

// Full 3x3 correlation matrix T_jk = tr(rho sigma_j (x) sigma_k), (x, y, z).
Eigen::Matrix3d correlation_matrix(const DensityMatrix& rho) {
    std::array<Eigen::Matrix2cd, 3> sigma;
    const std::complex<double> i(0.0, 1.0);
    sigma[0] << 0.0, 1.0, 1.0, 0.0;
    sigma[1] << 0.0, -i, i, 0.0;
    sigma[2] << 1.0, 0.0, 0.0, -1.0;
    Eigen::Matrix3d t;
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            Eigen::Matrix4cd op;
            for (int r = 0; r < 2; ++r) {
                for (int c = 0; c < 2; ++c) {
                    op.block<2, 2>(2 * r, 2 * c) = sigma[a](r, c) * sigma[b];
                }
            }
            t(a, b) = ((rho.matrix() * op).trace()).real();
        }
    }
    return t;
}

double predict_E(const DensityMatrix& rho, double theta_s, double theta_i,
                 double phase_s, double phase_i) {
    const auto proj = [&](double ts, double ti) {
        return born_probability(rho, joint_projector(analyzer_projector(ts, phase_s),
                                                     analyzer_projector(ti, phase_i)));
    };
    const double half_pi = kPi / 2.0;
    const double pp = proj(theta_s, theta_i);
    const double qq = proj(theta_s + half_pi, theta_i + half_pi);
    const double pq = proj(theta_s, theta_i + half_pi);
    const double qp = proj(theta_s + half_pi, theta_i);
    const double denom = pp + qq + pq + qp;
    if (!(denom > 0.0)) {
        throw undefined_correlator_error("correlator undefined: all four probabilities vanish");
    }
    return (pp + qq - pq - qp) / denom;
}

std::array<double, 4> signed_weights(ChshMinusTerm minus_term) {
    std::array<double, 4> w{1.0, 1.0, 1.0, 1.0};
    switch (minus_term) {
        case ChshMinusTerm::s_i: w[0] = -1.0; break;
        case ChshMinusTerm::s_iprime: w[1] = -1.0; break;
        case ChshMinusTerm::sprime_i: w[2] = -1.0; break;
        case ChshMinusTerm::sprime_iprime: w[3] = -1.0; break;
    }
    return w;
}

// In-plane arm directions for a given analyzer phase: e1 along z, e2 the
// linear/elliptical axis at that phase.
struct ArmPlane {
    Eigen::Vector3d e1;
    Eigen::Vector3d e2;
};

ArmPlane arm_plane(double phase) {
    return {Eigen::Vector3d(0.0, 0.0, 1.0),
            Eigen::Vector3d(std::cos(phase), std::sin(phase), 0.0)};
}

Eigen::Matrix2d restricted_t(const Eigen::Matrix3d& t, double phase_s,
                             double phase_i) {
    const ArmPlane s = arm_plane(phase_s);
    const ArmPlane i = arm_plane(phase_i);
    Eigen::Matrix2d out;
    out(0, 0) = s.e1.dot(t * i.e1);
    out(0, 1) = s.e1.dot(t * i.e2);
    out(1, 0) = s.e2.dot(t * i.e1);
    out(1, 1) = s.e2.dot(t * i.e2);
    return out;
}

// Analyzer angle whose in-plane direction is (c1 e1 + c2 e2): 2 theta is the
// polar angle measured from e1.
double direction_to_angle(double c1, double c2) {
    double theta = 0.5 * std::atan2(c2, c1);
    theta = std::fmod(theta, kPi);
    if (theta < 0.0) {
        theta += kPi;
    }
    return theta;
}

double golden_section_max(const std::function<double(double)>& f, double lo,
                          double hi, int iterations) {
    const double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - (b - a) * inv_phi;
    double d = a + (b - a) * inv_phi;
    double fc = f(c), fd = f(d);
    for (int k = 0; k < iterations; ++k) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
    }
    return (fc > fd) ? c : d;
}

}  // namespace

// ---------------------------------------------------------------------------
// Fringes

FringeFit fit_fringe(const FringeScan& scan) {
    const std::size_t n = scan.points.size();
    std::set<long long> distinct;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const FringePoint& p : scan.points) {
        if (!std::isfinite(p.theta_i) || !std::isfinite(p.corrected_rate) ||
            p.corrected_rate < 0.0) {
            throw std::invalid_argument("fringe points need finite angles and nonnegative rates");
        }
        distinct.insert(std::llround(p.theta_i * 1e12));
        lo = std::min(lo, p.theta_i);
        hi = std::max(hi, p.theta_i);
    }
    if (distinct.size() < 6 || hi - lo < kPi / 2.0 - 1e-9) {
        throw std::invalid_argument(
            "fringe scan needs >= 6 distinct angles spanning at least half a period");
    }

    // Linear least squares on rate = A + C cos(2t) + D sin(2t).
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd y(n);
    for (std::size_t k = 0; k < n; ++k) {
        x(k, 0) = 1.0;
        x(k, 1) = std::cos(2.0 * scan.points[k].theta_i);
        x(k, 2) = std::sin(2.0 * scan.points[k].theta_i);
        y(k) = scan.points[k].corrected_rate;
    }
    const Eigen::Matrix3d normal = x.transpose() * x;
    Eigen::FullPivLU<Eigen::Matrix3d> lu(normal);
    if (!lu.isInvertible()) {
        throw fit_degenerate_error("fringe fit is rank deficient");
    }
    const Eigen::Vector3d beta = lu.solve(x.transpose() * y);
    const Eigen::VectorXd residual = y - x * beta;
    const double rss = residual.squaredNorm();

    const double offset = beta(0);
    const double amplitude = std::hypot(beta(1), beta(2));
    if (!(offset > 0.0)) {
        throw fit_degenerate_error("fringe fit has a nonpositive mean level");
    }

    // Delta-method standard error of the amplitude from the LSQ covariance.
    double amp_se = 0.0;
    if (n > 3) {
        const double sigma2 = rss / static_cast<double>(n - 3);
        const Eigen::Matrix3d cov = sigma2 * lu.inverse();
        if (amplitude > 0.0) {
            const double c = beta(1) / amplitude;
            const double d = beta(2) / amplitude;
            amp_se = std::sqrt(std::max(
                0.0, c * c * cov(1, 1) + d * d * cov(2, 2) + 2.0 * c * d * cov(1, 2)));
        } else {
            amp_se = std::sqrt(std::max(0.0, 0.5 * (cov(1, 1) + cov(2, 2))));
        }
    }

    FringeFit fit{};
    fit.offset = offset;
    fit.amplitude = amplitude;
    fit.theta0 = direction_to_angle(beta(1), beta(2));
    fit.visibility = std::clamp(amplitude / offset, 0.0, 1.0);
    fit.residual_sum_squares = rss;
    fit.degenerate_amplitude =
        amplitude <= 3.0 * amp_se || amplitude <= 1e-12 * std::max(1.0, offset);
    return fit;
}

double visibility_from_extrema(double n_max, double n_min) {
    if (!(n_min >= 0.0) || n_max < n_min) {
        throw std::invalid_argument("need n_max >= n_min >= 0");
    }
    if (n_max == 0.0) {
        throw undefined_visibility_error("visibility undefined for zero rates");
    }
    return (n_max - n_min) / (n_max + n_min);
}

double fringe_basis_angle(PolLabel basis) {
    switch (basis) {
        case PolLabel::H: return 0.0;
        case PolLabel::D: return kPi / 4.0;
        case PolLabel::V: return kPi / 2.0;
        case PolLabel::A: return 3.0 * kPi / 4.0;
        default:
            throw std::invalid_argument("fringe scans use linear signal bases (H, V, A, D)");
    }
}

// ---------------------------------------------------------------------------
// CHSH

ChshSettings canonical_chsh_settings() {
    ChshSettings s{};
    s.theta_s = 0.0;
    s.theta_s_prime = kPi / 4.0;
    s.theta_i = kPi / 8.0;
    s.theta_i_prime = 3.0 * kPi / 8.0;
    s.minus_term = ChshMinusTerm::s_iprime;
    return s;
}

ChshSettings published_chsh_settings() {
    ChshSettings s{};
    s.theta_s = 0.0;
    s.theta_s_prime = kPi / 4.0;
    s.theta_i = 3.0 * kPi / 8.0;   // 67.5 deg
    s.theta_i_prime = kPi / 8.0;   // 22.5 deg
    s.minus_term = ChshMinusTerm::s_iprime;
    return s;
}

double chsh_E(double n_para_para, double n_perp_perp, double n_para_perp,
              double n_perp_para) {
    for (double n : {n_para_para, n_perp_perp, n_para_perp, n_perp_para}) {
        if (!(n >= 0.0)) {
            throw std::invalid_argument("correlator rates must be nonnegative");
        }
    }
    const double denom = n_para_para + n_perp_perp + n_para_perp + n_perp_para;
    if (!(denom > 0.0)) {
        throw undefined_correlator_error("correlator undefined: all four rates are zero");
    }
    return (n_para_para + n_perp_perp - n_para_perp - n_perp_para) / denom;
}

double chsh_S(const ChshSettings& settings, const std::array<double, 4>& e_values) {
    const auto w = signed_weights(settings.minus_term);
    double s = 0.0;
    for (int k = 0; k < 4; ++k) {
        if (!std::isfinite(e_values[k])) {
            throw std::invalid_argument("correlators must be finite");
        }
        s += w[k] * e_values[k];
    }
    return std::abs(s);
}

double chsh_S_from_counts(const ChshSettings& settings, const ChshCountTable& counts) {
    std::array<double, 4> e{};
    for (int k = 0; k < 4; ++k) {
        e[k] = chsh_E(counts[k][0], counts[k][1], counts[k][2], counts[k][3]);
    }
    return chsh_S(settings, e);
}

double chsh_predict(const DensityMatrix& rho, const ChshSettings& settings) {
    const std::array<std::pair<double, double>, 4> pairs{{
        {settings.theta_s, settings.theta_i},
        {settings.theta_s, settings.theta_i_prime},
        {settings.theta_s_prime, settings.theta_i},
        {settings.theta_s_prime, settings.theta_i_prime},
    }};
    std::array<double, 4> e{};
    for (int k = 0; k < 4; ++k) {
        e[k] = predict_E(rho, pairs[k].first, pairs[k].second,
                         settings.analyzer_phase_s, settings.analyzer_phase_i);
    }
    return chsh_S(settings, e);
}

ChshOptimum chsh_optimize(const DensityMatrix& rho, double grid_step_deg) {
    if (!(grid_step_deg > 0.0)) {
        throw std::invalid_argument("grid step must be positive");
    }
    if (rho.min_eigenvalue() < -1e-6) {
        throw invalid_state_error("chsh_optimize: state has a negative eigenvalue");
    }
    const Eigen::Matrix3d t3 = correlation_matrix(rho);

    // For fixed analyzer phases the best achievable S over the four angles is
    // 2 * ||t||_F of the 2x2 restricted correlation matrix; scan the phases.
    const auto objective = [&](double ps, double pi) {
        return 2.0 * restricted_t(t3, ps, pi).norm();
    };
    const double step = deg_to_rad(grid_step_deg);
    double best_ps = 0.0, best_pi = 0.0, best_val = objective(0.0, 0.0);
    for (double ps = 0.0; ps < kPi; ps += step) {
        for (double pi = 0.0; pi < kPi; pi += step) {
            const double val = objective(ps, pi);
            if (val > best_val) {
                best_val = val;
                best_ps = ps;
                best_pi = pi;
            }
        }
    }
    // Local refinement: alternating golden-section sweeps around the best cell.
    for (int round = 0; round < 3; ++round) {
        best_ps = golden_section_max(
            [&](double p) { return objective(p, best_pi); }, best_ps - step,
            best_ps + step, 60);
        best_pi = golden_section_max(
            [&](double p) { return objective(best_ps, p); }, best_pi - step,
            best_pi + step, 60);
    }

    // Concrete angles at the optimal phases: split the idler pair around e1,
    // then align the signal directions with t * (v1 -+ v2).
    const Eigen::Matrix2d t2 = restricted_t(t3, best_ps, best_pi);
    const Eigen::Vector2d w(1.0, 0.0);
    const Eigen::Vector2d w_perp(0.0, 1.0);
    const double chi = std::atan2((t2 * w_perp).norm(), (t2 * w).norm());
    const Eigen::Vector2d v1 = std::cos(chi) * w + std::sin(chi) * w_perp;
    const Eigen::Vector2d v2 = std::cos(chi) * w - std::sin(chi) * w_perp;
    const Eigen::Vector2d u1 = t2 * (v1 - v2);
    const Eigen::Vector2d u2 = t2 * (v1 + v2);

    ChshSettings settings{};
    settings.minus_term = ChshMinusTerm::s_iprime;
    settings.analyzer_phase_s = best_ps;
    settings.analyzer_phase_i = best_pi;
    settings.theta_i = direction_to_angle(v1(0), v1(1));
    settings.theta_i_prime = direction_to_angle(v2(0), v2(1));
    settings.theta_s = direction_to_angle(u1(0), u1(1));
    settings.theta_s_prime = direction_to_angle(u2(0), u2(1));

    // A 90 deg flip of a signal angle negates its two correlators; scan the
    // four representatives and keep the one realizing the analytic optimum.
    double s_value = -1.0;
    const double base_s = settings.theta_s;
    const double base_sp = settings.theta_s_prime;
    for (int fs = 0; fs < 2; ++fs) {
        for (int fsp = 0; fsp < 2; ++fsp) {
            ChshSettings candidate = settings;
            candidate.theta_s = AnalyzerSetting(base_s + fs * kPi / 2.0).theta;
            candidate.theta_s_prime =
                AnalyzerSetting(base_sp + fsp * kPi / 2.0).theta;
            const double value = chsh_predict(rho, candidate);
            if (value > s_value) {
                settings = candidate;
                s_value = value;
            }
        }
    }

    const ChshSettings canonical = canonical_chsh_settings();
    const double canonical_value = chsh_predict(rho, canonical);
    if (canonical_value > s_value) {
        return ChshOptimum{canonical, canonical_value};
    }
    return ChshOptimum{settings, s_value};
}

// ---------------------------------------------------------------------------
// Bootstrap

std::map<std::string, double> analyze_experiment(const ExperimentCounts& data) {
    std::map<std::string, double> scalars;

    for (const auto& [basis, records] : data.fringe_scans) {
        FringeScan scan{basis, fringe_basis_angle(basis), {}};
        scan.points.reserve(records.size());
        for (const CountRecord& r : records) {
            if (!r.theta_i) {
                throw std::invalid_argument("fringe records need an idler angle");
            }
            scan.points.push_back(FringePoint{
                *r.theta_i, correct_counts(r, data.window_tau), r.acquisition_time});
        }
        scalars[std::string("vis_") + label_char(basis)] = fit_fringe(scan).visibility;
    }

    if (data.chsh) {
        if (data.chsh->records.size() != 16) {
            throw std::invalid_argument("CHSH data needs 16 records (4 settings x 4 outcomes)");
        }
        ChshCountTable table{};
        for (int k = 0; k < 4; ++k) {
            for (int j = 0; j < 4; ++j) {
                table[k][j] =
                    correct_counts(data.chsh->records[4 * k + j], data.window_tau);
            }
        }
        scalars["S"] = chsh_S_from_counts(data.chsh->settings, table);
    }

    if (data.tomography) {
        const TomographyData tomo(*data.tomography);
        const MleResult mle = tomography_mle(tomo, data.window_tau);
        scalars["concurrence"] = concurrence(mle.rho);
        scalars["phase_over_pi"] = infer_phase(mle.rho) / kPi;
        scalars["fidelity"] =
            fidelity_to_pure(mle.rho, BellPhaseSpec(data.target_phase));
    }

    return scalars;
}

namespace {

ExperimentCounts resample(const ExperimentCounts& data, std::uint64_t seed) {
    ExperimentCounts out = data;
    std::uint64_t index = 0;
    const auto redraw = [&](CountRecord& r) {
        const double mean = static_cast<double>(r.raw_coincidences);
        r.raw_coincidences = sample_counts(mean / r.acquisition_time,
                                           r.acquisition_time,
                                           derive_seed(seed, index++));
    };
    for (auto& [basis, records] : out.fringe_scans) {
        for (CountRecord& r : records) {
            redraw(r);
        }
    }
    if (out.chsh) {
        for (CountRecord& r : out.chsh->records) {
            redraw(r);
        }
    }
    if (out.tomography) {
        for (CountRecord& r : *out.tomography) {
            redraw(r);
        }
    }
    return out;
}

}  // namespace

BootstrapSummary bootstrap(const ExperimentCounts& data, int n_resamples,
                           std::uint64_t seed) {
    if (n_resamples < 2) {
        throw std::invalid_argument("bootstrap needs at least 2 resamples");
    }

    std::map<std::string, std::vector<double>> samples;
    int failed = 0;
    for (int j = 0; j < n_resamples; ++j) {
        try {
            const auto scalars = analyze_experiment(resample(data, derive_seed(seed, j)));
            for (const auto& [key, value] : scalars) {
                samples[key].push_back(value);
            }
        } catch (const std::exception&) {
            ++failed;
        }
    }
    if (failed * 2 > n_resamples) {
        throw bootstrap_error("more than half of the bootstrap resamples failed");
    }

    BootstrapSummary summary;
    summary.n_resamples = n_resamples;
    summary.n_failed = failed;
    for (const auto& [key, values] : samples) {
        ScalarStats stats;
        const double n = static_cast<double>(values.size());
        stats.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
        double ss = 0.0;
        for (double v : values) {
            ss += (v - stats.mean) * (v - stats.mean);
        }
        stats.stddev = (values.size() > 1) ? std::sqrt(ss / (n - 1.0)) : 0.0;
        summary.scalars[key] = stats;
    }
    return summary;
}

}  // namespace sagnacsim
