// Density-matrix reconstruction from the 16-setting count table: linear
// inversion in the two-qubit Pauli basis, and Poisson maximum likelihood over
// the triangular-factor parametrization rho = T^dagger T / tr(T^dagger T).

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <vector>

#include "sagnacsim/analysis.hpp"

namespace sagnacsim {

namespace {

const std::complex<double> kImag(0.0, 1.0);

std::array<Eigen::Matrix2cd, 4> pauli_basis() {
    std::array<Eigen::Matrix2cd, 4> sigma;
    sigma[0] = Eigen::Matrix2cd::Identity();
    sigma[1] << 0.0, 1.0, 1.0, 0.0;                  // X
    sigma[2] << 0.0, -kImag, kImag, 0.0;             // Y
    sigma[3] << 1.0, 0.0, 0.0, -1.0;                 // Z
    return sigma;
}

Eigen::Matrix4cd kron2(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
    Eigen::Matrix4cd out;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
        }
    }
    return out;
}

const std::array<Eigen::Matrix4cd, 16>& two_qubit_pauli() {
    static const std::array<Eigen::Matrix4cd, 16> ops = [] {
        const auto sigma = pauli_basis();
        std::array<Eigen::Matrix4cd, 16> out;
        for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) {
                out[4 * a + b] = kron2(sigma[a], sigma[b]);
            }
        }
        return out;
    }();
    return ops;
}

// Corrected rates for the 16 records (accidentals subtracted when the
// records carry singles rates), in settings order.
std::array<double, 16> corrected_rates(const TomographyData& data, double tau) {
    std::array<double, 16> rates{};
    for (int k = 0; k < 16; ++k) {
        rates[k] = correct_counts(data.records[k], tau);
    }
    return rates;
}

// Total intensity estimated from the complete H/V quadruple
// (HH, HV, VH, VV): their projectors sum to the identity.
double quadruple_scale(const std::array<double, 16>& rates) {
    return rates[0] + rates[1] + rates[4] + rates[5];
}

struct MleProblem {
    std::array<double, 16> counts;        // accidental-corrected counts
    std::array<double, 16> times;         // acquisition times
    double total_counts;

    double probability(const Eigen::Matrix4cd& rho, int k) const {
        return std::max(
            0.0, ((rho * tomography_settings()[k].projector.p).trace()).real());
    }

    // Per-count negative log-likelihood with the intensity scale profiled out
    // (accidental rates are removed from the counts beforehand; at the rate
    // budgets involved this changes the likelihood negligibly and mirrors the
    // subtract-then-analyze convention of the measurement).
    double nll(const Eigen::Matrix4cd& rho) const {
        double weighted = 0.0;
        for (int k = 0; k < 16; ++k) {
            weighted += times[k] * probability(rho, k);
        }
        if (!(weighted > 0.0)) {
            return std::numeric_limits<double>::infinity();
        }
        const double scale = total_counts / weighted;
        double value = 0.0;
        for (int k = 0; k < 16; ++k) {
            const double mu = scale * times[k] * probability(rho, k);
            if (counts[k] > 0.0) {
                if (!(mu > 0.0)) {
                    return std::numeric_limits<double>::infinity();
                }
                value += mu - counts[k] * std::log(mu);
            } else {
                value += mu;
            }
        }
        return value / total_counts;
    }

    // Euclidean gradient with respect to rho (Hermitian), at the profiled
    // scale; the scale derivative vanishes there.
    Eigen::Matrix4cd rho_gradient(const Eigen::Matrix4cd& rho) const {
        double weighted = 0.0;
        for (int k = 0; k < 16; ++k) {
            weighted += times[k] * probability(rho, k);
        }
        const double scale = total_counts / weighted;
        Eigen::Matrix4cd g = Eigen::Matrix4cd::Zero();
        for (int k = 0; k < 16; ++k) {
            const double p = probability(rho, k);
            double coeff = scale * times[k];
            if (counts[k] > 0.0) {
                coeff -= counts[k] / std::max(p, 1e-300);
            }
            g += coeff * tomography_settings()[k].projector.p;
        }
        return g / total_counts;
    }
};

// 16 real parameters <-> upper-triangular T with real diagonal.
Eigen::Matrix4cd params_to_T(const Eigen::Matrix<double, 16, 1>& x) {
    Eigen::Matrix4cd t = Eigen::Matrix4cd::Zero();
    int idx = 0;
    for (int i = 0; i < 4; ++i) {
        t(i, i) = x(idx++);
    }
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            const double re = x(idx++);
            const double im = x(idx++);
            t(i, j) = std::complex<double>(re, im);
        }
    }
    return t;
}

Eigen::Matrix<double, 16, 1> T_to_params(const Eigen::Matrix4cd& t) {
    Eigen::Matrix<double, 16, 1> x;
    int idx = 0;
    for (int i = 0; i < 4; ++i) {
        x(idx++) = t(i, i).real();
    }
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            x(idx++) = t(i, j).real();
            x(idx++) = t(i, j).imag();
        }
    }
    return x;
}

Eigen::Matrix4cd rho_from_T(const Eigen::Matrix4cd& t) {
    Eigen::Matrix4cd a = t.adjoint() * t;
    const double tr = a.trace().real();
    return a / tr;
}

// Chain rule through rho = T^dagger T / tr(T^dagger T): the T-space gradient
// is 2 T Gt with Gt = (G - tr(G rho) I) / tr(T^dagger T).
Eigen::Matrix<double, 16, 1> param_gradient(const Eigen::Matrix4cd& t,
                                            const Eigen::Matrix4cd& rho_grad) {
    const Eigen::Matrix4cd a = t.adjoint() * t;
    const double tr = a.trace().real();
    const Eigen::Matrix4cd rho = a / tr;
    const double inner = (rho_grad * rho).trace().real();
    const Eigen::Matrix4cd gt =
        (rho_grad - inner * Eigen::Matrix4cd::Identity()) / tr;
    const Eigen::Matrix4cd full = 2.0 * (t * gt);
    Eigen::Matrix<double, 16, 1> g;
    int idx = 0;
    for (int i = 0; i < 4; ++i) {
        g(idx++) = full(i, i).real();
    }
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            g(idx++) = full(i, j).real();
            g(idx++) = full(i, j).imag();
        }
    }
    return g;
}

}  // namespace

TomographyData::TomographyData(std::vector<CountRecord> records_in)
    : records(std::move(records_in)) {
    const auto& settings = tomography_settings();
    if (records.size() != settings.size()) {
        throw std::invalid_argument("tomography needs exactly 16 count records");
    }
    for (std::size_t k = 0; k < records.size(); ++k) {
        if (records[k].setting_label != settings[k].name()) {
            throw std::invalid_argument(
                "tomography record " + std::to_string(k) + " has label '" +
                records[k].setting_label + "', expected '" + settings[k].name() + "'");
        }
        if (records[k].raw_coincidences < 0 || !(records[k].acquisition_time > 0.0)) {
            throw std::invalid_argument("tomography records need nonnegative counts and positive times");
        }
    }
}

DensityMatrix tomography_linear(const TomographyData& data) {
    return tomography_linear(data, 0.0);
}

DensityMatrix tomography_linear(const TomographyData& data, double tau) {
    const auto rates = corrected_rates(data, tau);
    const double scale = quadruple_scale(rates);
    if (!(scale > 0.0)) {
        throw std::invalid_argument("tomography data has no counts in the H/V quadruple");
    }

    const auto& settings = tomography_settings();
    const auto& paulis = two_qubit_pauli();
    Eigen::Matrix<double, 16, 16> m;
    Eigen::Matrix<double, 16, 1> p;
    for (int k = 0; k < 16; ++k) {
        for (int j = 0; j < 16; ++j) {
            m(k, j) = 0.25 * ((settings[k].projector.p * paulis[j]).trace()).real();
        }
        p(k) = rates[k] / scale;
    }
    Eigen::FullPivLU<Eigen::Matrix<double, 16, 16>> lu(m);
    if (!lu.isInvertible()) {
        throw config_error("tomography setting table is not informationally complete");
    }
    const Eigen::Matrix<double, 16, 1> coeff = lu.solve(p);

    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    for (int j = 0; j < 16; ++j) {
        rho += coeff(j) * paulis[j];
    }
    rho *= 0.25;
    const double tr = rho.trace().real();
    if (!(tr > 0.0)) {
        throw invalid_state_error("linear inversion produced a nonpositive trace");
    }
    rho /= tr;
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityMatrix(rho);
}

DensityMatrix project_to_physical(const DensityMatrix& rho) {
    Eigen::Matrix4cd sym = 0.5 * (rho.matrix() + rho.matrix().adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(sym);
    Eigen::Vector4d evals = es.eigenvalues().cwiseMax(0.0);
    const double total = evals.sum();
    if (!(total > 0.0)) {
        throw invalid_state_error("cannot project a zero matrix onto the physical set");
    }
    evals /= total;
    Eigen::Matrix4cd proj = es.eigenvectors() * evals.asDiagonal() *
                            es.eigenvectors().adjoint();
    proj = 0.5 * (proj + proj.adjoint()).eval();
    return DensityMatrix(proj);
}

convergence_error::convergence_error(const std::string& message, MleResult best)
    : std::runtime_error(message), best_(std::move(best)) {}

double tomography_nll(const TomographyData& data, const DensityMatrix& rho,
                      double tau) {
    MleProblem problem{};
    problem.total_counts = 0.0;
    for (int k = 0; k < 16; ++k) {
        problem.times[k] = data.records[k].acquisition_time;
        problem.counts[k] =
            correct_counts(data.records[k], tau) * data.records[k].acquisition_time;
        problem.total_counts += problem.counts[k];
    }
    if (!(problem.total_counts > 0.0)) {
        throw std::invalid_argument("tomography data has no counts");
    }
    return problem.nll(rho.matrix());
}

MleResult tomography_mle(const TomographyData& data, const MleOptions& options) {
    return tomography_mle(data, 0.0, options);
}

MleResult tomography_mle(const TomographyData& data, double tau,
                         const MleOptions& options) {
    MleProblem problem{};
    problem.total_counts = 0.0;
    for (int k = 0; k < 16; ++k) {
        const CountRecord& r = data.records[k];
        problem.times[k] = r.acquisition_time;
        problem.counts[k] = correct_counts(r, tau) * r.acquisition_time;
        problem.total_counts += problem.counts[k];
    }
    if (!(problem.total_counts > 0.0)) {
        throw std::invalid_argument("tomography data has no counts");
    }

    // Seed from linear inversion, projected to the physical set; a small
    // eigenvalue floor keeps the triangular factor full rank at the start.
    const DensityMatrix seed = project_to_physical(tomography_linear(data, tau));
    Eigen::Matrix4cd seeded = 0.9999 * seed.matrix() +
                              0.0001 * 0.25 * Eigen::Matrix4cd::Identity();
    Eigen::LLT<Eigen::Matrix4cd> llt(seeded);
    Eigen::Matrix4cd t = Eigen::Matrix4cd(llt.matrixL()).adjoint();

    Eigen::Matrix<double, 16, 1> x = T_to_params(t);
    double f = problem.nll(rho_from_T(params_to_T(x)));
    const double seed_nll = problem.nll(seed.matrix());
    Eigen::Matrix<double, 16, 1> g =
        param_gradient(params_to_T(x), problem.rho_gradient(rho_from_T(params_to_T(x))));

    // L-BFGS with Armijo backtracking.
    std::deque<Eigen::Matrix<double, 16, 1>> s_hist, y_hist;
    std::deque<double> rho_hist;
    const int memory = 10;
    int iterations = 0;
    double grad_norm = g.norm();
    double last_step = 0.0;
    bool converged = grad_norm < options.gradient_tol;

    for (; iterations < options.max_iterations && !converged; ++iterations) {
        // Two-loop recursion.
        Eigen::Matrix<double, 16, 1> q = g;
        std::vector<double> alpha(s_hist.size());
        for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
            alpha[i] = rho_hist[i] * s_hist[i].dot(q);
            q -= alpha[i] * y_hist[i];
        }
        if (!s_hist.empty()) {
            const double gamma = s_hist.back().dot(y_hist.back()) /
                                 y_hist.back().squaredNorm();
            q *= gamma;
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(q);
            q += (alpha[i] - beta) * s_hist[i];
        }
        Eigen::Matrix<double, 16, 1> direction = -q;
        if (direction.dot(g) > -1e-16 * direction.norm() * grad_norm) {
            direction = -g;  // not a descent direction; fall back
        }

        double step = 1.0;
        const double slope = direction.dot(g);
        double f_new = std::numeric_limits<double>::infinity();
        Eigen::Matrix<double, 16, 1> x_new;
        while (step > 1e-20) {
            x_new = x + step * direction;
            f_new = problem.nll(rho_from_T(params_to_T(x_new)));
            if (f_new <= f + 1e-4 * step * slope) {
                break;
            }
            step *= 0.5;
        }
        if (!(f_new <= f)) {
            break;  // line search failed; treat as stationary
        }
        const Eigen::Matrix<double, 16, 1> g_new =
            param_gradient(params_to_T(x_new),
                           problem.rho_gradient(rho_from_T(params_to_T(x_new))));

        const Eigen::Matrix<double, 16, 1> s_vec = x_new - x;
        const Eigen::Matrix<double, 16, 1> y_vec = g_new - g;
        const double sy = s_vec.dot(y_vec);
        if (sy > 1e-14 * s_vec.norm() * y_vec.norm()) {
            s_hist.push_back(s_vec);
            y_hist.push_back(y_vec);
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }

        last_step = s_vec.norm();
        x = x_new;
        f = f_new;
        g = g_new;
        grad_norm = g.norm();
        if (grad_norm < options.gradient_tol || last_step < options.step_tol) {
            converged = true;
        }
    }

    const Eigen::Matrix4cd rho_raw = rho_from_T(params_to_T(x));
    DensityMatrix rho = project_to_physical(DensityMatrix(
        (0.5 * (rho_raw + rho_raw.adjoint())).eval()));
    MleResult result{rho, iterations, grad_norm, f, converged};
    if (f > seed_nll + 1e-12) {
        // Cannot happen with a monotone line search; guard anyway.
        throw convergence_error("mle: likelihood regressed below its seed", result);
    }
    if (!converged) {
        throw convergence_error("mle: no convergence within the iteration limit",
                                result);
    }
    return result;
}

}  // namespace sagnacsim
