#include <doctest.h>

#include "sagnacsim/polarimetry.hpp"
#include "test_support.hpp"

using namespace sagnacsim;
namespace st = sagnacsim::testing;

namespace {

double projector_defect(const Eigen::Matrix2cd& p) {
    const double idem = (p * p - p).cwiseAbs().maxCoeff();
    const double herm = (p - p.adjoint()).cwiseAbs().maxCoeff();
    const double tr = std::abs(p.trace() - 1.0);
    return std::max({idem, herm, tr});
}

}  // namespace

TEST_CASE("linear_projector at the cardinal angles") {
    const Eigen::Matrix2cd h = linear_projector(AnalyzerSetting(0.0)).p;
    CHECK(h(0, 0).real() == doctest::Approx(1.0));
    CHECK(h(1, 1).real() == doctest::Approx(0.0));

    const Eigen::Matrix2cd v = linear_projector(AnalyzerSetting(kPi / 2.0)).p;
    CHECK(v(0, 0).real() == doctest::Approx(0.0));
    CHECK(v(1, 1).real() == doctest::Approx(1.0));

    const Eigen::Matrix2cd d = linear_projector(AnalyzerSetting(kPi / 4.0)).p;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            CHECK(d(i, j).real() == doctest::Approx(0.5));
            CHECK(d(i, j).imag() == doctest::Approx(0.0));
        }
    }
}

TEST_CASE("perpendicular adds 90 degrees modulo pi") {
    CHECK(perpendicular(AnalyzerSetting(0.0)).theta == doctest::Approx(kPi / 2.0));
    CHECK(perpendicular(AnalyzerSetting(deg_to_rad(67.5))).theta ==
          doctest::Approx(deg_to_rad(157.5)));
    CHECK(perpendicular(AnalyzerSetting(deg_to_rad(157.5))).theta ==
          doctest::Approx(deg_to_rad(67.5)));
}

TEST_CASE("waveplate_operator is unitary and matches the textbook actions") {
    for (WaveplateKind kind : {WaveplateKind::half, WaveplateKind::quarter}) {
        for (double angle : {0.0, 0.3, kPi / 8.0, 2.0}) {
            const Eigen::Matrix2cd w = waveplate_operator(kind, angle);
            CHECK((w * w.adjoint() - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() <
                  1e-12);
        }
    }

    // Half-wave at 22.5 deg: |H> -> (|H> + |V>)/sqrt(2).
    const Eigen::Vector2cd h(1.0, 0.0);
    const Eigen::Vector2cd out =
        waveplate_operator(WaveplateKind::half, kPi / 8.0) * h;
    CHECK(std::abs(out(0) - 1.0 / std::sqrt(2.0)) < 1e-12);
    CHECK(std::abs(out(1) - 1.0 / std::sqrt(2.0)) < 1e-12);

    // Quarter-wave at 0: |V> -> i|V> up to a global phase (exact here).
    const Eigen::Vector2cd v(0.0, 1.0);
    const Eigen::Vector2cd qv = waveplate_operator(WaveplateKind::quarter, 0.0) * v;
    CHECK(std::abs(qv(1) - std::complex<double>(0.0, 1.0)) < 1e-12);

    // Half-wave at 0: |V> -> -|V>.
    const Eigen::Vector2cd hv = waveplate_operator(WaveplateKind::half, 0.0) * v;
    CHECK(std::abs(hv(1) + 1.0) < 1e-12);
}

TEST_CASE("projector_from_waveplates reproduces every labeled basis") {
    CHECK((projector_from_waveplates(0.0, 0.0).p - label_projector(PolLabel::H).p)
              .cwiseAbs()
              .maxCoeff() < 1e-12);

    const WaveplatePair d = label_waveplates(PolLabel::D);
    CHECK((projector_from_waveplates(d.qwp, d.hwp).p -
           linear_projector(AnalyzerSetting(kPi / 4.0)).p)
              .cwiseAbs()
              .maxCoeff() < 1e-12);

    const WaveplatePair r = label_waveplates(PolLabel::R);
    const Eigen::Matrix2cd rp = projector_from_waveplates(r.qwp, r.hwp).p;
    CHECK(std::abs(rp(0, 1) - std::complex<double>(0.0, 0.5)) < 1e-12);
    CHECK(std::abs(rp(1, 0) - std::complex<double>(0.0, -0.5)) < 1e-12);

    for (PolLabel label : {PolLabel::H, PolLabel::V, PolLabel::D, PolLabel::A,
                           PolLabel::R, PolLabel::L}) {
        const WaveplatePair wp = label_waveplates(label);
        const Eigen::Matrix2cd built = projector_from_waveplates(wp.qwp, wp.hwp).p;
        CHECK((built - label_projector(label).p).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(projector_defect(built) < 1e-12);
    }
}

TEST_CASE("tomography_settings is the 16-entry informationally complete table") {
    const auto& settings = tomography_settings();
    REQUIRE(settings.size() == 16);

    // Product structure over {H, V, D, R}; spot-check a few named pairs.
    CHECK(settings[0].name() == "HH");
    CHECK(settings[1].name() == "HV");
    CHECK(settings[5].name() == "VV");
    CHECK(settings[11].name() == "DR");

    for (const TomographySetting& s : settings) {
        CHECK(projector_defect(Eigen::Matrix2cd(label_projector(s.signal).p)) < 1e-12);
        const Eigen::Matrix4cd& p = s.projector.p;
        CHECK((p * p - p).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(std::abs(p.trace() - 1.0) < 1e-12);
    }

    // Gram matrix of the 16 projectors must be invertible.
    Eigen::Matrix<double, 16, 16> gram;
    for (int a = 0; a < 16; ++a) {
        for (int b = 0; b < 16; ++b) {
            gram(a, b) = ((settings[a].projector.p * settings[b].projector.p).trace()).real();
        }
    }
    Eigen::FullPivLU<Eigen::Matrix<double, 16, 16>> lu(gram);
    CHECK(lu.isInvertible());
    CHECK(std::abs(lu.determinant()) > 1e-12);
}

TEST_CASE("tomography settings CSV export") {
    const std::string csv = tomography_settings_csv();
    CHECK(csv.rfind("label_s,label_i,qwp_s_deg,hwp_s_deg,qwp_i_deg,hwp_i_deg\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 17);  // header + 16 rows
    CHECK(csv.find("D,R,45.0,22.5,0.0,22.5") != std::string::npos);
}

TEST_CASE("born_probability on reference cases") {
    const DensityMatrix singlet = bell_phase_state(BellPhaseSpec(kPi));
    CHECK(born_probability(singlet, joint_linear_projector(0.0, 0.0)) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(born_probability(singlet, joint_linear_projector(0.0, kPi / 2.0)) ==
          doctest::Approx(0.5).epsilon(1e-12));

    Eigen::Matrix4cd hv = Eigen::Matrix4cd::Zero();
    hv(kHV, kHV) = 1.0;
    CHECK(born_probability(DensityMatrix(hv),
                           joint_projector(label_projector(PolLabel::H),
                                           label_projector(PolLabel::V))) ==
          doctest::Approx(1.0));

    Eigen::Matrix4cd negative = Eigen::Matrix4cd::Zero();
    negative(0, 0) = 1.2;
    negative(1, 1) = -0.2;
    CHECK_THROWS_AS(born_probability(DensityMatrix(negative),
                                     joint_linear_projector(0.0, 0.0)),
                    invalid_state_error);
}

TEST_CASE("property: projector pairs at perpendicular angles resolve the identity") {
    auto gen = st::rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        const AnalyzerSetting theta(st::uniform(gen, -10.0, 10.0));
        const Eigen::Matrix2cd sum = linear_projector(theta).p +
                                     linear_projector(perpendicular(theta)).p;
        CHECK((sum - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("property: singlet coincidence probability is sin^2(theta_s - theta_i)/2") {
    const DensityMatrix singlet = bell_phase_state(BellPhaseSpec(kPi));
    auto gen = st::rng(22);
    for (int trial = 0; trial < 100; ++trial) {
        const double ts = st::uniform(gen, 0.0, kPi);
        const double ti = st::uniform(gen, 0.0, kPi);
        const double expected = 0.5 * std::pow(std::sin(ts - ti), 2);
        CHECK(born_probability(singlet, joint_linear_projector(ts, ti)) ==
              doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("property: four perpendicular outcomes sum to one on physical states") {
    auto gen = st::rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        const DensityMatrix rho = st::random_physical_state(gen);
        const double ts = st::uniform(gen, 0.0, kPi);
        const double ti = st::uniform(gen, 0.0, kPi);
        const double half_pi = kPi / 2.0;
        const double total =
            born_probability(rho, joint_linear_projector(ts, ti)) +
            born_probability(rho, joint_linear_projector(ts, ti + half_pi)) +
            born_probability(rho, joint_linear_projector(ts + half_pi, ti)) +
            born_probability(rho, joint_linear_projector(ts + half_pi, ti + half_pi));
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}
