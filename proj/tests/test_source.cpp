#include <doctest.h>

#include "sagnacsim/source.hpp"
#include "test_support.hpp"

using namespace sagnacsim;
namespace st = sagnacsim::testing;

TEST_CASE("led_profile spans the beam uniformly") {
    const PumpSpatialProfile single = led_profile(1.0, 1);
    REQUIRE(single.samples.size() == 1);
    CHECK(single.samples[0].position_mm == doctest::Approx(0.0));
    CHECK(single.samples[0].weight == doctest::Approx(1.0));

    const PumpSpatialProfile broad = led_profile(1.0, 21);
    REQUIRE(broad.samples.size() == 21);
    CHECK(broad.samples.front().position_mm == doctest::Approx(-0.5));
    CHECK(broad.samples.back().position_mm == doctest::Approx(0.5));
    for (const PumpSample& s : broad.samples) {
        CHECK(s.weight == doctest::Approx(1.0 / 21.0));
    }

    CHECK_THROWS_AS(led_profile(0.0, 5), std::invalid_argument);
    CHECK_THROWS_AS(led_profile(1.0, 0), std::invalid_argument);
}

TEST_CASE("laser_profile is a single configurable sample") {
    const PumpSpatialProfile centered = laser_profile(0.1);
    REQUIRE(centered.samples.size() == 1);
    CHECK(centered.samples[0].position_mm == doctest::Approx(0.0));

    const PumpSpatialProfile shifted = laser_profile(0.1, 0.5);
    CHECK(shifted.samples[0].position_mm == doctest::Approx(0.5));

    CHECK_THROWS_AS(laser_profile(-1.0), std::invalid_argument);
}

TEST_CASE("distortion maps interpolate and reject out-of-span lookups") {
    const DistortionMap ramp = DistortionMap::linear_ramp(0.0, 1.0, 0.5, 0.9);
    CHECK(ramp.at(0.0).phi == doctest::Approx(0.0));
    CHECK(ramp.at(0.25).phi == doctest::Approx(0.25));
    CHECK(ramp.at(-0.5).phi == doctest::Approx(-0.5));
    CHECK(ramp.at(0.3).concurrence == doctest::Approx(0.9));
    CHECK_THROWS_AS(ramp.at(0.6), std::invalid_argument);

    const DistortionMap constant = DistortionMap::constant(kPi, 1.0);
    CHECK(constant.at(123.0).phi == doctest::Approx(kPi));

    const DistortionMap table({{-1.0, 0.0, 1.0}, {1.0, 2.0, 0.5}});
    CHECK(table.at(0.0).phi == doctest::Approx(1.0));
    CHECK(table.at(0.0).concurrence == doctest::Approx(0.75));
}

TEST_CASE("distortion map CSV round trip and defaulted concurrence") {
    const std::string with_col =
        "position_mm,phi_rad,concurrence\n-0.5,0.1,0.9\n0.5,0.3,1.0\n";
    const DistortionMap a = DistortionMap::from_csv(with_col);
    CHECK(a.at(-0.5).phi == doctest::Approx(0.1));
    CHECK(a.at(-0.5).concurrence == doctest::Approx(0.9));

    const std::string without_col = "position_mm,phi_rad\n-0.5,0.1\n0.5,0.3\n";
    const DistortionMap b = DistortionMap::from_csv(without_col);
    CHECK(b.at(0.5).concurrence == doctest::Approx(1.0));

    const DistortionMap back = DistortionMap::from_csv(a.to_csv());
    CHECK(back.at(0.25).phi == doctest::Approx(a.at(0.25).phi));

    CHECK_THROWS_AS(DistortionMap::from_csv("positionmm,phi\n1,2\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(DistortionMap::from_csv("position_mm,phi_rad\nxx,2\n"),
                    std::invalid_argument);
}

TEST_CASE("sagnac_output on reference configurations") {
    // Degenerate profile: exactly the Bell-phase state of the map point.
    const DensityMatrix rho = sagnac_output(led_profile(1.0, 1),
                                            DistortionMap::constant(kPi, 1.0));
    CHECK((rho.matrix() - bell_phase_state(BellPhaseSpec(kPi)).matrix()).norm() <
          1e-14);

    // Two equal samples with the two-path (C, phi) pairs.
    const DistortionMap two_path({{-0.5, 0.5558 * kPi, 0.933},
                                  {0.5, 0.3220 * kPi, 0.916}});
    const DensityMatrix mixed = sagnac_output(led_profile(1.0, 2), two_path);
    const std::complex<double> i(0.0, 1.0);
    const double closed_form =
        0.5 * std::abs(0.933 * std::exp(i * 0.5558 * kPi) +
                       0.916 * std::exp(i * 0.3220 * kPi));
    CHECK(concurrence(mixed) == doctest::Approx(closed_form).epsilon(1e-12));
    CHECK(std::abs(concurrence(mixed) - 0.8558) < 0.02);

    // Broad profile across a half-pi phase ramp with unit component
    // concurrence: concurrence equals the discrete phasor average.
    const int n = 21;
    const DistortionMap ramp = DistortionMap::linear_ramp(kPi, 0.5 * kPi, 0.5);
    const PumpSpatialProfile broad = led_profile(1.0, n);
    std::complex<double> phasor(0.0, 0.0);
    for (const PumpSample& s : broad.samples) {
        phasor += s.weight * std::exp(i * ramp.at(s.position_mm).phi);
    }
    CHECK(std::abs(concurrence(sagnac_output(broad, ramp)) - std::abs(phasor)) <
          1e-9);
    CHECK(std::abs(phasor) < 1.0);

    CHECK_THROWS_AS(sagnac_output(led_profile(2.0, 5),
                                  DistortionMap::linear_ramp(0.0, 1.0, 0.5)),
                    std::invalid_argument);
}

TEST_CASE("laser probes at shifted centers see different phases") {
    const DistortionMap ramp = DistortionMap::linear_ramp(0.2, 0.8, 0.75, 1.0);
    const DensityMatrix left = sagnac_output(laser_profile(0.1, -0.5), ramp);
    const DensityMatrix right = sagnac_output(laser_profile(0.1, 0.5), ramp);
    CHECK(infer_phase(left) == doctest::Approx(0.2 - 0.4).epsilon(1e-12));
    CHECK(infer_phase(right) == doctest::Approx(0.2 + 0.4).epsilon(1e-12));
    CHECK(infer_phase(left) != infer_phase(right));

    // Their equal mixture is less entangled than either component.
    const DensityMatrix both = mix({{0.5, left}, {0.5, right}});
    CHECK(concurrence(both) < concurrence(left));
    CHECK(concurrence(both) < concurrence(right));
}

TEST_CASE("fiber_mode_count reproduces the step-index estimates") {
    const double collection = fiber_mode_count(FiberSpec(200.0, 0.39, 810.0));
    CHECK(collection == doctest::Approx(45760.0).epsilon(2e-4));
    CHECK(collection > 45000.0);

    const double pump = fiber_mode_count(FiberSpec(50.0, 0.22, 405.0));
    CHECK(pump == doctest::Approx(3640.0).epsilon(2e-4));

    // V scales linearly in d, so the count scales with d^2.
    const double doubled = fiber_mode_count(FiberSpec(400.0, 0.39, 810.0));
    CHECK(doubled == doctest::Approx(4.0 * collection).epsilon(1e-12));

    CHECK_THROWS_AS(FiberSpec(-200.0, 0.39, 810.0), std::invalid_argument);
    CHECK_THROWS_AS(FiberSpec(200.0, 1.2, 810.0), std::invalid_argument);
    CHECK_THROWS_AS(FiberSpec(200.0, 0.39, 0.0), std::invalid_argument);
}

TEST_CASE("property: mixing identical map entries is sample-count independent") {
    const DistortionMap constant = DistortionMap::constant(0.37, 0.8);
    const DensityMatrix one = sagnac_output(led_profile(1.0, 1), constant);
    for (int n : {2, 5, 21, 64}) {
        CHECK((sagnac_output(led_profile(1.0, n), constant).matrix() - one.matrix())
                  .cwiseAbs()
                  .maxCoeff() < 1e-12);
    }
}

TEST_CASE("property: source concurrence never exceeds the best component") {
    auto gen = st::rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(st::uniform(gen, 0.0, 6.0));
        std::vector<DistortionMap::Entry> entries;
        double max_c = 0.0;
        for (int k = 0; k < n; ++k) {
            DistortionMap::Entry e;
            e.position_mm = -1.0 + 2.0 * k / (n - 1);
            e.phi = st::uniform(gen, -kPi, kPi);
            e.concurrence = st::uniform(gen, 0.0, 1.0);
            max_c = std::max(max_c, e.concurrence);
            entries.push_back(e);
        }
        const DensityMatrix rho =
            sagnac_output(led_profile(2.0, n), DistortionMap(entries));
        CHECK(concurrence(rho) <= max_c + 1e-9);
    }
}

TEST_CASE("property: unit-concurrence profiles obey the phasor-average law") {
    auto gen = st::rng(32);
    for (int trial = 0; trial < 100; ++trial) {
        const double center = st::uniform(gen, -kPi, kPi);
        const double slope = st::uniform(gen, -2.0, 2.0);
        const int n = 3 + static_cast<int>(st::uniform(gen, 0.0, 20.0));
        const DistortionMap ramp = DistortionMap::linear_ramp(center, slope, 1.0);
        const PumpSpatialProfile profile = led_profile(2.0, n);
        std::complex<double> phasor(0.0, 0.0);
        for (const PumpSample& s : profile.samples) {
            phasor += s.weight *
                      std::exp(std::complex<double>(0.0, 1.0) * ramp.at(s.position_mm).phi);
        }
        CHECK(std::abs(concurrence(sagnac_output(profile, ramp)) -
                       std::abs(phasor)) < 1e-9);
    }
}

TEST_CASE("property: fiber_mode_count monotonicity") {
    auto gen = st::rng(33);
    for (int trial = 0; trial < 100; ++trial) {
        const double d = st::uniform(gen, 10.0, 400.0);
        const double na = st::uniform(gen, 0.05, 0.6);
        const double lam = st::uniform(gen, 300.0, 1600.0);
        const double base = fiber_mode_count(FiberSpec(d, na, lam));
        CHECK(fiber_mode_count(FiberSpec(d * 1.1, na, lam)) > base);
        CHECK(fiber_mode_count(FiberSpec(d, std::min(0.99, na * 1.1), lam)) > base);
        CHECK(fiber_mode_count(FiberSpec(d, na, lam * 1.1)) < base);
    }
}
