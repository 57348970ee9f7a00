// source.hpp
// Sagnac SPDC source model: the pump's transverse profile sweeps a
// position-dependent two-photon phase (and component concurrence) imposed by
// dPBS wavefront distortion, and the collected state is the corresponding
// classical mixture. Also provides the step-index fiber mode-count estimate.

#pragma once

#include <string>
#include <vector>

#include "sagnacsim/qstate.hpp"

namespace sagnacsim {

struct PumpSample {
    double position_mm;
    double weight;
};

// Discrete transverse pump profile; weights nonnegative, summing to one
// within 1e-9.
struct PumpSpatialProfile {
    std::vector<PumpSample> samples;

    explicit PumpSpatialProfile(std::vector<PumpSample> samples_in);
};

// Transverse position -> (two-photon phase, component concurrence), given as
// a table interpolated piecewise-linearly between entries. Positions outside
// the table's span are undefined and raise std::invalid_argument. A
// single-entry table is defined only at that position; constant() is defined
// everywhere.
class DistortionMap {
public:
    struct Entry {
        double position_mm;
        double phi;
        double concurrence;
    };

    explicit DistortionMap(std::vector<Entry> entries);

    static DistortionMap constant(double phi, double concurrence = 1.0);

    // phi(x) = phi_center + slope * x over |x| <= half_span_mm.
    static DistortionMap linear_ramp(double phi_center, double slope_rad_per_mm,
                                     double half_span_mm, double concurrence = 1.0);

    // CSV with header position_mm,phi_rad,concurrence; the concurrence column
    // may be omitted (defaults to 1.0).
    static DistortionMap from_csv(const std::string& text);
    static DistortionMap from_csv_file(const std::string& path);
    std::string to_csv() const;

    Entry at(double position_mm) const;

    const std::vector<Entry>& entries() const { return entries_; }

private:
    DistortionMap() = default;

    std::vector<Entry> entries_;
    bool constant_ = false;
};

PumpSpatialProfile led_profile(double diameter_mm, int n_samples);

// Narrow-beam limit: a single sample at center_mm. The center is the knob
// that selects which part of the distortion map the beam probes.
PumpSpatialProfile laser_profile(double diameter_mm, double center_mm = 0.0);

struct FiberSpec {
    double core_diameter_um;
    double numerical_aperture;
    double wavelength_nm;

    FiberSpec(double core_diameter_um_in, double numerical_aperture_in,
              double wavelength_nm_in);
};

// Step-index estimate N = V^2 / 2 with V = pi * d * NA / lambda.
double fiber_mode_count(const FiberSpec& fiber);

// Mixture over pump samples of x_state(concurrence(x), phi(x)).
DensityMatrix sagnac_output(const PumpSpatialProfile& pump,
                            const DistortionMap& distortion);

}  // namespace sagnacsim
