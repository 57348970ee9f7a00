#include "sagnacsim/source.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sagnacsim {

PumpSpatialProfile::PumpSpatialProfile(std::vector<PumpSample> samples_in)
    : samples(std::move(samples_in)) {
    if (samples.empty()) {
        throw std::invalid_argument("pump profile needs at least one sample");
    }
    double total = 0.0;
    for (const PumpSample& s : samples) {
        if (!std::isfinite(s.position_mm) || !std::isfinite(s.weight) || s.weight < 0.0) {
            throw std::invalid_argument("pump samples need finite positions and nonnegative weights");
        }
        total += s.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("pump sample weights must sum to one");
    }
}

DistortionMap::DistortionMap(std::vector<Entry> entries_in)
    : entries_(std::move(entries_in)) {
    if (entries_.empty()) {
        throw std::invalid_argument("distortion map needs at least one entry");
    }
    for (const Entry& e : entries_) {
        if (!std::isfinite(e.position_mm) || !std::isfinite(e.phi) ||
            !(e.concurrence >= 0.0 && e.concurrence <= 1.0)) {
            throw std::invalid_argument("distortion entries need finite phi and concurrence in [0, 1]");
        }
    }
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return a.position_mm < b.position_mm; });
    for (std::size_t i = 1; i < entries_.size(); ++i) {
        if (entries_[i].position_mm - entries_[i - 1].position_mm < 1e-12) {
            throw std::invalid_argument("distortion entries must have distinct positions");
        }
    }
}

DistortionMap DistortionMap::constant(double phi, double concurrence) {
    DistortionMap map({Entry{0.0, phi, concurrence}});
    map.constant_ = true;
    return map;
}

DistortionMap DistortionMap::linear_ramp(double phi_center, double slope_rad_per_mm,
                                         double half_span_mm, double concurrence) {
    if (!(half_span_mm > 0.0)) {
        throw std::invalid_argument("ramp half-span must be positive");
    }
    return DistortionMap({
        Entry{-half_span_mm, phi_center - slope_rad_per_mm * half_span_mm, concurrence},
        Entry{half_span_mm, phi_center + slope_rad_per_mm * half_span_mm, concurrence},
    });
}

DistortionMap DistortionMap::from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("distortion CSV is empty");
    }
    const bool has_concurrence = line.find("concurrence") != std::string::npos;
    if (line.rfind("position_mm,phi_rad", 0) != 0) {
        throw std::invalid_argument("distortion CSV must start with header position_mm,phi_rad[,concurrence]");
    }
    std::vector<Entry> entries;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::istringstream row(line);
        std::string cell;
        Entry e{0.0, 0.0, 1.0};
        try {
            if (!std::getline(row, cell, ',')) throw std::invalid_argument("short row");
            e.position_mm = std::stod(cell);
            if (!std::getline(row, cell, ',')) throw std::invalid_argument("short row");
            e.phi = std::stod(cell);
            if (has_concurrence && std::getline(row, cell, ',') && !cell.empty()) {
                e.concurrence = std::stod(cell);
            }
        } catch (const std::exception&) {
            throw std::invalid_argument("distortion CSV: bad row at line " +
                                        std::to_string(line_no));
        }
        entries.push_back(e);
    }
    return DistortionMap(std::move(entries));
}

DistortionMap DistortionMap::from_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open distortion map file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_csv(buf.str());
}

std::string DistortionMap::to_csv() const {
    std::ostringstream out;
    out << "position_mm,phi_rad,concurrence\n";
    out.precision(17);
    for (const Entry& e : entries_) {
        out << e.position_mm << ',' << e.phi << ',' << e.concurrence << '\n';
    }
    return out.str();
}

DistortionMap::Entry DistortionMap::at(double position_mm) const {
    if (!std::isfinite(position_mm)) {
        throw std::invalid_argument("distortion lookup position must be finite");
    }
    if (constant_) {
        Entry e = entries_.front();
        e.position_mm = position_mm;
        return e;
    }
    if (entries_.size() == 1) {
        if (std::abs(position_mm - entries_.front().position_mm) > 1e-9) {
            throw std::invalid_argument("distortion map is undefined at the requested position");
        }
        return entries_.front();
    }
    const double lo = entries_.front().position_mm;
    const double hi = entries_.back().position_mm;
    if (position_mm < lo - 1e-9 || position_mm > hi + 1e-9) {
        throw std::invalid_argument("position outside the distortion map span");
    }
    const double x = std::clamp(position_mm, lo, hi);
    auto upper = std::upper_bound(
        entries_.begin(), entries_.end(), x,
        [](double value, const Entry& e) { return value < e.position_mm; });
    if (upper == entries_.begin()) {
        return entries_.front();
    }
    if (upper == entries_.end()) {
        return entries_.back();
    }
    const Entry& b = *upper;
    const Entry& a = *(upper - 1);
    const double t = (x - a.position_mm) / (b.position_mm - a.position_mm);
    return Entry{x, a.phi + t * (b.phi - a.phi),
                 a.concurrence + t * (b.concurrence - a.concurrence)};
}

PumpSpatialProfile led_profile(double diameter_mm, int n_samples) {
    if (!(diameter_mm > 0.0)) {
        throw std::invalid_argument("LED beam diameter must be positive");
    }
    if (n_samples < 1) {
        throw std::invalid_argument("LED profile needs at least one sample");
    }
    std::vector<PumpSample> samples;
    samples.reserve(static_cast<std::size_t>(n_samples));
    const double w = 1.0 / n_samples;
    if (n_samples == 1) {
        samples.push_back({0.0, 1.0});
    } else {
        const double half = diameter_mm / 2.0;
        for (int k = 0; k < n_samples; ++k) {
            const double x = -half + diameter_mm * k / (n_samples - 1);
            samples.push_back({x, w});
        }
    }
    return PumpSpatialProfile(std::move(samples));
}

PumpSpatialProfile laser_profile(double diameter_mm, double center_mm) {
    if (!(diameter_mm > 0.0)) {
        throw std::invalid_argument("laser beam diameter must be positive");
    }
    if (!std::isfinite(center_mm)) {
        throw std::invalid_argument("laser center position must be finite");
    }
    return PumpSpatialProfile({PumpSample{center_mm, 1.0}});
}

FiberSpec::FiberSpec(double core_diameter_um_in, double numerical_aperture_in,
                     double wavelength_nm_in)
    : core_diameter_um(core_diameter_um_in),
      numerical_aperture(numerical_aperture_in),
      wavelength_nm(wavelength_nm_in) {
    if (!(core_diameter_um > 0.0) || !(numerical_aperture > 0.0) ||
        !(wavelength_nm > 0.0)) {
        throw std::invalid_argument("fiber parameters must be positive");
    }
    if (numerical_aperture >= 1.0) {
        throw std::invalid_argument("numerical aperture must be below 1");
    }
}

double fiber_mode_count(const FiberSpec& fiber) {
    const double d_nm = fiber.core_diameter_um * 1e3;
    const double v = kPi * d_nm * fiber.numerical_aperture / fiber.wavelength_nm;
    return v * v / 2.0;
}

DensityMatrix sagnac_output(const PumpSpatialProfile& pump,
                            const DistortionMap& distortion) {
    std::vector<std::pair<double, DensityMatrix>> components;
    components.reserve(pump.samples.size());
    for (const PumpSample& s : pump.samples) {
        const DistortionMap::Entry e = distortion.at(s.position_mm);
        components.emplace_back(s.weight,
                                x_state(XStateSpec(e.concurrence, wrap_phase(e.phi))));
    }
    return mix(components);
}

}  // namespace sagnacsim
