// io.hpp
// JSON serialization of density matrices and analysis reports. Matrix
// round-trips are exact: numbers are emitted with shortest-round-trip
// formatting, so parse(serialize(rho)) reproduces every double bit for bit.

#pragma once

#include <string>

#include "sagnacsim/qstate.hpp"

namespace sagnacsim {

// {"basis": ["HH","HV","VH","VV"], "elements": [[[re, im], ...], ...]}
std::string density_matrix_to_json(const DensityMatrix& rho, int indent = 2);
DensityMatrix density_matrix_from_json(const std::string& text);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

// FNV-1a 64-bit over raw bytes, as a 16-digit hex string; used to fingerprint
// scenario files in report provenance.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace sagnacsim
