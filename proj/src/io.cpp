#include "sagnacsim/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sagnacsim {

using nlohmann::json;

std::string density_matrix_to_json(const DensityMatrix& rho, int indent) {
    json elements = json::array();
    for (int i = 0; i < 4; ++i) {
        json row = json::array();
        for (int j = 0; j < 4; ++j) {
            const std::complex<double> z = rho(i, j);
            row.push_back(json::array({z.real(), z.imag()}));
        }
        elements.push_back(row);
    }
    json doc;
    doc["basis"] = {"HH", "HV", "VH", "VV"};
    doc["elements"] = elements;
    return doc.dump(indent);
}

DensityMatrix density_matrix_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("density matrix JSON: ") + e.what());
    }
    const json expected_basis = {"HH", "HV", "VH", "VV"};
    if (!doc.contains("basis") || doc["basis"] != expected_basis) {
        throw std::invalid_argument("density matrix JSON: basis must be [HH, HV, VH, VV]");
    }
    if (!doc.contains("elements") || !doc["elements"].is_array() ||
        doc["elements"].size() != 4) {
        throw std::invalid_argument("density matrix JSON: elements must be a 4x4 array");
    }
    Eigen::Matrix4cd m;
    for (int i = 0; i < 4; ++i) {
        const json& row = doc["elements"][i];
        if (!row.is_array() || row.size() != 4) {
            throw std::invalid_argument("density matrix JSON: elements must be a 4x4 array");
        }
        for (int j = 0; j < 4; ++j) {
            const json& cell = row[j];
            if (!cell.is_array() || cell.size() != 2 || !cell[0].is_number() ||
                !cell[1].is_number()) {
                throw std::invalid_argument(
                    "density matrix JSON: each element must be a [re, im] pair");
            }
            m(i, j) = std::complex<double>(cell[0].get<double>(), cell[1].get<double>());
        }
    }
    return DensityMatrix(m);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open file for writing: " + path);
    }
    out << text;
    if (!out) {
        throw std::runtime_error("failed writing file: " + path);
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open file for reading: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace sagnacsim
