#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "gmmflow/distance.hpp"
#include "gmmflow/energy.hpp"
#include "gmmflow/flow.hpp"
#include "gmmflow/grid.hpp"
#include "gmmflow/verify.hpp"

namespace gmm {

using json = nlohmann::json;

/// Writes a label field as binary PGM (P5, maxval 255, pixel = label) with a
/// JSON sidecar <path>.json carrying spacing and phase count.
inline void save_label_field(const LabelField& f, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_label_field: cannot open " + path.string());
    os << "P5\n" << f.spec.width << " " << f.spec.height << "\n255\n";
    os.write(reinterpret_cast<const char*>(f.labels.data()), static_cast<std::streamsize>(f.labels.size()));
    json meta = {{"h", f.spec.h}, {"num_bounded", f.num_bounded},
                 {"width", f.spec.width}, {"height", f.spec.height}};
    std::ofstream ms(path.string() + ".json");
    ms << meta.dump(2) << "\n";
}

inline LabelField load_label_field(const std::filesystem::path& path) {
    std::ifstream ms(path.string() + ".json");
    if (!ms) throw std::runtime_error("load_label_field: missing sidecar for " + path.string());
    json meta = json::parse(ms);
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_label_field: cannot open " + path.string());
    std::string magic;
    is >> magic;
    if (magic != "P5") throw std::runtime_error("load_label_field: not a P5 PGM");
    int w, h, maxval;
    is >> w >> h >> maxval;
    is.get();  // single whitespace after header
    if (w != meta.at("width").get<int>() || h != meta.at("height").get<int>())
        throw std::runtime_error("load_label_field: sidecar/PGM size mismatch");
    LabelField f(GridSpec(w, h, meta.at("h").get<double>()), meta.at("num_bounded").get<int>());
    is.read(reinterpret_cast<char*>(f.labels.data()), static_cast<std::streamsize>(f.labels.size()));
    if (!is) throw std::runtime_error("load_label_field: truncated PGM");
    f.validate();
    return f;
}

/// Row-major CSV, 17 significant digits.
inline void save_signed_field(const SignedField& f, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_signed_field: cannot open " + path.string());
    os << std::setprecision(17);
    for (int j = 0; j < f.spec.height; ++j) {
        for (int i = 0; i < f.spec.width; ++i) {
            if (i) os << ",";
            os << f.at(i, j);
        }
        os << "\n";
    }
}

inline SignedField load_signed_field(const std::filesystem::path& path, const GridSpec& spec) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_signed_field: cannot open " + path.string());
    SignedField f;
    f.spec = spec;
    f.values.reserve(static_cast<std::size_t>(spec.cells()));
    std::string line;
    while (std::getline(is, line)) {
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) f.values.push_back(std::stod(tok));
    }
    if (static_cast<int>(f.values.size()) != spec.cells())
        throw std::runtime_error("load_signed_field: cell count mismatch");
    return f;
}

inline json to_json(const EnergyBreakdown& e) {
    return {{"perimeter", e.perimeter}, {"transport", e.transport}, {"forcing", e.forcing},
            {"lambda", e.lambda},       {"total", e.total}};
}

inline json to_json(const VerifierReport& rep) {
    json measured = json::array();
    for (const auto& m : rep.measured)
        measured.push_back({{"quantity", m.quantity}, {"value", m.value}, {"bound", m.bound},
                            {"slack", m.slack}, {"upper", m.upper}, {"ok", m.ok()},
                            {"context", m.context}});
    return {{"name", rep.name}, {"pass", rep.pass}, {"measured", measured}, {"skipped", rep.skipped}};
}

/// FNV-1a, for config provenance hashes.
inline std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

}  // namespace gmm
