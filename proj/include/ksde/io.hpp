#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "ksde/analysis.hpp"
#include "ksde/sha256.hpp"
#include "ksde/timechange.hpp"

namespace ksde::io {

// 17 significant digits: lossless round trip for doubles, locale-free.
inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string solution_csv(const SolutionPath& p) {
    std::string out = "t,x,y\n";
    for (std::size_t k = 0; k < p.grid.size(); ++k) {
        out += format_double(p.grid.times[k]);
        out += ',';
        out += format_double(p.x[k]);
        out += ',';
        out += format_double(p.y[k]);
        out += '\n';
    }
    return out;
}

inline void write_file(const std::filesystem::path& file, const std::string& content) {
    std::ofstream os(file, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + file.string());
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw std::runtime_error("write failed: " + file.string());
}

inline std::string read_file(const std::filesystem::path& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open for reading: " + file.string());
    std::string content((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return content;
}

inline std::string sha256_file(const std::filesystem::path& file) {
    return sha256_hex(read_file(file));
}

inline nlohmann::json to_json(const Estimate& e) {
    return nlohmann::json{{"value", e.value}, {"std_error", e.std_error}};
}

inline nlohmann::json to_json(const McSummary& s, bool include_cdfs = false) {
    nlohmann::json j;
    j["n_paths"] = s.n_paths;
    for (const auto& [name, est] : s.estimates) j["estimates"][name] = to_json(est);
    if (include_cdfs)
        for (const auto& [name, cdf] : s.empirical_cdfs) j["empirical_cdfs"][name] = cdf;
    return j;
}

inline nlohmann::json to_json(const GronwallReport& r) {
    return nlohmann::json{{"verdict", gronwall_verdict_name(r.verdict)},
                          {"min_margin", r.min_margin},
                          {"t_at_min", r.t_at_min},
                          {"se_at_min", r.se_at_min},
                          {"n_times", r.n_times}};
}

}  // namespace ksde::io
