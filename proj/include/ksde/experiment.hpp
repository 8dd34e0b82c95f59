#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ksde/analysis.hpp"
#include "ksde/driver.hpp"
#include "ksde/io.hpp"
#include "ksde/parallel.hpp"
#include "ksde/schemes.hpp"
#include "ksde/timechange.hpp"

// Experiment orchestration behind the command-line runner: configuration,
// reproducible sampling campaigns with manifests, and named statistical
// checks with JSON reports.

namespace ksde {

inline constexpr const char* kVersion = "0.1.0";

// Rejects bad configuration and unknown keys (usage errors, exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class RunScheme { kTimeChange, kEm, kBoth };

inline std::string run_scheme_name(RunScheme s) {
    switch (s) {
        case RunScheme::kTimeChange: return "timechange";
        case RunScheme::kEm: return "em";
        default: return "both";
    }
}

inline RunScheme parse_run_scheme(const std::string& s) {
    if (s == "timechange") return RunScheme::kTimeChange;
    if (s == "em") return RunScheme::kEm;
    if (s == "both") return RunScheme::kBoth;
    throw ConfigError("unknown scheme '" + s + "' (expected timechange|em|both)");
}

struct ExperimentConfig {
    double alpha = -0.25;
    double x0 = 1.0;
    double y0 = 0.0;
    double horizon = 1.0;
    std::size_t steps = 1024;
    std::size_t paths = 10;
    std::uint64_t seed = 12345;
    RunScheme scheme = RunScheme::kTimeChange;
    std::optional<int> trunc_n;
    std::string out_dir = "ksde_out";
    bool allow_origin = false;
    bool zero_noise = false;

    // Keys set explicitly by the user (config file or flags); fields not in
    // here may be replaced by per-check defaults.
    std::set<std::string> explicit_keys;

    void mark(const std::string& key) { explicit_keys.insert(key); }
    bool is_set(const std::string& key) const { return explicit_keys.count(key) != 0; }

    void validate() const {
        if (!(alpha > -0.5)) throw ConfigError("alpha must be greater than -1/2");
        if (x0 == 0.0 && y0 == 0.0 && !(scheme == RunScheme::kEm && allow_origin))
            throw ConfigError("initial point (0,0) requires scheme=em and --allow-origin");
        if (steps < 2) throw ConfigError("steps must be at least 2");
        if (paths < 1) throw ConfigError("paths must be at least 1");
        if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
        if (trunc_n && *trunc_n < 1) throw ConfigError("trunc-n must be a positive integer");
        const bool uses_em = scheme == RunScheme::kEm || scheme == RunScheme::kBoth;
        if (uses_em && alpha < 0.0 && !trunc_n)
            throw ConfigError("Euler-Maruyama with alpha < 0 requires --trunc-n (coefficient floor)");
        const bool uses_tc = scheme == RunScheme::kTimeChange || scheme == RunScheme::kBoth;
        if (uses_tc && alpha > 0.0)
            throw ConfigError("the time-change sampler requires alpha in (-1/2, 0]; use scheme=em");
    }

    nlohmann::json to_json() const {
        nlohmann::json j{{"alpha", alpha}, {"x0", x0},     {"y0", y0},
                         {"horizon", horizon}, {"steps", steps}, {"paths", paths},
                         {"seed", seed}, {"scheme", run_scheme_name(scheme)},
                         {"out", out_dir}, {"allow_origin", allow_origin},
                         {"zero_noise", zero_noise}};
        if (trunc_n) j["trunc_n"] = *trunc_n;
        return j;
    }
};

inline void set_config_field(ExperimentConfig& c, const std::string& key, const std::string& value) {
    const auto as_double = [&] {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw ConfigError("bad numeric value for '" + key + "': " + value);
        return v;
    };
    const auto as_size = [&] {
        const double v = as_double();
        if (v < 0 || v != std::floor(v)) throw ConfigError("bad integer value for '" + key + "': " + value);
        return static_cast<std::size_t>(v);
    };
    const auto as_bool = [&] {
        if (value == "true" || value == "1") return true;
        if (value == "false" || value == "0") return false;
        throw ConfigError("bad boolean value for '" + key + "': " + value);
    };
    if (key == "alpha") c.alpha = as_double();
    else if (key == "x0") c.x0 = as_double();
    else if (key == "y0") c.y0 = as_double();
    else if (key == "horizon") c.horizon = as_double();
    else if (key == "steps") c.steps = as_size();
    else if (key == "paths") c.paths = as_size();
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(as_size());
    else if (key == "scheme") c.scheme = parse_run_scheme(value);
    else if (key == "trunc_n") c.trunc_n = static_cast<int>(as_size());
    else if (key == "out") c.out_dir = value;
    else if (key == "allow_origin") c.allow_origin = as_bool();
    else if (key == "zero_noise") c.zero_noise = as_bool();
    else throw ConfigError("unknown config key '" + key + "'");
    c.mark(key);
}

// Flat key = value format, '#' starts a comment.
inline void apply_config_file(ExperimentConfig& c, const std::filesystem::path& file) {
    const std::string text = io::read_file(file);
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(start, end - start);
        start = end + 1;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line without '=': " + line);
        set_config_field(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        if (end == text.size()) break;
    }
}

// Per-check defaults overlaid with whatever the user set explicitly.
inline ExperimentConfig merge_over(const ExperimentConfig& defaults, const ExperimentConfig& user) {
    ExperimentConfig out = defaults;
    out.explicit_keys = user.explicit_keys;
    if (user.is_set("alpha")) out.alpha = user.alpha;
    if (user.is_set("x0")) out.x0 = user.x0;
    if (user.is_set("y0")) out.y0 = user.y0;
    if (user.is_set("horizon")) out.horizon = user.horizon;
    if (user.is_set("steps")) out.steps = user.steps;
    if (user.is_set("paths")) out.paths = user.paths;
    if (user.is_set("seed")) out.seed = user.seed;
    if (user.is_set("scheme")) out.scheme = user.scheme;
    if (user.is_set("trunc_n")) out.trunc_n = user.trunc_n;
    if (user.is_set("out")) out.out_dir = user.out_dir;
    if (user.is_set("allow_origin")) out.allow_origin = user.allow_origin;
    if (user.is_set("zero_noise")) out.zero_noise = user.zero_noise;
    return out;
}

// --- sample campaign ---------------------------------------------------------

// Runs the configured campaign, writes one CSV per (path, scheme) plus a
// manifest listing every output with its SHA-256. Rerunning the same config
// reproduces every byte. Paths that hit the clock-horizon step cap are
// recorded under "cap_hits" and produce no file.
inline nlohmann::json run_sample(const ExperimentConfig& cfg) {
    cfg.validate();
    const Alpha a(cfg.alpha);
    const Phase p0{cfg.x0, cfg.y0};
    const TimeGrid grid = TimeGrid::uniform(cfg.horizon, cfg.steps);
    const std::optional<TruncationSpec> trunc =
        cfg.trunc_n ? std::optional<TruncationSpec>(TruncationSpec(*cfg.trunc_n)) : std::nullopt;

    struct PathOutput {
        std::string file;
        std::string csv;
        std::string scheme;
        bool cap_hit = false;
    };
    const bool do_tc = cfg.scheme != RunScheme::kEm;
    const bool do_em = cfg.scheme != RunScheme::kTimeChange;
    const std::size_t per_path = (do_tc ? 1u : 0u) + (do_em ? 1u : 0u);
    std::vector<PathOutput> outputs(cfg.paths * per_path);

    parallel_for(cfg.paths, [&](std::size_t i) {
        char name[64];
        std::size_t slot = i * per_path;
        if (do_tc) {
            PathOutput& o = outputs[slot++];
            std::snprintf(name, sizeof(name), per_path == 2 ? "path_%05zu_tc.csv" : "path_%05zu.csv", i);
            o.file = name;
            o.scheme = "timechange";
            WeakSamplerOptions opts;
            opts.zero_noise = cfg.zero_noise;
            try {
                o.csv = io::solution_csv(sample_weak_solution(p0, a, grid, cfg.seed, i, opts));
            } catch (const HorizonCapError&) {
                o.cap_hit = true;
            }
        }
        if (do_em) {
            PathOutput& o = outputs[slot++];
            std::snprintf(name, sizeof(name), per_path == 2 ? "path_%05zu_em.csv" : "path_%05zu.csv", i);
            o.file = name;
            o.scheme = "em";
            const DriverPath d = cfg.zero_noise ? zero_driver(grid) : sample_driver(grid, cfg.seed, i);
            o.csv = io::solution_csv(euler_maruyama(p0, a, d, trunc));
        }
    });

    const std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["version"] = kVersion;
    manifest["command"] = "sample";
    manifest["config"] = cfg.to_json();
    manifest["outputs"] = nlohmann::json::array();
    manifest["cap_hits"] = nlohmann::json::array();
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        const PathOutput& o = outputs[i];
        const std::size_t path_id = i / per_path;
        if (o.cap_hit) {
            manifest["cap_hits"].push_back({{"path_id", path_id}, {"scheme", o.scheme}});
            continue;
        }
        io::write_file(dir / o.file, o.csv);
        manifest["outputs"].push_back({{"file", o.file},
                                       {"path_id", path_id},
                                       {"stream_id", path_id},
                                       {"scheme", o.scheme},
                                       {"sha256", sha256_hex(o.csv)}});
    }
    io::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    return manifest;
}

// --- named checks ------------------------------------------------------------

struct CheckResult {
    std::string name;
    bool pass = false;
    nlohmann::json report;
};

namespace detail {

inline CheckResult check_roundtrip(const ExperimentConfig&) {
    const double alphas[] = {-0.49, -0.25, 0.0, 0.5, 1.0};
    double worst = 0.0;
    for (double av : alphas) {
        const Alpha a(av);
        for (int k = -6; k <= 6; ++k) {
            for (double sgn : {1.0, -1.0}) {
                const double x = sgn * std::pow(10.0, k);
                const double err = std::fabs(v_to_x(x_to_v(x, a), a) - x) / std::fmax(1.0, std::fabs(x));
                worst = std::fmax(worst, err);
            }
        }
    }
    CheckResult r;
    r.name = "roundtrip";
    r.pass = worst <= 1e-12;
    r.report = {{"max_scaled_error", worst}, {"threshold", 1e-12}};
    return r;
}

inline CheckResult check_qv(const ExperimentConfig& cfg) {
    const Alpha a(cfg.alpha);
    const Phase p0{cfg.x0, cfg.y0};
    const TimeGrid grid = TimeGrid::uniform(cfg.horizon, cfg.steps);
    WeakSamplerOptions opts;
    opts.s_oversample = 32;
    std::vector<double> qv_end(cfg.paths), int_end(cfg.paths);
    parallel_for(cfg.paths, [&](std::size_t i) {
        const SolutionPath sol = sample_weak_solution(p0, a, grid, cfg.seed, i, opts);
        qv_end[i] = realized_qv(sol.y).back();
        std::vector<double> f(sol.x.size());
        for (std::size_t k = 0; k < sol.x.size(); ++k) f[k] = pow_abs(sol.x[k], 2.0 * a.value());
        int_end[i] = cumtrapz(sol.grid.times, f).back();
    });
    const Estimate qv = mean_with_error(qv_end);
    const Estimate integral = mean_with_error(int_end);
    const double rel = std::fabs(qv.value - integral.value) / integral.value;
    CheckResult r;
    r.name = "qv";
    r.pass = rel <= 0.05;
    r.report = {{"realized_qv_mean", io::to_json(qv)},
                {"coefficient_integral_mean", io::to_json(integral)},
                {"relative_error", rel},
                {"threshold", 0.05}};
    return r;
}

inline CheckResult check_origin(const ExperimentConfig& cfg) {
    const Alpha a(cfg.alpha);
    const Phase p0{cfg.x0, cfg.y0};
    const TimeGrid grid = TimeGrid::uniform(cfg.horizon, cfg.steps);
    std::vector<SolutionPath> paths(cfg.paths);
    parallel_for(cfg.paths, [&](std::size_t i) {
        paths[i] = sample_weak_solution(p0, a, grid, cfg.seed, i);
    });
    const std::vector<double> eps = {1e-1, 1e-2, 1e-3};
    McSummary s = origin_proximity(paths, eps);
    std::vector<double> fracs;
    for (const auto& [k, e] : s.estimates) fracs.push_back(e.value);
    // Map keys sort as 1e-01, 1e-02, 1e-03: nested thresholds, so the
    // fractions must be non-increasing in that order.
    bool monotone = true;
    for (std::size_t i = 1; i < fracs.size(); ++i)
        if (fracs[i] > fracs[i - 1]) monotone = false;
    const double tightest = fracs.back();
    CheckResult r;
    r.name = "origin";
    r.pass = monotone && tightest < 0.01;
    r.report = {{"summary", io::to_json(s)}, {"threshold_at_1e-03", 0.01}, {"monotone", monotone}};
    return r;
}

inline CheckResult check_small_time(const ExperimentConfig& cfg) {
    const Alpha a(cfg.alpha);
    const Phase p0{cfg.x0, cfg.y0};
    const TimeGrid grid = TimeGrid::uniform(cfg.horizon, cfg.steps);
    std::vector<double> slopes(cfg.paths);
    parallel_for(cfg.paths, [&](std::size_t i) {
        const SolutionPath sol = euler_maruyama(p0, a, sample_driver(grid, cfg.seed, i),
                                                cfg.trunc_n ? std::optional<TruncationSpec>(TruncationSpec(*cfg.trunc_n))
                                                            : std::nullopt);
        slopes[i] = sol.x.back() / sol.grid.horizon();
    });
    const Estimate e = mean_with_error(slopes);
    const double dev = std::fabs(e.value - cfg.y0);
    CheckResult r;
    r.name = "small-time";
    r.pass = dev <= 3.0 * e.std_error;
    r.report = {{"mean_slope", io::to_json(e)},
                {"expected", cfg.y0},
                {"abs_deviation", dev},
                {"threshold", 3.0 * e.std_error}};
    return r;
}

inline CheckResult check_gronwall(const ExperimentConfig& cfg) {
    const Alpha a(cfg.alpha);
    const Phase p0{cfg.x0, cfg.y0};
    const TimeGrid grid = TimeGrid::uniform(cfg.horizon, cfg.steps);
    const TruncationSpec trunc(cfg.trunc_n.value_or(4));
    std::vector<SolutionPath> truncated(cfg.paths), plain(cfg.paths);
    parallel_for(cfg.paths, [&](std::size_t i) {
        const DriverPath d = sample_driver(grid, cfg.seed, i);
        truncated[i] = euler_maruyama(p0, a, d, trunc);
        plain[i] = euler_maruyama(p0, a, d, std::nullopt);
    });
    double window = grid.horizon();
    for (std::size_t i = 0; i < cfg.paths; ++i)
        if (const auto tau = first_exit_time(truncated[i], plain[i], trunc))
            window = std::fmin(window, *tau);
    const GapCurve gap = restrict_to(mean_square_gap(truncated, plain), window);
    const GronwallReport rep = gronwall_violation_check(gap, a, trunc);
    CheckResult r;
    r.name = "gronwall";
    r.pass = rep.verdict != GronwallVerdict::kViolated;
    r.report = {{"report", io::to_json(rep)}, {"window", window}, {"pairs", cfg.paths}};
    return r;
}

inline CheckResult check_ks_alpha0(const ExperimentConfig& cfg) {
    const Alpha a(0.0);
    const Phase p0{cfg.x0, cfg.y0};
    const TimeGrid grid = TimeGrid::uniform(cfg.horizon, cfg.steps);
    std::vector<double> sampled(cfg.paths), direct(cfg.paths);
    parallel_for(cfg.paths, [&](std::size_t i) {
        sampled[i] = sample_weak_solution(p0, a, grid, cfg.seed, i).x.back();
        const DriverPath d = sample_driver(grid, cfg.seed, cfg.paths + i);
        direct[i] = p0.x + p0.y * grid.horizon() + d.ib.back();
    });
    std::sort(sampled.begin(), sampled.end());
    std::sort(direct.begin(), direct.end());
    const KsResult ks = ks_two_sample(sampled, direct);
    CheckResult r;
    r.name = "ks-alpha0";
    r.pass = ks.p_value > 0.001;
    r.report = {{"statistic", ks.statistic}, {"p_value", ks.p_value}, {"threshold", 0.001}};
    return r;
}

}  // namespace detail

// Dispatch by check name; unknown names are usage errors. Defaults for each
// check mirror its reference configuration, with user-set fields on top.
inline CheckResult run_check(const std::string& name, const ExperimentConfig& user) {
    ExperimentConfig d;
    d.seed = 12345;
    CheckResult result;
    if (name == "roundtrip") {
        result = detail::check_roundtrip(user);
    } else if (name == "qv") {
        d.alpha = -0.25; d.x0 = 1.0; d.y0 = 0.0; d.horizon = 1.0; d.steps = 16384; d.paths = 100;
        result = detail::check_qv(merge_over(d, user));
    } else if (name == "origin") {
        d.alpha = -0.25; d.x0 = 1.0; d.y0 = 0.0; d.horizon = 5.0; d.steps = 4096; d.paths = 10000;
        result = detail::check_origin(merge_over(d, user));
    } else if (name == "small-time") {
        d.alpha = 0.75; d.x0 = 0.0; d.y0 = 1.0; d.horizon = 0x1p-10; d.steps = 16; d.paths = 1000;
        result = detail::check_small_time(merge_over(d, user));
    } else if (name == "gronwall") {
        d.alpha = 0.75; d.x0 = 0.0; d.y0 = 1.0; d.horizon = 1.0; d.steps = 1024; d.paths = 1000;
        d.trunc_n = 4;
        result = detail::check_gronwall(merge_over(d, user));
    } else if (name == "ks-alpha0") {
        d.alpha = 0.0; d.x0 = 1.0; d.y0 = 0.0; d.horizon = 1.0; d.steps = 64; d.paths = 10000;
        result = detail::check_ks_alpha0(merge_over(d, user));
    } else {
        throw ConfigError("unknown check '" + name +
                          "' (expected qv|origin|gronwall|small-time|ks-alpha0|roundtrip)");
    }
    result.report["check"] = result.name;
    result.report["pass"] = result.pass;
    return result;
}

}  // namespace ksde
