#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ksde/driver.hpp"
#include "ksde/grid.hpp"
#include "ksde/transform.hpp"

// Weak-solution sampler for dX = Y dt, dY = |X|^a dB on -1/2 < a <= 0.
//
// Pipeline: from a driver (B, I) on an s-grid build the transformed
// coordinate v(s) = x_to_v(x0) + y0 s + I_s, integrate the clock
// T(s) = int_0^s clock_integrand(v) by composite trapezoid, invert T by its
// generalized (right-continuous) inverse, and read the solution off as
//
//     X_t = v_to_x(v(T^{-1}(t))),   Y_t = y0 + B(T^{-1}(t)).
//
// At a = 0 every stage degenerates exactly (identity transform, identity
// clock), so the sampler reproduces X_t = x0 + y0 t + I_t bitwise.

namespace ksde {

struct ClockPath {
    TimeGrid grid;                 // s-times
    std::vector<double> t_values;  // T(s) at grid times; T(0) = 0, non-decreasing
};

enum class Scheme { kTimeChange, kEulerMaruyama };

inline std::string scheme_name(Scheme s) {
    return s == Scheme::kTimeChange ? "timechange" : "em";
}

struct SolutionPath {
    TimeGrid grid;  // t-times
    std::vector<double> x;
    std::vector<double> y;
    Alpha alpha{0.0};
    Phase initial;
    Scheme scheme = Scheme::kTimeChange;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
};

// Raised when a query time lies beyond the simulated clock horizon.
struct ClockHorizonError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when horizon doubling hits the configured step cap.
struct HorizonCapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// v(s_k) = x_to_v(x0) + y0 s_k + I_{s_k} on the driver grid.
inline std::vector<double> build_v(const Phase& p0, const Alpha& a, const DriverPath& d) {
    const std::vector<double>& ts = d.grid.times;
    const double v0 = x_to_v(p0.x, a);
    std::vector<double> v(ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k)
        v[k] = v0 + p0.y * ts[k] + d.ib[k];
    return v;
}

// Composite trapezoid of the clock density along v. At a = 0 the density is
// identically one and T(s) = s is returned exactly (the grid times are
// copied instead of re-accumulated).
inline ClockPath compute_clock(const std::vector<double>& v, const TimeGrid& grid, const Alpha& a) {
    if (!a.in_timechange_range())
        throw std::domain_error("compute_clock: exponent outside (-1/2, 0]");
    if (v.size() != grid.size())
        throw std::invalid_argument("compute_clock: v/grid size mismatch");
    ClockPath clock;
    clock.grid = grid;
    if (a.is_zero()) {
        clock.t_values = grid.times;
        return clock;
    }
    clock.t_values.assign(v.size(), 0.0);
    double f_prev = clock_integrand(v[0], a);
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
        const double f_next = clock_integrand(v[k + 1], a);
        clock.t_values[k + 1] = clock.t_values[k]
            + 0.5 * (f_prev + f_next) * (grid.times[k + 1] - grid.times[k]);
        f_prev = f_next;
    }
    return clock;
}

// Generalized inverse T^{-1}(t) = inf{s : T(s) > t} by monotone
// piecewise-linear inversion. Right-continuous: a query equal to the level
// of a flat segment resolves to the segment's right endpoint. Queries must
// be sorted; a query above T(s_max) throws ClockHorizonError.
inline std::vector<double> invert_clock(const ClockPath& clock, const std::vector<double>& t_query) {
    const std::vector<double>& tv = clock.t_values;
    const std::vector<double>& sv = clock.grid.times;
    const std::size_t n = tv.size();
    std::vector<double> out(t_query.size());
    std::size_t j = 0;
    for (std::size_t q = 0; q < t_query.size(); ++q) {
        const double t = t_query[q];
        if (q > 0 && t < t_query[q - 1])
            throw std::invalid_argument("invert_clock: queries must be sorted");
        if (t < 0.0) throw std::invalid_argument("invert_clock: negative query");
        while (j + 1 < n && tv[j + 1] <= t) ++j;  // j = last index with T <= t
        if (tv[j] == t) {
            out[q] = sv[j];
            continue;
        }
        if (j + 1 == n)
            throw ClockHorizonError("invert_clock: query beyond simulated horizon");
        const double w = (t - tv[j]) / (tv[j + 1] - tv[j]);
        out[q] = sv[j] + w * (sv[j + 1] - sv[j]);
    }
    return out;
}

// Assemble the solution on t_grid from a driver whose clock already covers
// the requested horizon; throws ClockHorizonError otherwise. This is the
// injection point for coupling experiments and zero-noise tests.
inline SolutionPath weak_solution_from_driver(const Phase& p0, const Alpha& a,
                                              const TimeGrid& t_grid, const DriverPath& d) {
    t_grid.validate();
    if (p0.is_origin())
        throw std::invalid_argument("weak_solution_from_driver: initial point must not be the origin");
    const std::vector<double> v = build_v(p0, a, d);
    const ClockPath clock = compute_clock(v, d.grid, a);
    if (clock.t_values.back() < t_grid.horizon())
        throw ClockHorizonError("weak_solution_from_driver: clock does not reach the horizon");
    const std::vector<double> s_star = invert_clock(clock, t_grid.times);

    SolutionPath sol;
    sol.grid = t_grid;
    sol.alpha = a;
    sol.initial = p0;
    sol.scheme = Scheme::kTimeChange;
    sol.seed = d.seed;
    sol.stream_id = d.stream_id;
    sol.x.resize(t_grid.size());
    sol.y.resize(t_grid.size());
    std::size_t hv = 0, hb = 0;
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        sol.x[k] = v_to_x(lerp_at(d.grid.times, v, s_star[k], hv), a);
        sol.y[k] = p0.y + lerp_at(d.grid.times, d.b, s_star[k], hb);
    }
    sol.x[0] = p0.x;
    sol.y[0] = p0.y;
    return sol;
}

struct WeakSamplerOptions {
    // Each t-grid interval is split into this many s-grid intervals.
    // Functionals sensitive to the fine structure of Y (realized quadratic
    // variation) want 16-32; pathwise X/Y values are fine with 1.
    std::size_t s_oversample = 1;
    // Hard cap on driver steps during horizon doubling.
    std::size_t max_driver_steps = std::size_t{1} << 20;
    // Replace the driver by the zero path (deterministic skeleton).
    bool zero_noise = false;
};

// Full sampler: builds the driver on an s-grid matching t_grid, then doubles
// the s-horizon (appending increments, never re-drawing the past) until the
// clock covers the requested horizon or the step cap is hit.
inline SolutionPath sample_weak_solution(const Phase& p0, const Alpha& a, const TimeGrid& t_grid,
                                         std::uint64_t seed, std::uint64_t stream_id,
                                         const WeakSamplerOptions& opts = {}) {
    t_grid.validate();
    if (p0.is_origin())
        throw std::invalid_argument("sample_weak_solution: initial point must not be the origin");
    if (!a.in_timechange_range())
        throw std::domain_error("sample_weak_solution: exponent outside (-1/2, 0]");
    if (opts.s_oversample < 1)
        throw std::invalid_argument("sample_weak_solution: oversample factor must be >= 1");

    // Base s-grid: t_grid itself (bitwise, when oversample == 1) or each
    // t-interval split evenly. t-nodes stay s-nodes either way.
    std::vector<double> s_times;
    s_times.reserve((t_grid.size() - 1) * opts.s_oversample + 1);
    s_times.push_back(0.0);
    for (std::size_t k = 0; k + 1 < t_grid.size(); ++k) {
        const double t0 = t_grid.times[k], t1 = t_grid.times[k + 1];
        for (std::size_t j = 1; j < opts.s_oversample; ++j)
            s_times.push_back(t0 + (t1 - t0) * (static_cast<double>(j) / static_cast<double>(opts.s_oversample)));
        s_times.push_back(t1);
    }

    const double dt_ext = s_times.back() - s_times[s_times.size() - 2];
    for (;;) {
        TimeGrid s_grid(s_times);
        const DriverPath d = opts.zero_noise ? zero_driver(s_grid)
                                             : sample_driver(s_grid, seed, stream_id);
        try {
            SolutionPath sol = weak_solution_from_driver(p0, a, t_grid, d);
            sol.seed = seed;
            sol.stream_id = stream_id;
            return sol;
        } catch (const ClockHorizonError&) {
            const std::size_t n_steps = s_times.size() - 1;
            if (2 * n_steps > opts.max_driver_steps)
                throw HorizonCapError("sample_weak_solution: horizon doubling exceeded the step cap");
            const double s_end = s_times.back();
            s_times.reserve(2 * n_steps + 1);
            for (std::size_t j = 1; j <= n_steps; ++j)
                s_times.push_back(s_end + static_cast<double>(j) * dt_ext);
        }
    }
}

}  // namespace ksde
