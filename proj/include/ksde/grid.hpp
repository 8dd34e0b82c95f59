#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ksde {

// Sampling times shared by driver and solution paths. times[0] must be 0
// and the sequence strictly increasing.
struct TimeGrid {
    std::vector<double> times;

    TimeGrid() = default;
    explicit TimeGrid(std::vector<double> ts) : times(std::move(ts)) {}

    // n_steps intervals over [0, horizon]; nodes are horizon * (i / n_steps),
    // exact for dyadic step counts.
    static TimeGrid uniform(double horizon, std::size_t n_steps) {
        if (!(horizon > 0.0)) throw std::invalid_argument("TimeGrid::uniform: horizon must be positive");
        if (n_steps < 1) throw std::invalid_argument("TimeGrid::uniform: need at least one step");
        std::vector<double> ts(n_steps + 1);
        for (std::size_t i = 0; i <= n_steps; ++i)
            ts[i] = horizon * (static_cast<double>(i) / static_cast<double>(n_steps));
        ts[0] = 0.0;
        ts[n_steps] = horizon;
        return TimeGrid(std::move(ts));
    }

    std::size_t size() const { return times.size(); }
    std::size_t n_steps() const { return times.empty() ? 0 : times.size() - 1; }
    double horizon() const { return times.empty() ? 0.0 : times.back(); }

    void validate() const {
        if (times.size() < 2) throw std::invalid_argument("TimeGrid: need at least two nodes");
        if (times.front() != 0.0) throw std::invalid_argument("TimeGrid: must start at t = 0");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1]))
                throw std::invalid_argument("TimeGrid: times must be strictly increasing");
    }

    // True if every node of `coarse` appears (exactly) in this grid.
    bool contains(const TimeGrid& coarse) const {
        std::size_t j = 0;
        for (double t : coarse.times) {
            while (j < times.size() && times[j] < t) ++j;
            if (j == times.size() || times[j] != t) return false;
        }
        return true;
    }

    bool operator==(const TimeGrid&) const = default;
};

// Piecewise-linear interpolation of (ts, vs) at t, with a monotone search
// hint for sorted query sequences. Exact (bitwise) at grid nodes.
inline double lerp_at(const std::vector<double>& ts, const std::vector<double>& vs,
                      double t, std::size_t& hint) {
    const std::size_t n = ts.size();
    if (hint >= n - 1) hint = n - 2;
    while (hint > 0 && t < ts[hint]) --hint;
    while (hint + 2 < n && ts[hint + 1] <= t) ++hint;
    if (t == ts[hint]) return vs[hint];
    if (t == ts[hint + 1]) return vs[hint + 1];
    const double w = (t - ts[hint]) / (ts[hint + 1] - ts[hint]);
    return vs[hint] + w * (vs[hint + 1] - vs[hint]);
}

inline double lerp_at(const std::vector<double>& ts, const std::vector<double>& vs, double t) {
    std::size_t hint = 0;
    return lerp_at(ts, vs, t, hint);
}

// Cumulative composite trapezoid of f against ts; result[0] = 0.
inline std::vector<double> cumtrapz(const std::vector<double>& ts, const std::vector<double>& f) {
    if (ts.size() != f.size()) throw std::invalid_argument("cumtrapz: size mismatch");
    std::vector<double> out(ts.size(), 0.0);
    for (std::size_t k = 0; k + 1 < ts.size(); ++k)
        out[k + 1] = out[k] + 0.5 * (f[k] + f[k + 1]) * (ts[k + 1] - ts[k]);
    return out;
}

}  // namespace ksde
