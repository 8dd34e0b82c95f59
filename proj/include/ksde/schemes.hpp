#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "ksde/driver.hpp"
#include "ksde/timechange.hpp"
#include "ksde/transform.hpp"

// Euler-Maruyama baseline for dX = Y dt, dY = |X|^a dB, with an optional
// truncation that freezes the Y-update once the state leaves the l-infinity
// band [2^-n, 2^n] while X keeps integrating Y. Coupling across schemes and
// resolutions is by sharing the DriverPath.

namespace ksde {

// Exit band [2^-n, 2^n]; both radii are exact powers of two.
struct TruncationSpec {
    int n = 1;

    explicit TruncationSpec(int level) : n(level) {
        if (level < 1) throw std::invalid_argument("TruncationSpec: level must be a positive integer");
    }

    double inner() const { return std::ldexp(1.0, -n); }
    double outer() const { return std::ldexp(1.0, n); }

    bool outside(double x, double y) const {
        const double r = linf_norm(x, y);
        return r <= inner() || r >= outer();
    }
};

// Diffusion coefficient |x|^a with a floor for negative exponents:
// returns floor_radius^a when a < 0 and |x| < floor_radius. For a > 0 the
// coefficient vanishes at x = 0; a = 0 gives 1 identically.
inline double diffusion_coefficient(double x, const Alpha& a, double floor_radius) {
    if (floor_radius < 0.0)
        throw std::invalid_argument("diffusion_coefficient: floor must be nonnegative");
    if (a.is_zero()) return 1.0;
    const double ax = std::fabs(x);
    if (a.value() > 0.0)
        return ax == 0.0 ? 0.0 : pow_abs(x, a.value());
    if (ax >= floor_radius && ax >= kPowAbsGuard)
        return pow_abs(x, a.value());
    if (floor_radius == 0.0)
        throw std::domain_error("diffusion_coefficient: negative exponent at zero with no floor");
    return pow_abs(floor_radius, a.value());
}

// Explicit scheme on the driver grid:
//
//     X_{k+1} = X_k + Y_k dt
//     Y_{k+1} = Y_k + |X_k|^a 1[t_k <= tau] dB_k
//
// where tau is the first grid time at which (X, Y) leaves the truncation
// band. The increment at the exit step itself is still applied; afterwards
// Y is frozen and X continues as the integral of the (now constant) Y. For
// a < 0 a truncation is mandatory and its inner radius doubles as the
// coefficient floor.
inline SolutionPath euler_maruyama(const Phase& p0, const Alpha& a, const DriverPath& d,
                                   std::optional<TruncationSpec> trunc = std::nullopt) {
    d.grid.validate();
    if (a.value() < 0.0 && !trunc)
        throw std::invalid_argument("euler_maruyama: negative exponent requires a truncation (coefficient floor)");

    const std::size_t n = d.grid.size();
    const double floor_radius = trunc ? trunc->inner() : 0.0;

    SolutionPath sol;
    sol.grid = d.grid;
    sol.alpha = a;
    sol.initial = p0;
    sol.scheme = Scheme::kEulerMaruyama;
    sol.seed = d.seed;
    sol.stream_id = d.stream_id;
    sol.x.assign(n, 0.0);
    sol.y.assign(n, 0.0);
    sol.x[0] = p0.x;
    sol.y[0] = p0.y;

    bool exited = false;
    std::size_t exit_idx = 0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (trunc && !exited && trunc->outside(sol.x[k], sol.y[k])) {
            exited = true;
            exit_idx = k;
        }
        const double dt = d.grid.times[k + 1] - d.grid.times[k];
        const double db = d.b[k + 1] - d.b[k];
        const bool apply = !exited || k <= exit_idx;
        sol.x[k + 1] = sol.x[k] + sol.y[k] * dt;
        sol.y[k + 1] = sol.y[k] + (apply ? diffusion_coefficient(sol.x[k], a, floor_radius) : 0.0) * db;
    }
    return sol;
}

}  // namespace ksde
