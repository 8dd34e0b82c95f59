#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ksde/grid.hpp"
#include "ksde/rng.hpp"

// Exact joint sampling of a standard Brownian motion B and its running
// integral I_t = int_0^t B_s ds on a grid. Over a step of length dt, the
// pair (dB, dI - B dt) is centered Gaussian with covariance
//
//     [ dt      dt^2/2 ]
//     [ dt^2/2  dt^3/3 ],
//
// sampled exactly through its Cholesky factor, so the driver carries no
// integration bias at any resolution.

namespace ksde {

struct DriverPath {
    TimeGrid grid;
    std::vector<double> b;   // B at grid times, b[0] = 0
    std::vector<double> ib;  // \int_0^t B_s ds at grid times, ib[0] = 0
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
};

struct WienerIncrement {
    double db;  // B increment
    double dj;  // integral increment minus B_left * dt
};

// Cholesky of the joint covariance; (0, 0) exactly when dt == 0.
inline WienerIncrement joint_increment(double dt, double z0, double z1) {
    const double s = std::sqrt(dt);
    const double db = s * z0;
    const double dj = 0.5 * dt * s * (z0 + z1 * 0.57735026918962576451);  // 1/sqrt(3)
    return WienerIncrement{db, dj};
}

// Lane assignment within a (stream, counter) cell. Lanes 0/1 feed the base
// increments; lanes 2/3 are reserved for bridge refinement so refining never
// collides with extending.
inline constexpr std::uint64_t kLaneIncrement = 0;
inline constexpr std::uint64_t kLaneBridge = 2;

// Deterministic function of (seed, stream_id, grid): step k consumes
// counter k, so extending a grid forward reproduces the old steps bitwise.
inline DriverPath sample_driver(const TimeGrid& grid, std::uint64_t seed, std::uint64_t stream_id) {
    grid.validate();
    const std::size_t n = grid.size();
    DriverPath out;
    out.grid = grid;
    out.seed = seed;
    out.stream_id = stream_id;
    out.b.assign(n, 0.0);
    out.ib.assign(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double dt = grid.times[k + 1] - grid.times[k];
        const NormalPair z = normal_pair(seed, stream_id, k, kLaneIncrement);
        const WienerIncrement inc = joint_increment(dt, z.z0, z.z1);
        out.b[k + 1] = out.b[k] + inc.db;
        out.ib[k + 1] = out.ib[k] + out.b[k] * dt + inc.dj;
    }
    return out;
}

// Identically-zero driver (for deterministic-skeleton runs and tests).
inline DriverPath zero_driver(const TimeGrid& grid) {
    grid.validate();
    DriverPath out;
    out.grid = grid;
    out.b.assign(grid.size(), 0.0);
    out.ib.assign(grid.size(), 0.0);
    return out;
}

// Conditional bridge refinement onto a finer grid containing the original
// one. Values at original nodes are kept. Inserted nodes are drawn from the
// conditional law of the PAIR (B, I) given the running left state and the
// coarse right endpoint: conditioning on B alone would leave the cell's
// integral a fresh draw (conditional variance h^3/12 per cell, however fine
// the refinement), and re-integrating the refined B could never recover ib.
// Marginally over I the inserted B still follows the familiar Brownian
// bridge law.
//
// With increments W_s = B - B_left, J_s = I - I_left - B_left s relative to
// the left state, constrained by (w, j) at s = h and written in r = tau/h:
//
//   E[W_tau]  = r(3r-2) w + 6 r(1-r)/h j
//   E[J_tau]  = -h r^2(1-r) w + r^2(3-2r) j
//   Cov       = [[ h r(1-r)(1-3r+3r^2),    h^2 r^2(1-r)^2(1-2r)/2 ],
//                [        .           ,    h^3 r^3(1-r)^3/3       ]]
//
// (det = h^4 r^4 (1-r)^4 / 12, positive on 0 < r < 1).
inline DriverPath refine_driver(const DriverPath& path, const TimeGrid& fine, std::uint64_t seed) {
    fine.validate();
    if (!fine.contains(path.grid))
        throw std::invalid_argument("refine_driver: new grid does not contain the original grid");
    if (fine.times == path.grid.times) return path;

    const std::size_t n = fine.size();
    DriverPath out;
    out.grid = fine;
    out.seed = path.seed;
    out.stream_id = path.stream_id;
    out.b.assign(n, 0.0);
    out.ib.assign(n, 0.0);

    std::size_t ci = 0;  // index into the coarse grid
    double left_t = path.grid.times[0];
    double left_b = path.b[0];
    double left_i = path.ib[0];
    for (std::size_t i = 0; i < n; ++i) {
        const double t = fine.times[i];
        if (ci < path.grid.size() && path.grid.times[ci] == t) {
            out.b[i] = path.b[ci];
            out.ib[i] = path.ib[ci];
            left_t = t;
            left_b = path.b[ci];
            left_i = path.ib[ci];
            ++ci;
            continue;
        }
        const double right_t = path.grid.times[ci];
        const double h = right_t - left_t;
        const double w = path.b[ci] - left_b;
        const double j = path.ib[ci] - left_i - left_b * h;
        const double tau = t - left_t;
        const double r = tau / h;
        const double omr = 1.0 - r;

        const double mean_w = r * (3.0 * r - 2.0) * w + 6.0 * r * omr / h * j;
        const double mean_j = -h * r * r * omr * w + r * r * (3.0 - 2.0 * r) * j;
        const double c11 = h * r * omr * (1.0 - 3.0 * r + 3.0 * r * r);
        const double c12 = 0.5 * h * h * r * r * omr * omr * (1.0 - 2.0 * r);
        const double l11 = std::sqrt(c11);
        const double l21 = c12 / l11;
        // L22^2 = det / C11 with det = h^4 r^4 (1-r)^4 / 12.
        const double l22 = h * h * r * r * omr * omr / std::sqrt(12.0 * c11);

        const NormalPair z = normal_pair(seed, path.stream_id, i, kLaneBridge);
        const double w_tau = mean_w + l11 * z.z0;
        const double j_tau = mean_j + l21 * z.z0 + l22 * z.z1;
        out.b[i] = left_b + w_tau;
        out.ib[i] = left_i + left_b * tau + j_tau;
        left_t = t;
        left_b = out.b[i];
        left_i = out.ib[i];
    }
    return out;
}

}  // namespace ksde
