#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ksde/schemes.hpp"
#include "ksde/timechange.hpp"
#include "ksde/transform.hpp"

// Path statistics and diagnostic checks: exit/zero-hitting times, coupled
// mean-square gaps, small-time slope, the Gronwall-type one-sided bound,
// realized quadratic variation, two-sample Kolmogorov-Smirnov, and origin
// proximity summaries.

namespace ksde {

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

struct McSummary {
    std::size_t n_paths = 0;
    std::map<std::string, Estimate> estimates;
    std::map<std::string, std::vector<double>> empirical_cdfs;  // sorted samples
};

inline Estimate mean_with_error(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    if (n == 0) throw std::invalid_argument("mean_with_error: empty sample");
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(n);
    if (n < 2) return Estimate{m, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    return Estimate{m, sd / std::sqrt(static_cast<double>(n))};
}

// --- stopping times ---------------------------------------------------------

// First grid time at which the l-infinity norm leaves [2^-n, 2^n];
// nullopt if the path never exits within its horizon.
inline std::optional<double> first_exit_time(const SolutionPath& p, const TruncationSpec& trunc) {
    for (std::size_t k = 0; k < p.grid.size(); ++k)
        if (trunc.outside(p.x[k], p.y[k])) return p.grid.times[k];
    return std::nullopt;
}

// Pairwise variant: exit when the smaller norm drops to 2^-n or the larger
// one reaches 2^n.
inline std::optional<double> first_exit_time(const SolutionPath& p1, const SolutionPath& p2,
                                             const TruncationSpec& trunc) {
    if (p1.grid.times != p2.grid.times)
        throw std::invalid_argument("first_exit_time: grids differ");
    for (std::size_t k = 0; k < p1.grid.size(); ++k) {
        const double r1 = linf_norm(p1.x[k], p1.y[k]);
        const double r2 = linf_norm(p2.x[k], p2.y[k]);
        if (std::fmin(r1, r2) <= trunc.inner() || std::fmax(r1, r2) >= trunc.outer())
            return p1.grid.times[k];
    }
    return std::nullopt;
}

// Times where the position component hits zero: grid points with x exactly 0
// count as crossings, sign changes are refined to the linear root of the
// bracketing step. Strictly increasing output.
inline std::vector<double> zero_crossing_times(const SolutionPath& p) {
    std::vector<double> out;
    for (std::size_t k = 0; k < p.x.size(); ++k) {
        if (p.x[k] == 0.0) {
            out.push_back(p.grid.times[k]);
            continue;
        }
        if (k + 1 < p.x.size()) {
            const bool flips = (p.x[k] > 0.0 && p.x[k + 1] < 0.0) || (p.x[k] < 0.0 && p.x[k + 1] > 0.0);
            if (flips) {
                const double t0 = p.grid.times[k], t1 = p.grid.times[k + 1];
                out.push_back(t0 + (t1 - t0) * (p.x[k] / (p.x[k] - p.x[k + 1])));
            }
        }
    }
    return out;
}

// --- coupled gap curve ------------------------------------------------------

struct GapCurve {
    std::vector<double> t;
    std::vector<double> mean;  // mean of (X^1_t - X^2_t)^2 across pairs
    std::vector<double> se;
};

// Mean squared X-gap between two coupled path collections (same driver per
// index, same grids).
inline GapCurve mean_square_gap(const std::vector<SolutionPath>& a, const std::vector<SolutionPath>& b) {
    if (a.empty() || a.size() != b.size())
        throw std::invalid_argument("mean_square_gap: collections must be non-empty and equally sized");
    const TimeGrid& g = a[0].grid;
    for (const auto& p : a)
        if (p.grid.times != g.times) throw std::invalid_argument("mean_square_gap: grid mismatch");
    for (const auto& p : b)
        if (p.grid.times != g.times) throw std::invalid_argument("mean_square_gap: grid mismatch");

    GapCurve c;
    c.t = g.times;
    c.mean.resize(g.size());
    c.se.resize(g.size());
    std::vector<double> sample(a.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = a[i].x[k] - b[i].x[k];
            sample[i] = d * d;
        }
        const Estimate e = mean_with_error(sample);
        c.mean[k] = e.value;
        c.se[k] = e.std_error;
    }
    return c;
}

inline GapCurve restrict_to(const GapCurve& c, double t_max) {
    GapCurve out;
    for (std::size_t k = 0; k < c.t.size() && c.t[k] <= t_max; ++k) {
        out.t.push_back(c.t[k]);
        out.mean.push_back(c.mean[k]);
        out.se.push_back(c.se[k]);
    }
    return out;
}

// --- small-time slope -------------------------------------------------------

// X at the first positive grid time divided by that time; converges to y0
// under grid refinement when x0 = 0.
inline double small_time_slope(const SolutionPath& p) {
    if (p.grid.size() < 2 || !(p.grid.times[1] > 0.0))
        throw std::invalid_argument("small_time_slope: degenerate grid");
    return p.x[1] / p.grid.times[1];
}

// --- Gronwall-type one-sided check ------------------------------------------

enum class GronwallVerdict { kHolds, kInconclusive, kViolated };

inline std::string gronwall_verdict_name(GronwallVerdict v) {
    switch (v) {
        case GronwallVerdict::kHolds: return "holds";
        case GronwallVerdict::kInconclusive: return "inconclusive";
        default: return "violated";
    }
}

struct GronwallReport {
    GronwallVerdict verdict = GronwallVerdict::kHolds;
    double min_margin = 0.0;  // min over the grid of RHS - LHS
    double t_at_min = 0.0;
    double se_at_min = 0.0;
    std::size_t n_times = 0;
};

// Evaluates D_t <= |a| 2^{-n(a-1)} t^2 \int_0^t r^{2a-2} D_r dr on the gap
// curve (trapezoid for the right side) and reports the worst margin. The
// check is one-sided and statistical: a negative margin inside the 3-sigma
// band is "inconclusive", beyond it "violated". The weight at r = 0 is
// defined as 0, which requires D_0 = 0 (coupled starts) when 2a - 2 < 0.
inline GronwallReport gronwall_violation_check(const GapCurve& c, const Alpha& a,
                                               const TruncationSpec& trunc) {
    if (c.t.size() < 2) throw std::invalid_argument("gronwall_violation_check: curve too short");
    const double expo = 2.0 * a.value() - 2.0;
    if (expo < 0.0 && c.mean[0] != 0.0)
        throw std::invalid_argument("gronwall_violation_check: gap curve must start at zero");
    const double constant = std::fabs(a.value()) * std::exp2(-static_cast<double>(trunc.n) * (a.value() - 1.0));

    std::vector<double> wd(c.t.size()), wse(c.t.size());
    for (std::size_t k = 0; k < c.t.size(); ++k) {
        const double w = (c.t[k] == 0.0 && expo < 0.0) ? 0.0 : pow_abs(c.t[k], expo);
        wd[k] = w * c.mean[k];
        wse[k] = w * (k < c.se.size() ? c.se[k] : 0.0);
    }
    const std::vector<double> integral = cumtrapz(c.t, wd);
    const std::vector<double> integral_se = cumtrapz(c.t, wse);

    GronwallReport rep;
    rep.n_times = c.t.size();
    bool any_negative = false, any_significant = false;
    bool first = true;
    for (std::size_t k = 1; k < c.t.size(); ++k) {
        const double t = c.t[k];
        const double rhs = constant * t * t * integral[k];
        const double margin = rhs - c.mean[k];
        const double se = (k < c.se.size() ? c.se[k] : 0.0) + constant * t * t * integral_se[k];
        if (first || margin < rep.min_margin) {
            rep.min_margin = margin;
            rep.t_at_min = t;
            rep.se_at_min = se;
            first = false;
        }
        if (margin < 0.0) {
            any_negative = true;
            if (-margin > 3.0 * se) any_significant = true;
        }
    }
    rep.verdict = any_significant ? GronwallVerdict::kViolated
                : any_negative   ? GronwallVerdict::kInconclusive
                                 : GronwallVerdict::kHolds;
    return rep;
}

// --- quadratic variation ----------------------------------------------------

// Running sum of squared increments; the discrete estimator of <Y>_t.
inline std::vector<double> realized_qv(const std::vector<double>& y) {
    std::vector<double> out(y.size(), 0.0);
    for (std::size_t k = 0; k + 1 < y.size(); ++k) {
        const double dy = y[k + 1] - y[k];
        out[k + 1] = out[k] + dy * dy;
    }
    return out;
}

// --- Kolmogorov-Smirnov -----------------------------------------------------

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

// Complementary CDF of the asymptotic Kolmogorov distribution. Series in
// both regimes, switched where each converges fast.
inline double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 1.18) {
        const double f = std::exp(-1.2337005501361697 / (lambda * lambda));  // pi^2 / 8
        const double cdf = 2.5066282746310002 / lambda * (f + std::pow(f, 9.0) + std::pow(f, 25.0) + std::pow(f, 49.0));
        return std::fmax(0.0, 1.0 - cdf);
    }
    double q = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 64; ++k) {
        const double term = 2.0 * std::exp(-2.0 * k * k * lambda * lambda);
        q += sign * term;
        sign = -sign;
        if (term < 1e-300) break;
    }
    return std::fmin(1.0, std::fmax(0.0, q));
}

// Two-sample KS statistic and asymptotic p-value. Inputs must be sorted and
// non-empty; ties are handled by advancing both samples through each value.
inline KsResult ks_two_sample(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    if (!std::is_sorted(a.begin(), a.end()) || !std::is_sorted(b.begin(), b.end()))
        throw std::invalid_argument("ks_two_sample: samples must be sorted");
    const double n = static_cast<double>(a.size());
    const double m = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::fmin(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::fmax(d, std::fabs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    const double n_eff = n * m / (n + m);
    return KsResult{d, kolmogorov_q(std::sqrt(n_eff) * d)};
}

// --- origin proximity -------------------------------------------------------

// For each epsilon, the fraction of paths whose minimal l-infinity norm over
// the horizon drops below it, with binomial standard errors. The sorted
// per-path minima are kept as an empirical CDF.
inline McSummary origin_proximity(const std::vector<SolutionPath>& paths,
                                  const std::vector<double>& epsilons) {
    if (paths.empty()) throw std::invalid_argument("origin_proximity: no paths");
    std::vector<double> mins(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) {
        double m = linf_norm(paths[i].x[0], paths[i].y[0]);
        for (std::size_t k = 1; k < paths[i].x.size(); ++k)
            m = std::fmin(m, linf_norm(paths[i].x[k], paths[i].y[k]));
        mins[i] = m;
    }
    McSummary s;
    s.n_paths = paths.size();
    const double n = static_cast<double>(paths.size());
    for (double eps : epsilons) {
        std::size_t hits = 0;
        for (double m : mins)
            if (m < eps) ++hits;
        const double frac = static_cast<double>(hits) / n;
        char key[64];
        std::snprintf(key, sizeof(key), "frac_min_linf_below_%.0e", eps);
        s.estimates[key] = Estimate{frac, std::sqrt(frac * (1.0 - frac) / n)};
    }
    std::sort(mins.begin(), mins.end());
    s.empirical_cdfs["min_linf"] = std::move(mins);
    return s;
}

// --- misc path utilities ----------------------------------------------------

// Max-norm defect of x[k] - x[0] - trapezoid(y) up to each grid time.
inline double ode_consistency_residual(const SolutionPath& p) {
    const std::vector<double> iy = cumtrapz(p.grid.times, p.y);
    double worst = 0.0;
    for (std::size_t k = 0; k < p.x.size(); ++k)
        worst = std::fmax(worst, std::fabs(p.x[k] - p.x[0] - iy[k]));
    return worst;
}

// Every stride-th node of a path (shared-grid comparisons across
// resolutions). The step count must divide evenly.
inline SolutionPath subsample(const SolutionPath& p, std::size_t stride) {
    if (stride == 0 || (p.grid.size() - 1) % stride != 0)
        throw std::invalid_argument("subsample: stride must divide the step count");
    SolutionPath out = p;
    out.grid.times.clear();
    out.x.clear();
    out.y.clear();
    for (std::size_t k = 0; k < p.grid.size(); k += stride) {
        out.grid.times.push_back(p.grid.times[k]);
        out.x.push_back(p.x[k]);
        out.y.push_back(p.y[k]);
    }
    return out;
}

}  // namespace ksde
