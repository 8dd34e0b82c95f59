#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ksde/analysis.hpp"
#include "ksde/driver.hpp"
#include "ksde/schemes.hpp"

using namespace ksde;

namespace {

SolutionPath synthetic_path(const TimeGrid& g, std::vector<double> x, std::vector<double> y) {
    SolutionPath p;
    p.grid = g;
    p.x = std::move(x);
    p.y = std::move(y);
    p.initial = Phase{p.x[0], p.y[0]};
    return p;
}

SolutionPath constant_path(const TimeGrid& g, double x, double y) {
    return synthetic_path(g, std::vector<double>(g.size(), x), std::vector<double>(g.size(), y));
}

}  // namespace

TEST_CASE("first exit time of band", "[analysis]") {
    const TimeGrid g = TimeGrid::uniform(1.0, 10);

    // Constant (1,0): inside [1/2, 2] forever.
    CHECK_FALSE(first_exit_time(constant_path(g, 1.0, 0.0), TruncationSpec(1)).has_value());

    // x grows 0 -> 4 with y = 4: the norm is 4 >= 2 already at t = 0.
    std::vector<double> x(g.size()), y(g.size(), 4.0);
    for (std::size_t k = 0; k < g.size(); ++k) x[k] = 4.0 * g.times[k];
    const auto tau = first_exit_time(synthetic_path(g, x, y), TruncationSpec(1));
    REQUIRE(tau.has_value());
    CHECK(*tau == 0.0);
}

TEST_CASE("exit times are pathwise monotone in the band level", "[analysis]") {
    // Wider bands exit later on the same trajectory.
    std::mt19937_64 gen(404u);
    std::normal_distribution<double> nd;
    const TimeGrid g = TimeGrid::uniform(1.0, 256);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> x(g.size()), y(g.size());
        x[0] = 1.0;
        y[0] = 0.0;
        for (std::size_t k = 1; k < g.size(); ++k) {
            x[k] = x[k - 1] + 0.3 * nd(gen);
            y[k] = y[k - 1] + 0.3 * nd(gen);
        }
        const SolutionPath p = synthetic_path(g, x, y);
        for (int n = 1; n <= 3; ++n) {
            const auto lo = first_exit_time(p, TruncationSpec(n));
            const auto hi = first_exit_time(p, TruncationSpec(n + 1));
            if (hi) {
                REQUIRE(lo.has_value());
                REQUIRE(*lo <= *hi);
            }
        }
    }
}

TEST_CASE("zero crossings of the position component", "[analysis]") {
    // Linear 1 - t on [0, 2]: one root at t = 1.
    {
        const TimeGrid g = TimeGrid::uniform(2.0, 64);
        std::vector<double> x(g.size()), y(g.size(), -1.0);
        for (std::size_t k = 0; k < g.size(); ++k) x[k] = 1.0 - g.times[k];
        const auto roots = zero_crossing_times(synthetic_path(g, x, y));
        REQUIRE(roots.size() == 1);
        CHECK(roots[0] == Catch::Approx(1.0).margin(1e-12));
    }
    // Strictly positive path: no crossings.
    {
        const TimeGrid g = TimeGrid::uniform(1.0, 32);
        CHECK(zero_crossing_times(constant_path(g, 2.0, 0.0)).empty());
    }
    // sin(2 pi t) on [0, 1]: roots {0, 1/2, 1}. The sample uses periodic
    // argument reduction so the boundary root lands exactly on a node (raw
    // sin(2 pi) evaluates to -2.4e-16, which is a sign, not a zero).
    {
        const std::size_t n = 1 << 10;
        const TimeGrid g = TimeGrid::uniform(1.0, n);
        const double dt = 1.0 / static_cast<double>(n);
        std::vector<double> x(g.size()), y(g.size(), 0.0);
        for (std::size_t k = 0; k < g.size(); ++k)
            x[k] = std::sin(2.0 * M_PI * std::fmod(g.times[k], 1.0));
        const auto roots = zero_crossing_times(synthetic_path(g, x, y));
        REQUIRE(roots.size() == 3);
        CHECK(std::fabs(roots[0] - 0.0) <= dt);
        CHECK(std::fabs(roots[1] - 0.5) <= dt);
        CHECK(std::fabs(roots[2] - 1.0) <= dt);
        REQUIRE(std::is_sorted(roots.begin(), roots.end()));
    }
}

TEST_CASE("gap curve basics: zero for identical inputs, symmetric", "[analysis]") {
    const TimeGrid g = TimeGrid::uniform(1.0, 128);
    std::vector<SolutionPath> a, b;
    for (std::uint64_t i = 0; i < 10; ++i) {
        const DriverPath d = sample_driver(g, 5, i);
        a.push_back(euler_maruyama(Phase{1.0, 0.0}, Alpha(0.75), d));
        b.push_back(euler_maruyama(Phase{1.0, 0.2}, Alpha(0.75), d));
    }
    const GapCurve self = mean_square_gap(a, a);
    for (double v : self.mean) CHECK(v == 0.0);
    for (double v : self.se) CHECK(v == 0.0);

    const GapCurve ab = mean_square_gap(a, b);
    const GapCurve ba = mean_square_gap(b, a);
    CHECK(ab.mean == ba.mean);
    CHECK(ab.se == ba.se);
}

TEST_CASE("coarse-to-fine gap shrinks with the step and vanishes at small times", "[analysis]") {
    const Alpha a(0.75);
    const Phase p0{0.0, 1.0};
    const std::size_t n_pairs = 150;
    std::vector<double> sup_gap;
    for (std::size_t level : {std::size_t(64), std::size_t(256), std::size_t(1024)}) {
        std::vector<SolutionPath> coarse, fine;
        for (std::size_t i = 0; i < n_pairs; ++i) {
            const DriverPath dc = sample_driver(TimeGrid::uniform(1.0, level), 70 + level, i);
            const DriverPath df = refine_driver(dc, TimeGrid::uniform(1.0, 4 * level), 71 + level);
            coarse.push_back(euler_maruyama(p0, a, dc));
            fine.push_back(subsample(euler_maruyama(p0, a, df), 4));
        }
        const GapCurve c = mean_square_gap(coarse, fine);
        sup_gap.push_back(*std::max_element(c.mean.begin(), c.mean.end()));
        if (level == 1024) {
            // D_t / t^2 -> 0 as t -> 0: already tiny at the first few nodes.
            const double t_min = std::ldexp(1.0, -10);
            std::size_t k = 0;
            while (c.t[k] < t_min) ++k;
            CHECK(c.mean[k] / (t_min * t_min) < 1e-4);
        }
    }
    REQUIRE(sup_gap[0] > sup_gap[1]);
    REQUIRE(sup_gap[1] > sup_gap[2]);
}

TEST_CASE("small-time slope readouts", "[analysis]") {
    // Zero noise from (0, 1): x(t) = t, slope exactly 1 at any resolution.
    for (std::size_t n : {std::size_t(64), std::size_t(256)}) {
        const TimeGrid g = TimeGrid::uniform(1.0, n);
        const SolutionPath sol = euler_maruyama(Phase{0.0, 1.0}, Alpha(0.75), zero_driver(g));
        CHECK(small_time_slope(sol) == 1.0);
    }
    // Sign symmetry.
    {
        const TimeGrid g = TimeGrid::uniform(1.0, 64);
        const SolutionPath sol = euler_maruyama(Phase{0.0, -2.0}, Alpha(0.75), zero_driver(g));
        CHECK(small_time_slope(sol) == -2.0);
    }
    // Noisy runs: the mean slope at t1 = 2^-k approaches y0 as k grows.
    {
        const Alpha a(0.75);
        const std::size_t n_paths = 300;
        double prev_dev = 1e9;
        for (int k : {6, 8, 10}) {
            const double t1 = std::ldexp(1.0, -k);
            const TimeGrid g = TimeGrid::uniform(t1, 16);  // inner step t1/16
            std::vector<double> slopes(n_paths);
            for (std::size_t i = 0; i < n_paths; ++i) {
                const SolutionPath sol = euler_maruyama(Phase{0.0, 1.0}, a, sample_driver(g, 900 + k, i));
                slopes[i] = subsample(sol, 16).x[1] / t1;
            }
            const Estimate e = mean_with_error(slopes);
            REQUIRE(std::fabs(e.value - 1.0) <= 3.0 * e.std_error);
            CHECK(std::fabs(e.value - 1.0) <= prev_dev + 3.0 * e.std_error);
            prev_dev = std::fabs(e.value - 1.0);
        }
    }
}

TEST_CASE("gronwall check flags the synthetic non-conforming curve", "[analysis]") {
    // D_r = r^3 with exponent 1 and band level 1: the right side is t^6/4,
    // which sits far below t^3 on (0, 1]. No statistical noise, so the
    // verdict must be a clean violation.
    const std::size_t n = 1 << 10;
    GapCurve c;
    c.t.resize(n + 1);
    c.mean.resize(n + 1);
    c.se.assign(n + 1, 0.0);
    for (std::size_t k = 0; k <= n; ++k) {
        c.t[k] = static_cast<double>(k) / n;
        c.mean[k] = c.t[k] * c.t[k] * c.t[k];
    }
    const GronwallReport rep = gronwall_violation_check(c, Alpha(1.0), TruncationSpec(1));
    CHECK(rep.verdict == GronwallVerdict::kViolated);
    CHECK(rep.min_margin < 0.0);

    // The identically-zero curve satisfies the bound with zero margin.
    GapCurve zero = c;
    std::fill(zero.mean.begin(), zero.mean.end(), 0.0);
    const GronwallReport zrep = gronwall_violation_check(zero, Alpha(1.0), TruncationSpec(1));
    CHECK(zrep.verdict == GronwallVerdict::kHolds);
    CHECK(zrep.min_margin == 0.0);

    // A deficit buried inside wide error bands is inconclusive, not violated.
    GapCurve noisy = c;
    std::fill(noisy.se.begin(), noisy.se.end(), 10.0);
    CHECK(gronwall_violation_check(noisy, Alpha(1.0), TruncationSpec(1)).verdict ==
          GronwallVerdict::kInconclusive);
}

TEST_CASE("gronwall check on truncated-vs-plain coupled pairs", "[analysis]") {
    // The truncated scheme only diverges from the plain one after the exit
    // time, so on the window up to the earliest pairwise exit the gap is
    // identically zero and the bound holds.
    const Alpha a(0.75);
    const Phase p0{0.0, 1.0};
    const TimeGrid g = TimeGrid::uniform(1.0, 512);
    const TruncationSpec trunc(4);
    std::vector<SolutionPath> truncated, plain;
    double window = g.horizon();
    for (std::uint64_t i = 0; i < 200; ++i) {
        const DriverPath d = sample_driver(g, 3000, i);
        truncated.push_back(euler_maruyama(p0, a, d, trunc));
        plain.push_back(euler_maruyama(p0, a, d));
        if (const auto tau = first_exit_time(truncated.back(), plain.back(), trunc))
            window = std::fmin(window, *tau);
    }
    const GapCurve c = restrict_to(mean_square_gap(truncated, plain), window);
    REQUIRE(c.t.size() > 2);
    const GronwallReport rep = gronwall_violation_check(c, a, trunc);
    CHECK(rep.verdict == GronwallVerdict::kHolds);
}

TEST_CASE("realized quadratic variation", "[analysis]") {
    // Constant path: zero.
    const std::vector<double> qv0 = realized_qv(std::vector<double>(100, 3.0));
    for (double v : qv0) CHECK(v == 0.0);

    // Brownian path on a fine grid: <B>_1 = 1 within a few percent.
    const TimeGrid g = TimeGrid::uniform(1.0, 1 << 14);
    double mean_qv = 0.0;
    const std::size_t n_paths = 20;
    for (std::uint64_t i = 0; i < n_paths; ++i) {
        const DriverPath d = sample_driver(g, 8080, i);
        const std::vector<double> qv = realized_qv(d.b);
        REQUIRE(std::is_sorted(qv.begin(), qv.end()));
        mean_qv += qv.back() / n_paths;
    }
    CHECK(mean_qv == Catch::Approx(1.0).epsilon(0.05));
}

TEST_CASE("two-sample KS statistic and p-value", "[analysis]") {
    // Identical samples.
    const std::vector<double> s = {1.0, 2.0, 3.0, 4.0};
    const KsResult same = ks_two_sample(s, s);
    CHECK(same.statistic == 0.0);
    CHECK(same.p_value == 1.0);

    CHECK_THROWS_AS(ks_two_sample({}, s), std::invalid_argument);
    CHECK_THROWS_AS(ks_two_sample(std::vector<double>{2.0, 1.0}, s), std::invalid_argument);

    std::mt19937_64 gen(31u);
    std::normal_distribution<double> nd;
    const std::size_t n = 10000;
    std::vector<double> a(n), b(n), shifted(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = nd(gen);
        b[i] = nd(gen);
        shifted[i] = nd(gen) + 1.0;
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::sort(shifted.begin(), shifted.end());

    CHECK(ks_two_sample(a, b).p_value > 0.001);
    CHECK(ks_two_sample(a, shifted).p_value < 1e-6);

    // Rank-based: any common strictly increasing transformation leaves the
    // statistic unchanged.
    std::vector<double> ta(n), tb(n);
    for (std::size_t i = 0; i < n; ++i) {
        ta[i] = std::atan(a[i]);
        tb[i] = std::atan(b[i]);
    }
    const KsResult raw = ks_two_sample(a, b);
    const KsResult trans = ks_two_sample(ta, tb);
    CHECK(raw.statistic == trans.statistic);
    CHECK(raw.p_value == trans.p_value);
}

TEST_CASE("KS null calibration over seeded repetitions", "[analysis]") {
    std::mt19937_64 gen(555u);
    std::normal_distribution<double> nd;
    const std::size_t n = 2000;
    int pass = 0;
    const int reps = 50;
    for (int r = 0; r < reps; ++r) {
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = nd(gen);
            b[i] = nd(gen);
        }
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        if (ks_two_sample(a, b).p_value > 0.001) ++pass;
    }
    CHECK(pass >= reps - 1);
}

TEST_CASE("origin proximity summary", "[analysis]") {
    const TimeGrid g = TimeGrid::uniform(1.0, 16);
    std::vector<SolutionPath> paths = {constant_path(g, 1.0, 0.0), constant_path(g, 1.0, 0.5)};
    const McSummary s = origin_proximity(paths, {0.5, 2.0});
    CHECK(s.n_paths == 2);
    CHECK(s.estimates.at("frac_min_linf_below_5e-01").value == 0.0);
    CHECK(s.estimates.at("frac_min_linf_below_2e+00").value == 1.0);
    CHECK(s.empirical_cdfs.at("min_linf").size() == 2);
}

TEST_CASE("subsample stride checks", "[analysis]") {
    const TimeGrid g = TimeGrid::uniform(1.0, 8);
    const SolutionPath p = constant_path(g, 1.0, 0.0);
    const SolutionPath q = subsample(p, 4);
    CHECK(q.grid.size() == 3);
    CHECK_THROWS_AS(subsample(p, 3), std::invalid_argument);
}
