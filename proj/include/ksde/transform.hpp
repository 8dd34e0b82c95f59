#pragma once

#include <cmath>
#include <stdexcept>

// State-space transformation for the planar system
//
//     dX_t = Y_t dt,   dY_t = |X_t|^a dB_t,
//
// with exponent a > -1/2. The position coordinate is mapped through the odd,
// strictly increasing power rescaling
//
//     v = x_to_v(x) = |x|^(2a+1) sgn(x) / (2a+1),
//
// under which (for -1/2 < a <= 0) the solution becomes a time-changed
// integrated Brownian motion. The clock density is
//
//     clock_integrand(v) = c |v|^p,   p = -2a/(2a+1),   c = (2a+1)^p,
//
// which is continuous (p >= 0) exactly on that exponent range.

namespace ksde {

// Magnitudes below this are treated as zero when raising to a power; avoids
// platform-dependent pow behavior at subnormals.
inline constexpr double kPowAbsGuard = 1e-300;

// |x|^q computed as exp(q log|x|). For |x| below the guard: 0 when q > 0,
// 1 when q == 0, domain_error when q < 0.
inline double pow_abs(double x, double q) {
    const double ax = std::fabs(x);
    if (ax < kPowAbsGuard) {
        if (q > 0.0) return 0.0;
        if (q == 0.0) return 1.0;
        throw std::domain_error("pow_abs: negative exponent at (near-)zero base");
    }
    return std::exp(q * std::log(ax));
}

// Exponent parameter with its derived constants.
class Alpha {
public:
    Alpha() : Alpha(0.0) {}

    explicit Alpha(double value) : value_(value) {
        if (!(value > -0.5))
            throw std::domain_error("Alpha: exponent must be greater than -1/2");
        slope_order_ = 2.0 * value + 1.0;           // 2a+1, positive
        log_slope_order_ = std::log(slope_order_);
        clock_exponent_ = -2.0 * value / slope_order_;  // p
    }

    double value() const { return value_; }
    bool is_zero() const { return value_ == 0.0; }

    double slope_order() const { return slope_order_; }
    double log_slope_order() const { return log_slope_order_; }

    // p = -2a/(2a+1); nonnegative on (-1/2, 0].
    double clock_exponent() const { return clock_exponent_; }
    // c = (2a+1)^p.
    double clock_scale() const { return std::exp(clock_exponent_ * log_slope_order_); }

    // Range on which the time-change construction applies.
    bool in_timechange_range() const { return value_ <= 0.0; }

private:
    double value_;
    double slope_order_;
    double log_slope_order_;
    double clock_exponent_;
};

// Planar state (position, velocity).
struct Phase {
    double x = 0.0;
    double y = 0.0;

    double linf() const { return std::fmax(std::fabs(x), std::fabs(y)); }
    bool is_origin() const { return x == 0.0 && y == 0.0; }
};

inline double linf_norm(double x, double y) { return std::fmax(std::fabs(x), std::fabs(y)); }

// v = |x|^(2a+1) sgn(x) / (2a+1). Odd, strictly increasing, maps 0 to 0.
// Identity at a = 0 (the power is skipped, so the reduction is exact).
inline double x_to_v(double x, const Alpha& a) {
    if (a.is_zero()) return x;
    const double ax = std::fabs(x);
    if (ax < kPowAbsGuard) return 0.0;
    const double mag = std::exp(a.slope_order() * std::log(ax) - a.log_slope_order());
    return x > 0.0 ? mag : -mag;
}

// Inverse of x_to_v: x = (2a+1)^(1/(2a+1)) |v|^(1/(2a+1)) sgn(v).
// Evaluated in log space so the leading constant cannot under/overflow for
// exponents close to -1/2.
inline double v_to_x(double v, const Alpha& a) {
    if (a.is_zero()) return v;
    const double av = std::fabs(v);
    if (av < kPowAbsGuard) return 0.0;
    const double mag = std::exp((a.log_slope_order() + std::log(av)) / a.slope_order());
    return v > 0.0 ? mag : -mag;
}

// Clock density c |v|^p. Requires -1/2 < a <= 0; constant 1 at a = 0.
inline double clock_integrand(double v, const Alpha& a) {
    if (!a.in_timechange_range())
        throw std::domain_error("clock_integrand: exponent outside (-1/2, 0]");
    if (a.is_zero()) return 1.0;
    const double av = std::fabs(v);
    if (av < kPowAbsGuard) return 0.0;  // p > 0 here
    return std::exp(a.clock_exponent() * (a.log_slope_order() + std::log(av)));
}

}  // namespace ksde
