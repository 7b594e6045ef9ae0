#pragma once

#include <cmath>
#include <numbers>

namespace mep {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

/// Standard normal density.
inline double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

/// Standard normal CDF through the complementary error function; absolute
/// error is at the level of a few ulps of the result.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

/// Upper tail 1 - Phi(x) without cancellation.
inline double normal_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

/// P(lo < X < hi) for X ~ N(mean, sd^2). Uses whichever tail keeps the
/// difference away from cancellation. Infinite bounds are allowed.
inline double normal_interval(double lo, double hi, double mean, double sd) {
    if (!(hi > lo)) return 0.0;
    const double a = (lo - mean) / sd;
    const double b = (hi - mean) / sd;
    if (a > 0.0) return normal_sf(a) - normal_sf(b);
    return normal_cdf(b) - normal_cdf(a);
}

/// Inverse standard normal CDF.
double normal_quantile(double p);

}  // namespace mep
