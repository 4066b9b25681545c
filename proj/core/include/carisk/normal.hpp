#pragma once

namespace carisk {

/// Standard normal CDF, evaluated through erfc so the lower tail keeps
/// full relative precision.
double normal_cdf(double z) noexcept;

/// Standard normal density.
double normal_pdf(double z) noexcept;

/// Inverse standard normal CDF on the open interval (0, 1).
///
/// Rational initial guess (Acklam's approximation, relative error about
/// 1.15e-9) refined by a single Halley step against normal_cdf, which
/// brings |normal_cdf(z) - p| down to rounding level.
/// Throws Error{OutOfRange} outside (0, 1).
double inverse_normal_cdf(double p);

/// Lower-tail quantile z_alpha used by the capital-at-risk formulas.
/// Requires 0 < alpha < 0.5, so the result is strictly negative.
double normal_quantile(double alpha);

}  // namespace carisk
