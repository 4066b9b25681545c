#include "carisk/normal.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "carisk/error.hpp"

namespace carisk {

namespace {

constexpr std::array<double, 6> kCentralNum = {-3.969683028665376e+01, 2.209460984245205e+02,
                                               -2.759285104469687e+02, 1.383577518672690e+02,
                                               -3.066479806614716e+01, 2.506628277459239e+00};
constexpr std::array<double, 5> kCentralDen = {-5.447609879822406e+01, 1.615858368580409e+02,
                                               -1.556989798598866e+02, 6.680131188771972e+01,
                                               -1.328068155288572e+01};
constexpr std::array<double, 6> kTailNum = {-7.784894002430293e-03, -3.223964580411365e-01,
                                            -2.400758277161838e+00, -2.549732539343734e+00,
                                            4.374664141464968e+00,  2.938163982698783e+00};
constexpr std::array<double, 4> kTailDen = {7.784695709041462e-03, 3.224671290700398e-01,
                                            2.445134137142996e+00, 3.754408661907416e+00};
constexpr double kTailSplit = 0.02425;

double tail_guess(double q) {
    // q = sqrt(-2 log p) for the lower tail
    const auto& c = kTailNum;
    const auto& d = kTailDen;
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

double initial_guess(double p) {
    if (p < kTailSplit) {
        return tail_guess(std::sqrt(-2.0 * std::log(p)));
    }
    if (p > 1.0 - kTailSplit) {
        return -tail_guess(std::sqrt(-2.0 * std::log1p(-p)));
    }
    const double q = p - 0.5;
    const double r = q * q;
    const auto& a = kCentralNum;
    const auto& b = kCentralDen;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) noexcept {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw Error(ErrorKind::OutOfRange,
                    "probability must lie in (0, 1), got " + std::to_string(p));
    }
    double x = initial_guess(p);
    // Halley step
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

double normal_quantile(double alpha) {
    if (!(alpha > 0.0 && alpha < 0.5)) {
        throw Error(ErrorKind::OutOfRange,
                    "confidence level alpha must lie in (0, 0.5), got " + std::to_string(alpha));
    }
    return inverse_normal_cdf(alpha);
}

}  // namespace carisk
