#include "carisk/market_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "carisk/error.hpp"
#include "carisk/normal.hpp"

namespace carisk {

namespace {

std::string shape(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

double reciprocal_condition(const Matrix& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    const double largest = s(0);
    const double smallest = s(s.size() - 1);
    if (!std::isfinite(largest) || largest <= 0.0) {
        return 0.0;
    }
    return smallest / largest;
}

double relative_gap(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

}  // namespace

MarketModel::MarketModel(double rate, Vector excess, Matrix volatility, MarketOptions options)
    : rate_(rate), excess_(std::move(excess)), volatility_(std::move(volatility)) {
    if (excess_.size() < 1) {
        throw Error(ErrorKind::DimensionMismatch, "market needs at least one risky asset");
    }
    if (volatility_.rows() != excess_.size() || volatility_.cols() != excess_.size()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "volatility is " + shape(volatility_) + " but " +
                        std::to_string(excess_.size()) + " excess returns were given");
    }
    if (!std::isfinite(rate_) || !excess_.allFinite() || !volatility_.allFinite()) {
        throw Error(ErrorKind::InvalidInput, "market parameters must be finite");
    }
    if (options.require_positive_excess && (excess_.array() <= 0.0).any()) {
        throw Error(ErrorKind::InvalidInput, "excess returns must be strictly positive");
    }
    if (reciprocal_condition(volatility_) < options.min_rcond) {
        throw Error(ErrorKind::SingularMatrix, "volatility matrix is numerically singular");
    }
    lu_ = Eigen::PartialPivLU<Matrix>(volatility_);
    price_of_risk_ = lu_.solve(excess_);
    merton_ = lu_.transpose().solve(price_of_risk_);
}

Vector MarketModel::solve(const Vector& rhs) const { return lu_.solve(rhs); }

Vector MarketModel::solve_transpose(const Vector& rhs) const {
    return lu_.transpose().solve(rhs);
}

Vector MarketModel::solve_covariance(const Vector& rhs) const {
    return lu_.transpose().solve(lu_.solve(rhs));
}

Vector MarketModel::exposure(const Vector& pi) const {
    if (pi.size() != dim()) {
        throw Error(ErrorKind::DimensionMismatch, "portfolio has " + std::to_string(pi.size()) +
                                                      " weights for a market of " +
                                                      std::to_string(dim()) + " assets");
    }
    return volatility_.transpose() * pi;
}

RiskSpec::RiskSpec(double alpha, double horizon) : alpha_(alpha), horizon_(horizon) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw Error(ErrorKind::OutOfRange, "horizon must be positive, got " + std::to_string(horizon));
    }
    z_alpha_ = normal_quantile(alpha);
}

Matrix build_volatility_from_correlation(const Vector& gammas, const Matrix& rho) {
    const Index d = gammas.size();
    if (d < 1 || rho.rows() != d || rho.cols() != d) {
        throw Error(ErrorKind::DimensionMismatch, "correlation is " + shape(rho) + " for " +
                                                      std::to_string(d) + " standard deviations");
    }
    if (!gammas.allFinite() || (gammas.array() <= 0.0).any()) {
        throw Error(ErrorKind::InvalidInput, "standard deviations must be positive and finite");
    }
    for (Index i = 0; i < d; ++i) {
        if (std::abs(rho(i, i) - 1.0) > 1e-12) {
            throw Error(ErrorKind::InvalidInput, "correlation diagonal must be 1");
        }
        for (Index j = 0; j < d; ++j) {
            if (!std::isfinite(rho(i, j)) || std::abs(rho(i, j)) > 1.0 ||
                std::abs(rho(i, j) - rho(j, i)) > 1e-12) {
                throw Error(ErrorKind::InvalidInput,
                            "correlation must be symmetric with entries in [-1, 1]");
            }
        }
    }

    const Matrix cov = gammas.asDiagonal() * rho * gammas.asDiagonal();
    const double pivot_floor = 1e-12 * cov.diagonal().maxCoeff();
    Matrix lower = Matrix::Zero(d, d);
    for (Index j = 0; j < d; ++j) {
        double pivot = cov(j, j);
        for (Index k = 0; k < j; ++k) {
            pivot -= lower(j, k) * lower(j, k);
        }
        if (pivot < pivot_floor) {
            throw Error(ErrorKind::NotPositiveDefinite,
                        "Cholesky pivot " + std::to_string(j) + " is " + std::to_string(pivot) +
                            "; correlation data is not admissible");
        }
        lower(j, j) = std::sqrt(pivot);
        for (Index i = j + 1; i < d; ++i) {
            double s = cov(i, j);
            for (Index k = 0; k < j; ++k) {
                s -= lower(i, k) * lower(j, k);
            }
            lower(i, j) = s / lower(j, j);
        }
    }
    return lower;
}

Matrix BlockMarket::volatility() const {
    const Index m = first_count();
    const Index n = second_count();
    Matrix sigma = Matrix::Zero(m + n, m + n);
    sigma.topLeftCorner(m, m) = sigma11_;
    sigma.bottomLeftCorner(n, m) = sigma21_;
    sigma.bottomRightCorner(n, n) = sigma22_;
    return sigma;
}

Vector BlockMarket::excess() const {
    Vector b(dim());
    b << b1_, b2_;
    return b;
}

Matrix BlockMarket::block_inverse() const {
    const Index m = first_count();
    const Index n = second_count();
    const Matrix inv11 = sigma11_.partialPivLu().inverse();
    const Matrix inv22 = sigma22_.partialPivLu().inverse();
    Matrix inv = Matrix::Zero(m + n, m + n);
    inv.topLeftCorner(m, m) = inv11;
    inv.bottomLeftCorner(n, m) = -inv22 * sigma21_ * inv11;
    inv.bottomRightCorner(n, n) = inv22;
    return inv;
}

MarketModel BlockMarket::to_market(MarketOptions options) const {
    return MarketModel(rate_, excess(), volatility(), options);
}

BlockMarket BlockMarket::with_sigma11(const Matrix& sigma11) const {
    return assemble_block_market(sigma11, sigma21_, sigma22_, b1_, b2_, rate_);
}

BlockMarket assemble_block_market(const Matrix& sigma11, const Matrix& sigma21,
                                  const Matrix& sigma22, const Vector& b1, const Vector& b2,
                                  double rate) {
    const Index m = b1.size();
    const Index n = b2.size();
    if (m < 1) {
        throw Error(ErrorKind::DimensionMismatch, "first asset group must be nonempty");
    }
    if (n < 1) {
        throw Error(ErrorKind::DimensionMismatch, "second asset group must be nonempty");
    }
    if (sigma11.rows() != m || sigma11.cols() != m || sigma21.rows() != n ||
        sigma21.cols() != m || sigma22.rows() != n || sigma22.cols() != n) {
        throw Error(ErrorKind::DimensionMismatch,
                    "blocks " + shape(sigma11) + ", " + shape(sigma21) + ", " + shape(sigma22) +
                        " do not fit groups of " + std::to_string(m) + " and " +
                        std::to_string(n) + " assets");
    }
    if (!sigma11.allFinite() || !sigma21.allFinite() || !sigma22.allFinite() ||
        !b1.allFinite() || !b2.allFinite() || !std::isfinite(rate)) {
        throw Error(ErrorKind::InvalidInput, "block market parameters must be finite");
    }
    constexpr double kMinRcond = 1e-12;
    if (reciprocal_condition(sigma11) < kMinRcond) {
        throw Error(ErrorKind::SingularBlock, "sigma11 is numerically singular");
    }
    if (reciprocal_condition(sigma22) < kMinRcond) {
        throw Error(ErrorKind::SingularBlock, "sigma22 is numerically singular");
    }
    BlockMarket block;
    block.sigma11_ = sigma11;
    block.sigma21_ = sigma21;
    block.sigma22_ = sigma22;
    block.b1_ = b1;
    block.b2_ = b2;
    block.rate_ = rate;
    return block;
}

BlockMarket partition_market(const MarketModel& market, Index first_count) {
    const Index d = market.dim();
    const Index m = first_count;
    if (m < 1 || m >= d) {
        throw Error(ErrorKind::DimensionMismatch, "first group size " + std::to_string(m) +
                                                      " must lie in [1, " + std::to_string(d) +
                                                      ")");
    }
    const Matrix& sigma = market.volatility();
    const double scale = sigma.cwiseAbs().maxCoeff();
    if (sigma.topRightCorner(m, d - m).cwiseAbs().maxCoeff() > 1e-14 * scale) {
        throw Error(ErrorKind::InvalidInput,
                    "first asset group loads on second-group Brownian motions");
    }
    const Vector& b = market.excess();
    return assemble_block_market(sigma.topLeftCorner(m, m), sigma.bottomLeftCorner(d - m, m),
                                 sigma.bottomRightCorner(d - m, d - m), b.head(m),
                                 b.tail(d - m), market.rate());
}

GroupPricesOfRisk group_prices_of_risk(const BlockMarket& block) {
    GroupPricesOfRisk out;
    out.first = block.sigma11().partialPivLu().solve(block.b1());
    out.second =
        block.sigma22().partialPivLu().solve(block.b2() - block.sigma21() * out.first);
    out.theta1 = out.first.norm();
    out.theta2 = out.second.norm();
    return out;
}

BenchmarkPortfolio::BenchmarkPortfolio(const MarketModel& market, Vector weights)
    : weights_(std::move(weights)) {
    if (weights_.size() != market.dim()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "benchmark has " + std::to_string(weights_.size()) +
                        " weights for a market of " + std::to_string(market.dim()) + " assets");
    }
    if (!weights_.allFinite()) {
        throw Error(ErrorKind::InvalidInput, "benchmark weights must be finite");
    }
    exposure_ = market.exposure(weights_);
    exposure_norm_ = exposure_.norm();
    excess_return_ = market.excess().dot(weights_);
    if (!(excess_return_ > 0.0)) {
        throw Error(ErrorKind::DegenerateBenchmark,
                    "benchmark excess return b'eta must be positive, got " +
                        std::to_string(excess_return_));
    }
}

BenchmarkPortfolio growth_optimal_benchmark(const BlockMarket& block, MarketOptions options) {
    if (block.b1().isZero(0.0)) {
        throw Error(ErrorKind::DegenerateBenchmark,
                    "first-group excess returns are zero; growth-optimal benchmark has no "
                    "excess return");
    }
    const Matrix& s11 = block.sigma11();
    const auto lu11 = s11.partialPivLu();
    // (sigma11 sigma11')^{-1} b1 = sigma11'^{-1} sigma11^{-1} b1
    const Vector head = lu11.transpose().solve(lu11.solve(block.b1()));
    Vector eta = Vector::Zero(block.dim());
    eta.head(block.first_count()) = head;
    return BenchmarkPortfolio(block.to_market(options), std::move(eta));
}

double PricingKernelResiduals::max() const noexcept {
    return std::max({exposure_norm, excess_return, cross_term});
}

PricingKernelResiduals pricing_kernel_residuals(const BlockMarket& block,
                                                const BenchmarkPortfolio& benchmark) {
    const auto prices = group_prices_of_risk(block);
    const double theta1 = prices.theta1;
    const double theta2 = prices.theta2;

    // sigma^{-1} b through the full (non-block) solve so both sides are
    // computed along different routes.
    const Matrix sigma = block.volatility();
    const Vector u = sigma.partialPivLu().solve(block.excess());
    const double v2 = benchmark.exposure_norm() * benchmark.exposure_norm();
    const double be = benchmark.excess_return();
    // Squared form, relative to the size of the terms: the square root of
    // the difference would amplify rounding when theta2 << theta1.
    const double scale = u.squaredNorm() * v2;
    const double cross2 = scale - be * be;

    PricingKernelResiduals r;
    r.exposure_norm = relative_gap(benchmark.exposure_norm(), theta1);
    r.excess_return = relative_gap(be, theta1 * theta1);
    r.cross_term = std::abs(cross2 - theta1 * theta1 * theta2 * theta2) / scale;
    return r;
}

}  // namespace carisk
