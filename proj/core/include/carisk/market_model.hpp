#pragma once

#include <Eigen/Dense>

namespace carisk {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

struct MarketOptions {
    /// Require every excess return b_i > 0. Relaxing this leaves only the
    /// benchmark condition b'eta > 0, which is an extension beyond the
    /// standing positivity assumption of the model.
    bool require_positive_excess = true;
    /// Reciprocal condition number below which a volatility matrix is
    /// treated as singular.
    double min_rcond = 1e-12;
};

/// Constant-coefficient Black-Scholes market: riskless rate r, excess
/// returns b and an invertible volatility matrix sigma.
///
/// Immutable after construction. The LU factorization of sigma is kept so
/// that sigma^{-1} and (sigma sigma')^{-1} are only ever applied through
/// solves. Nothing here assumes sigma is triangular.
class MarketModel {
public:
    MarketModel(double rate, Vector excess, Matrix volatility, MarketOptions options = {});

    Index dim() const noexcept { return excess_.size(); }
    double rate() const noexcept { return rate_; }
    const Vector& excess() const noexcept { return excess_; }
    const Matrix& volatility() const noexcept { return volatility_; }

    /// sigma^{-1} b
    const Vector& market_price_of_risk() const noexcept { return price_of_risk_; }
    /// (sigma sigma')^{-1} b
    const Vector& merton_direction() const noexcept { return merton_; }

    /// Solves sigma x = rhs.
    Vector solve(const Vector& rhs) const;
    /// Solves sigma' x = rhs.
    Vector solve_transpose(const Vector& rhs) const;
    /// Solves (sigma sigma') x = rhs.
    Vector solve_covariance(const Vector& rhs) const;
    /// sigma' pi, the Brownian exposure of a portfolio.
    Vector exposure(const Vector& pi) const;

private:
    double rate_;
    Vector excess_;
    Matrix volatility_;
    Eigen::PartialPivLU<Matrix> lu_;
    Vector price_of_risk_;
    Vector merton_;
};

/// Confidence level alpha in (0, 0.5), horizon T > 0 (years) and the
/// derived lower-tail standard normal quantile z_alpha < 0.
class RiskSpec {
public:
    RiskSpec(double alpha, double horizon);

    double alpha() const noexcept { return alpha_; }
    double horizon() const noexcept { return horizon_; }
    double z_alpha() const noexcept { return z_alpha_; }

private:
    double alpha_;
    double horizon_;
    double z_alpha_;
};

/// Lower-triangular L with L L' = diag(gammas) rho diag(gammas).
///
/// rho must be symmetric with unit diagonal and entries in [-1, 1]. A
/// pivot below 1e-12 * max(diag) raises NotPositiveDefinite.
Matrix build_volatility_from_correlation(const Vector& gammas, const Matrix& rho);

/// Volatility split into a first group of m assets driven only by the
/// first m Brownian motions and a second group driven by all of them:
///
///     sigma = [ sigma11   0      ]
///             [ sigma21   sigma22 ]
class BlockMarket {
public:
    Index first_count() const noexcept { return b1_.size(); }
    Index second_count() const noexcept { return b2_.size(); }
    Index dim() const noexcept { return first_count() + second_count(); }

    const Matrix& sigma11() const noexcept { return sigma11_; }
    const Matrix& sigma21() const noexcept { return sigma21_; }
    const Matrix& sigma22() const noexcept { return sigma22_; }
    const Vector& b1() const noexcept { return b1_; }
    const Vector& b2() const noexcept { return b2_; }
    double rate() const noexcept { return rate_; }

    Matrix volatility() const;
    Vector excess() const;
    /// sigma^{-1} assembled from the block-inverse formula.
    Matrix block_inverse() const;
    MarketModel to_market(MarketOptions options = {}) const;

    /// Same market with the first diagonal block replaced; sigma21 and
    /// sigma22 are kept as they are.
    BlockMarket with_sigma11(const Matrix& sigma11) const;

private:
    friend BlockMarket assemble_block_market(const Matrix&, const Matrix&, const Matrix&,
                                             const Vector&, const Vector&, double);
    BlockMarket() = default;

    Matrix sigma11_;
    Matrix sigma21_;
    Matrix sigma22_;
    Vector b1_;
    Vector b2_;
    double rate_ = 0.0;
};

BlockMarket assemble_block_market(const Matrix& sigma11, const Matrix& sigma21,
                                  const Matrix& sigma22, const Vector& b1, const Vector& b2,
                                  double rate);

/// Partitions a full market after its first m assets. The upper-right
/// m x (d-m) block of sigma must vanish.
BlockMarket partition_market(const MarketModel& market, Index first_count);

/// Market prices of risk of the two asset groups:
/// theta1 = |sigma11^{-1} b1|, theta2 = |sigma22^{-1} (b2 - sigma21 sigma11^{-1} b1)|.
struct GroupPricesOfRisk {
    Vector first;
    Vector second;
    double theta1 = 0.0;
    double theta2 = 0.0;
};

GroupPricesOfRisk group_prices_of_risk(const BlockMarket& block);

/// Target/index portfolio eta against which correlation is measured.
/// Caches sigma' eta, |sigma' eta| and b'eta for the market it was built
/// for; b'eta must be strictly positive.
class BenchmarkPortfolio {
public:
    BenchmarkPortfolio(const MarketModel& market, Vector weights);

    const Vector& weights() const noexcept { return weights_; }
    const Vector& exposure() const noexcept { return exposure_; }
    double exposure_norm() const noexcept { return exposure_norm_; }
    double excess_return() const noexcept { return excess_return_; }

private:
    Vector weights_;
    Vector exposure_;
    double exposure_norm_;
    double excess_return_;
};

/// Growth-optimal (pricing-kernel inverse) portfolio of the first asset
/// group: eta' = [((sigma11 sigma11')^{-1} b1)', 0].
BenchmarkPortfolio growth_optimal_benchmark(const BlockMarket& block,
                                            MarketOptions options = {});

/// Relative residuals of the identities linking the growth-optimal
/// benchmark to the block structure:
///   |sigma' eta| = theta1,  b'eta = theta1^2,
///   |sigma^{-1} b|^2 |sigma' eta|^2 - (b'eta)^2 = theta1^2 theta2^2
/// (the last one relative to |sigma^{-1} b|^2 |sigma' eta|^2).
struct PricingKernelResiduals {
    double exposure_norm = 0.0;
    double excess_return = 0.0;
    double cross_term = 0.0;

    double max() const noexcept;
};

PricingKernelResiduals pricing_kernel_residuals(const BlockMarket& block,
                                                const BenchmarkPortfolio& benchmark);

}  // namespace carisk
