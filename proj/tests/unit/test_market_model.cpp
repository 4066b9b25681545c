#include <cmath>

#include <gtest/gtest.h>

#include "carisk/error.hpp"
#include "carisk/experiments.hpp"
#include "carisk/market_model.hpp"
#include "random_market.hpp"

using namespace carisk;

namespace {

Matrix dataset1_correlation() {
    Matrix rho(3, 3);
    rho << 1.0, -0.6, -0.8,
          -0.6, 1.0, 0.5,
          -0.8, 0.5, 1.0;
    return rho;
}

Matrix dataset2_correlation() {
    Matrix rho(3, 3);
    rho << 1.0, -0.3, 0.5,
          -0.3, 1.0, -0.9,
           0.5, -0.9, 1.0;
    return rho;
}

Vector standard_deviations() { return Vector::LinSpaced(3, 0.2, 0.3); }

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorKind::InvalidInput;
}

double max_abs(const Matrix& m) { return m.lpNorm<Eigen::Infinity>(); }

}  // namespace

TEST(Cholesky, IdentityCorrelationGivesDiagonal) {
    const Matrix sigma = build_volatility_from_correlation(standard_deviations(), Matrix::Identity(3, 3));
    EXPECT_LE(max_abs(sigma - Matrix(standard_deviations().asDiagonal())), 1e-15);
}

TEST(Cholesky, ReconstructsReferenceCovariances) {
    for (const Matrix& rho : {dataset1_correlation(), dataset2_correlation()}) {
        const Vector g = standard_deviations();
        const Matrix sigma = build_volatility_from_correlation(g, rho);
        const Matrix target = g.asDiagonal() * rho * g.asDiagonal();
        EXPECT_LE(max_abs(sigma * sigma.transpose() - target), 1e-12);
        EXPECT_TRUE(sigma.isLowerTriangular(0.0));
        EXPECT_GT(sigma.diagonal().minCoeff(), 0.0);
        // Eigen's LLT as an independent factorization.
        EXPECT_LE(max_abs(sigma - Matrix(target.llt().matrixL())), 1e-14);
    }
}

TEST(Cholesky, ReconstructsRandomCovariances) {
    fixtures::MarketGenerator gen(7);
    for (int i = 0; i < 200; ++i) {
        const Index d = gen.integer(1, 6);
        const Vector g = gen.gammas(d);
        const Matrix rho = gen.correlation(d);
        const Matrix sigma = build_volatility_from_correlation(g, rho);
        EXPECT_LE(max_abs(sigma * sigma.transpose() - g.asDiagonal() * rho * g.asDiagonal()), 1e-12);
    }
}

TEST(Cholesky, RejectsInadmissibleCorrelation) {
    Matrix rho(3, 3);
    rho << 1.0, 0.9, -0.9,
           0.9, 1.0, 0.9,
          -0.9, 0.9, 1.0;
    EXPECT_EQ(kind_of([&] { build_volatility_from_correlation(standard_deviations(), rho); }),
              ErrorKind::NotPositiveDefinite);
    // Perfect correlation is positive semidefinite only.
    Matrix ones = Matrix::Ones(2, 2);
    EXPECT_EQ(kind_of([&] { build_volatility_from_correlation(Vector::Constant(2, 0.2), ones); }),
              ErrorKind::NotPositiveDefinite);
}

TEST(Cholesky, ValidatesShapesAndEntries) {
    EXPECT_EQ(kind_of([] { build_volatility_from_correlation(Vector::Constant(2, 0.2), Matrix::Identity(3, 3)); }),
              ErrorKind::DimensionMismatch);
    Matrix asym = Matrix::Identity(2, 2);
    asym(0, 1) = 0.3;
    EXPECT_EQ(kind_of([&] { build_volatility_from_correlation(Vector::Constant(2, 0.2), asym); }),
              ErrorKind::InvalidInput);
    Matrix diag = Matrix::Identity(2, 2);
    diag(1, 1) = 2.0;
    EXPECT_EQ(kind_of([&] { build_volatility_from_correlation(Vector::Constant(2, 0.2), diag); }),
              ErrorKind::InvalidInput);
    EXPECT_EQ(kind_of([] { build_volatility_from_correlation(Vector::Constant(2, -0.2), Matrix::Identity(2, 2)); }),
              ErrorKind::InvalidInput);
}

TEST(MarketModel, DerivedVectorsMatchDirectInverse) {
    fixtures::MarketGenerator gen(11);
    for (int i = 0; i < 100; ++i) {
        const MarketModel m = gen.dense_market(gen.integer(1, 5));
        const Matrix inv = m.volatility().inverse();
        EXPECT_LE((m.market_price_of_risk() - inv * m.excess()).norm(), 1e-12 * m.excess().norm() * inv.norm());
        const Matrix cov_inv = inv.transpose() * inv;
        EXPECT_LE((m.merton_direction() - cov_inv * m.excess()).norm(),
                  1e-11 * cov_inv.norm() * m.excess().norm());
        const Vector pi = gen.normal_vector(m.dim());
        EXPECT_LE((m.exposure(pi) - m.volatility().transpose() * pi).norm(), 1e-14 * (1 + pi.norm()));
        EXPECT_LE((m.volatility().transpose() * m.solve_transpose(pi) - pi).norm(), 1e-12 * (1 + pi.norm()));
    }
}

TEST(MarketModel, RejectsInvalidInputs) {
    const Matrix s = Matrix::Identity(2, 2) * 0.2;
    EXPECT_EQ(kind_of([&] { MarketModel(0.01, Vector::Constant(3, 0.05), s); }), ErrorKind::DimensionMismatch);
    EXPECT_EQ(kind_of([&] { MarketModel(0.01, Vector(Eigen::Vector2d(0.05, -0.01)), s); }), ErrorKind::InvalidInput);
    EXPECT_EQ(kind_of([&] { MarketModel(0.01, Vector(Eigen::Vector2d(0.05, 0.0)), s); }), ErrorKind::InvalidInput);
    Matrix singular(2, 2);
    singular << 0.2, 0.1, 0.4, 0.2;
    EXPECT_EQ(kind_of([&] { MarketModel(0.01, Vector::Constant(2, 0.05), singular); }), ErrorKind::SingularMatrix);
    Matrix nan = s;
    nan(1, 0) = std::nan("");
    EXPECT_EQ(kind_of([&] { MarketModel(0.01, Vector::Constant(2, 0.05), nan); }), ErrorKind::InvalidInput);
    EXPECT_EQ(kind_of([&] { MarketModel(0.01, Vector(), Matrix()); }), ErrorKind::DimensionMismatch);
    EXPECT_EQ(kind_of([&] { MarketModel(0.01, Vector::Constant(2, 0.05), s).exposure(Vector::Zero(3)); }),
              ErrorKind::DimensionMismatch);

    MarketOptions relaxed;
    relaxed.require_positive_excess = false;
    EXPECT_NO_THROW(MarketModel(0.01, Vector(Eigen::Vector2d(0.05, -0.01)), s, relaxed));
}

TEST(RiskSpec, DerivesLowerTailQuantile) {
    const RiskSpec spec(0.05, 5.0);
    EXPECT_NEAR(spec.z_alpha(), -1.6448536269514722, 1e-12);
    EXPECT_EQ(kind_of([] { RiskSpec(0.5, 1.0); }), ErrorKind::OutOfRange);
    EXPECT_EQ(kind_of([] { RiskSpec(0.0, 1.0); }), ErrorKind::OutOfRange);
    EXPECT_EQ(kind_of([] { RiskSpec(0.05, 0.0); }), ErrorKind::OutOfRange);
}

TEST(BlockMarket, InverseMatchesBlockFormulaOnRandomInstances) {
    fixtures::MarketGenerator gen(3);
    for (int i = 0; i < 150; ++i) {
        const Index d = gen.integer(2, 6);
        const Index m = gen.integer(1, static_cast<int>(d) - 1);
        const BlockMarket block = gen.block_market(d, m);
        const Matrix sigma = block.volatility();
        EXPECT_LE(max_abs(sigma.topRightCorner(m, d - m)), 0.0);
        EXPECT_LE(max_abs(block.block_inverse() - sigma.inverse()), 1e-12 * sigma.inverse().norm());
        EXPECT_LE(max_abs(sigma * block.block_inverse() - Matrix::Identity(d, d)), 1e-12);
        EXPECT_EQ(block.first_count(), m);
        EXPECT_EQ(block.to_market().dim(), d);
    }
}

TEST(BlockMarket, AssemblyValidation) {
    const Matrix s11 = Matrix::Constant(1, 1, 0.2);
    const Matrix s21 = Matrix::Constant(2, 1, 0.05);
    const Matrix s22 = Matrix::Identity(2, 2) * 0.25;
    const Vector b1 = Vector::Constant(1, 0.05);
    const Vector b2 = Vector::Constant(2, 0.06);
    EXPECT_NO_THROW(assemble_block_market(s11, s21, s22, b1, b2, 0.01));
    EXPECT_EQ(kind_of([&] { assemble_block_market(s11, Matrix::Zero(1, 1), s22, b1, b2, 0.01); }),
              ErrorKind::DimensionMismatch);
    EXPECT_EQ(kind_of([&] { assemble_block_market(s11, s21, s22, b1, Vector::Constant(3, 0.1), 0.01); }),
              ErrorKind::DimensionMismatch);
    EXPECT_EQ(kind_of([&] { assemble_block_market(Matrix::Zero(1, 1), s21, s22, b1, b2, 0.01); }),
              ErrorKind::SingularBlock);
    Matrix rank1 = Matrix::Constant(2, 2, 0.25);
    EXPECT_EQ(kind_of([&] { assemble_block_market(s11, s21, rank1, b1, b2, 0.01); }), ErrorKind::SingularBlock);
    EXPECT_EQ(kind_of([&] { assemble_block_market(Matrix(0, 0), Matrix(3, 0), Matrix::Identity(3, 3), Vector(), Vector::Ones(3), 0.0); }),
              ErrorKind::DimensionMismatch);
}

TEST(BlockMarket, PartitionRoundTripAndSigmaOverride) {
    const MarketDataset ds = reference_dataset(1);
    const Matrix sigma = build_volatility_from_correlation(ds.gammas, ds.correlation);
    const MarketModel market(0.02, ds.excess, sigma);
    const BlockMarket block = partition_market(market, 1);
    EXPECT_LE(max_abs(block.volatility() - sigma), 0.0);
    EXPECT_LE((block.excess() - ds.excess).norm(), 0.0);

    const BlockMarket bumped = block.with_sigma11(Matrix::Constant(1, 1, 0.7));
    EXPECT_DOUBLE_EQ(bumped.sigma11()(0, 0), 0.7);
    EXPECT_LE(max_abs(bumped.sigma21() - block.sigma21()), 0.0);
    EXPECT_LE(max_abs(bumped.sigma22() - block.sigma22()), 0.0);

    Matrix full = sigma;
    full(0, 2) = 0.05;
    EXPECT_EQ(kind_of([&] { partition_market(MarketModel(0.02, ds.excess, full), 1); }), ErrorKind::InvalidInput);
    EXPECT_EQ(kind_of([&] { partition_market(market, 3); }), ErrorKind::DimensionMismatch);
}

TEST(ReferenceData, DatasetsMatchPublishedInputs) {
    const MarketDataset d1 = reference_dataset(1);
    const MarketDataset d2 = reference_dataset(2);
    EXPECT_LE(max_abs(d1.correlation - dataset1_correlation()), 0.0);
    EXPECT_LE(max_abs(d2.correlation - dataset2_correlation()), 0.0);
    EXPECT_LE((d1.gammas - standard_deviations()).norm(), 1e-15);
    EXPECT_LE((d1.excess - Vector(Eigen::Vector3d(0.07, 0.05, 0.03))).norm(), 0.0);
    EXPECT_LE((d2.excess - Vector(Eigen::Vector3d(0.03, 0.05, 0.07))).norm(), 0.0);
    EXPECT_THROW(reference_dataset(3), Error);
}

TEST(Benchmark, GrowthOptimalIdentitiesOnRandomInstances) {
    fixtures::MarketGenerator gen(5);
    for (int i = 0; i < 150; ++i) {
        const Index d = gen.integer(2, 5);
        const Index m = gen.integer(1, static_cast<int>(d) - 1);
        const BlockMarket block = gen.block_market(d, m);
        const BenchmarkPortfolio bench = growth_optimal_benchmark(block);
        const MarketModel market = block.to_market();

        // eta from its definition, with plain inverses.
        Vector eta = Vector::Zero(d);
        const Matrix s11 = block.sigma11();
        eta.head(m) = (s11 * s11.transpose()).inverse() * block.b1();
        EXPECT_LE((bench.weights() - eta).norm(), 1e-10 * eta.norm());

        const double theta1 = (s11.inverse() * block.b1()).norm();
        const double theta2 =
            (block.sigma22().inverse() * (block.b2() - block.sigma21() * s11.inverse() * block.b1())).norm();
        const GroupPricesOfRisk g = group_prices_of_risk(block);
        EXPECT_NEAR(g.theta1, theta1, 1e-12 * theta1);
        EXPECT_NEAR(g.theta2, theta2, 1e-12 * (1 + theta2));
        EXPECT_NEAR(bench.exposure_norm(), theta1, 1e-12 * theta1);
        EXPECT_NEAR(bench.excess_return(), theta1 * theta1, 1e-12 * theta1 * theta1);
        // |sigma^{-1} b|^2 = theta1^2 + theta2^2.
        EXPECT_NEAR(market.market_price_of_risk().squaredNorm(), theta1 * theta1 + theta2 * theta2,
                    1e-12 * (theta1 * theta1 + theta2 * theta2));
        EXPECT_LE(pricing_kernel_residuals(block, bench).max(), 1e-10);
    }
}

TEST(Benchmark, RejectsNonPositiveExcessReturn) {
    const MarketModel market(0.01, Vector::Constant(2, 0.05), Matrix::Identity(2, 2) * 0.2);
    EXPECT_EQ(kind_of([&] { BenchmarkPortfolio(market, Vector(Eigen::Vector2d(1.0, -1.0))); }),
              ErrorKind::DegenerateBenchmark);
    EXPECT_EQ(kind_of([&] { BenchmarkPortfolio(market, Vector::Zero(2)); }), ErrorKind::DegenerateBenchmark);
    EXPECT_EQ(kind_of([&] { BenchmarkPortfolio(market, Vector::Zero(3)); }), ErrorKind::DimensionMismatch);
}
