#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kmsorder/error.hpp"
#include "kmsorder/geometry.hpp"
#include <unsupported/Eigen/MatrixFunctions>

#include "oracles.hpp"

using namespace kmsorder;

namespace {

DensityMatrix rho_y(double s) { return pauli_gibbs({0, 1, 0}, s); }
DensityMatrix rho_x(double s) { return pauli_gibbs({1, 0, 0}, s); }

// D(ρ‖σ) = Tr ρ(log ρ − log σ) with Eigen's dense matrix logarithm.
double dense_relative_entropy(const DensityMatrix& r, const DensityMatrix& s) {
    // dynamic size: Eigen's fixed-size 2x2 logarithm path is unreliable
    const Eigen::MatrixXcd a = oracle::to_eigen(r.matrix());
    const Eigen::MatrixXcd b = oracle::to_eigen(s.matrix());
    const Eigen::MatrixXcd d = a * (a.log() - b.log());
    return d.trace().real();
}

}  // namespace

TEST(RelativeEntropy, SelfIsZero) {
    std::mt19937_64 rng(51);
    for (int k = 0; k < 20; ++k) {
        const auto r = oracle::random_state(rng);
        EXPECT_EQ(relative_entropy(r, r).value, 0.0);
    }
}

TEST(RelativeEntropy, ClosedFormAtOne) {
    EXPECT_NEAR(relative_entropy(rho_y(1.0), rho_x(1.0)).value, 0.7615941559557649, 1e-12);
}

TEST(RelativeEntropy, ClosedFormGrid) {
    for (double s : {0.1, 0.5, 1.0, 2.0, 5.0})
        EXPECT_NEAR(relative_entropy(rho_y(s), rho_x(s)).value, s * std::tanh(s), 1e-12);
}

TEST(RelativeEntropy, AgreesWithDenseLogarithm) {
    std::mt19937_64 rng(52);
    for (int k = 0; k < 50; ++k) {
        const auto a = oracle::random_state(rng), b = oracle::random_state(rng);
        const double ref = dense_relative_entropy(a, b);
        EXPECT_NEAR(relative_entropy(a, b).value, ref, 1e-11 * std::max(1.0, ref));
    }
}

TEST(RelativeEntropy, NonNegativeOnRandomPairs) {
    std::mt19937_64 rng(53);
    for (int k = 0; k < 200; ++k) {
        const auto a = oracle::random_state(rng, 0.999), b = oracle::random_state(rng, 0.999);
        EXPECT_GE(relative_entropy(a, b).value, 0.0);
    }
}

TEST(RelativeEntropy, SupportMismatchIsInfinite) {
    const auto pure = DensityMatrix::pure(1.0, 0.0);
    const auto other = DensityMatrix::pure(0.0, 1.0);
    const auto d = relative_entropy(DensityMatrix::maximally_mixed(), pure);
    EXPECT_TRUE(d.infinite);
    EXPECT_FALSE(d.finite());
    EXPECT_TRUE(relative_entropy(pure, other).infinite);
    EXPECT_TRUE(relative_entropy(pure, DensityMatrix::maximally_mixed()).finite());
}

TEST(Family, Values) {
    EXPECT_EQ(relative_entropy_family(1.3, 0.0).value, 0.0);
    for (double s : {0.2, 1.0, 3.0})
        EXPECT_NEAR(relative_entropy_family(s, M_PI / 2).value, s * std::tanh(s), 1e-12);
    EXPECT_NEAR(relative_entropy_family(1.0, M_PI).value, 2.0 * std::tanh(1.0), 1e-12);
    EXPECT_NEAR(2.0 * std::tanh(1.0), 1.5231883119115296, 1e-15);
}

TEST(Family, GenericMatchesClosedFormOnRandomAngles) {
    std::mt19937_64 rng(54);
    std::uniform_real_distribution<double> S(0.0, 6.0), T(-M_PI, M_PI);
    for (int k = 0; k < 100; ++k) {
        const double s = S(rng), t = T(rng);
        const auto f = relative_entropy_family(s, t);
        EXPECT_LE(f.residual, 1e-10 * std::max(1.0, f.closed_form));
    }
}

TEST(Metrics, Bkm) {
    EXPECT_EQ(bkm_metric(0.0).value, 0.0);
    EXPECT_NEAR(bkm_metric(1.0).value, 0.7615941559557649, 1e-15);
    EXPECT_NEAR(bkm_metric(1.0).numeric, std::tanh(1.0), 1e-5 * std::tanh(1.0));
    EXPECT_NEAR(bkm_metric(20.0).value / 20.0, 1.0, 1e-8);
    EXPECT_LE(bkm_metric(20.0).residual, 1e-5);
}

TEST(Metrics, Bures) {
    EXPECT_EQ(bures_metric(0.0).value, 0.0);
    EXPECT_NEAR(bures_metric(1.0).value, 0.5800256583859738, 1e-15);
    EXPECT_NEAR(bures_metric(1.0).numeric, 0.5800256583859738, 1e-5 * 0.58);
}

TEST(Metrics, BuresBelowBkm) {
    for (int i = 1; i <= 100; ++i) {
        const double s = 0.1 * i;
        EXPECT_LT(bures_metric(s).value, bkm_metric(s).value) << "s = " << s;
    }
}

TEST(Metrics, Ratio) {
    EXPECT_EQ(metric_ratio(0.0), 1.0);
    EXPECT_NEAR(metric_ratio(1e-4), 1.0, 1e-8);
    EXPECT_NEAR(metric_ratio(5.0), 5.000454019910097, 1e-12);
    EXPECT_NEAR(metric_ratio(5.0), bkm_metric(5.0).numeric / bures_metric(5.0).numeric, 1e-4);
    double prev = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double r = metric_ratio(20.0 * i / 199.0);
        if (i > 0) {
            EXPECT_GT(r, prev);
        }
        prev = r;
    }
}

TEST(Metrics, RejectNegativeTemperatureParameter) {
    EXPECT_THROW(bkm_metric(-1.0), InvalidInput);
    EXPECT_THROW(bures_metric(-1.0), InvalidInput);
    EXPECT_THROW(metric_ratio(-1.0), InvalidInput);
    EXPECT_THROW(rotation_state(-1.0, 0.0), InvalidInput);
}

TEST(ModularGenerator, Values) {
    EXPECT_LE(max_abs_diff(modular_generator(DensityMatrix::maximally_mixed()), std::log(2.0) * pauli::I()), 1e-15);
    for (double s : {0.3, 2.0}) {
        const auto K = modular_generator(rho_x(s));
        EXPECT_LE(max_abs_diff(K, std::log(2.0 * std::cosh(s)) * pauli::I() + s * pauli::X()), 1e-12);
        const auto e = oracle::expm(-1.0 * K);
        EXPECT_LE(max_abs_diff(e * (1.0 / e.trace()), rho_x(s).matrix()), 1e-10);
        EXPECT_TRUE(K.is_hermitian());
    }
    EXPECT_THROW(modular_generator(DensityMatrix::pure(1.0, 0.0)), SupportViolation);
}

TEST(Positivity, Report) {
    std::vector<double> grid;
    for (int i = 0; i <= 50; ++i) grid.push_back(0.1 * i);
    const auto r = entropy_positivity_report(grid);
    EXPECT_TRUE(r.all_nonnegative);
    EXPECT_TRUE(r.unique_zero_at_origin);
    EXPECT_TRUE(r.strictly_increasing);
    EXPECT_EQ(r.rows.front().D, 0.0);
}

TEST(GeometryReport, OriginRow) {
    const auto r = geometry_report(0.0);
    EXPECT_EQ(r.relative_entropy, 0.0);
    EXPECT_EQ(r.g_bkm, 0.0);
    EXPECT_EQ(r.g_bures, 0.0);
    EXPECT_EQ(r.ratio, 1.0);
}
