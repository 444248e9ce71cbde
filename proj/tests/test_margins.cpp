#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "pcc/errors.hpp"
#include "pcc/margins.hpp"

using namespace pcc;

namespace {

std::vector<double> draws(const MarginModel& m, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<double> x(n);
    for (auto& a : x) a = marg_quantile(m, U(rng));
    return x;
}

double loglik(const MarginModel& m, const std::vector<double>& x) {
    double s = 0.0;
    for (double a : x) s += marg_log_pdf(m, a);
    return s;
}

std::vector<MarginModel> models() {
    return {MarginModel::normal(2.0), MarginModel::exponential(0.7), MarginModel::student_t(3.5),
            MarginModel::generalized_gamma(2.0, 1.5, 0.8), MarginModel::generalized_gamma(0.6, 3.0, 2.2)};
}

}  // namespace

TEST(MarginModelTest, ValidatesParameters) {
    EXPECT_THROW(MarginModel::normal(0.0), DomainError);
    EXPECT_THROW(MarginModel::exponential(-1.0), DomainError);
    EXPECT_THROW(MarginModel::student_t(2.0), DomainError);
    EXPECT_THROW(MarginModel::generalized_gamma(1.0, 0.0, 1.0), DomainError);
    EXPECT_THROW(MarginModel(MarginFamily::Normal, {1.0, 2.0}), DomainError);
    EXPECT_EQ(parse_margin_family("exponential"), MarginFamily::Exponential);
    EXPECT_EQ(parse_margin_family("gengamma"), MarginFamily::GeneralizedGamma);
    EXPECT_THROW(parse_margin_family("weibull"), DomainError);
}

TEST(MarginModelTest, KnownValues) {
    const auto gg = MarginModel::generalized_gamma(1.0, 1.0, 1.0);
    for (double x : {0.01, 0.5, 3.0}) EXPECT_NEAR(marg_pdf(gg, x), std::exp(-x), 1e-14);
    const auto e2 = MarginModel::exponential(2.0);
    EXPECT_DOUBLE_EQ(marg_cdf(e2, 0.0), 0.0);
    EXPECT_NEAR(marg_quantile(e2, 1.0 - std::exp(-2.0)), 1.0, 1e-14);
    EXPECT_DOUBLE_EQ(marg_cdf(MarginModel::student_t(6.0), 0.0), 0.5);
    EXPECT_NEAR(marg_pdf(MarginModel::normal(2.0), 1.0), std::exp(-0.125) / (2.0 * std::sqrt(2.0 * M_PI)), 1e-15);
    // With p = 1 the generalized gamma is a gamma(shape gamma, scale beta).
    const auto g = MarginModel::generalized_gamma(3.0, 2.0, 1.0);
    EXPECT_NEAR(marg_pdf(g, 1.5), 1.5 * 1.5 * std::exp(-0.75) / (8.0 * 2.0), 1e-14);
}

TEST(MarginModelTest, QuantileInvertsCdf) {
    for (const auto& m : models()) {
        for (int i = 1; i <= 999; ++i) {
            const double p = i / 1000.0;
            ASSERT_NEAR(marg_cdf(m, marg_quantile(m, p)), p, 1e-8) << m.describe() << " p=" << p;
        }
        EXPECT_LT(marg_cdf(m, marg_quantile(m, 0.2)), marg_cdf(m, marg_quantile(m, 0.2) + 1e-3));
    }
}

TEST(MarginModelTest, DensityIsCdfDerivative) {
    for (const auto& m : models())
        for (double p : {0.05, 0.4, 0.9}) {
            const double x = marg_quantile(m, p), e = 1e-6 * std::max(1.0, std::abs(x));
            const double fd = (marg_cdf(m, x + e) - marg_cdf(m, x - e)) / (2 * e);
            EXPECT_NEAR(marg_pdf(m, x), fd, 1e-6 * std::max(1.0, fd)) << m.describe();
        }
}

TEST(MarginModelTest, UnconstrainedRoundTrip) {
    for (const auto& m : models()) {
        const auto back = MarginModel::from_unconstrained(m.family(), m.to_unconstrained());
        for (int k = 0; k < m.size(); ++k) EXPECT_NEAR(back.param(k), m.param(k), 1e-12);
    }
}

TEST(FitMarginTest, ExponentialIsClosedForm) {
    const auto x = draws(MarginModel::exponential(1.0), 10000, 1);
    double mean = 0.0;
    for (double a : x) mean += a;
    mean /= x.size();
    const MarginFit f = fit_margin(MarginFamily::Exponential, x);
    EXPECT_DOUBLE_EQ(f.model.param(0), 1.0 / mean);
}

TEST(FitMarginTest, NormalScale) {
    const int n = 10000;
    const auto x = draws(MarginModel::normal(2.0), n, 2);
    const MarginFit f = fit_margin(MarginFamily::Normal, x);
    EXPECT_NEAR(f.model.param(0), 2.0, 3 * 2.0 / std::sqrt(2.0 * n));
}

TEST(FitMarginTest, StudentT) {
    const auto x = draws(MarginModel::student_t(5.0), 5000, 3);
    const MarginFit f = fit_margin(MarginFamily::StudentT, x);
    EXPECT_NEAR(f.model.param(0), 5.0, 1.5);
    EXPECT_LT(f.grad_norm, 1e-5);
}

TEST(FitMarginTest, GeneralizedGammaOnExponentialData) {
    // SE of the shape parameters at n = 5000 is roughly 0.04-0.06, so three
    // SEs is about 0.15.
    const auto x = draws(MarginModel::exponential(1.0), 5000, 4);
    const MarginFit f = fit_margin(MarginFamily::GeneralizedGamma, x);
    EXPECT_NEAR(f.model.param(0), 1.0, 0.15);
    EXPECT_NEAR(f.model.param(2), 1.0, 0.15);
    EXPECT_LT(f.grad_norm, 1e-5);
}

TEST(FitMarginTest, MaximumBeatsTruth) {
    for (const auto& m : models()) {
        for (std::uint64_t seed = 10; seed < 13; ++seed) {
            const auto x = draws(m, 400, seed);
            const MarginFit f = fit_margin(m.family(), x);
            EXPECT_GE(f.loglik, loglik(m, x) - 1e-9) << m.describe();
            EXPECT_NEAR(f.loglik, loglik(f.model, x), 1e-8);
        }
    }
}

TEST(FitMarginTest, RejectsDataOutsideSupport) {
    std::vector<double> x(50, 1.0);
    x[7] = -0.5;
    EXPECT_THROW(fit_margin(MarginFamily::Exponential, x), SupportError);
    EXPECT_THROW(fit_margin(MarginFamily::GeneralizedGamma, x), SupportError);
}

TEST(PseudoObservationsTest, Examples) {
    const std::vector<double> a{5.1, 2.2, 9.9};
    const auto pa = pseudo_observations(a);
    EXPECT_DOUBLE_EQ(pa[0], 0.5);
    EXPECT_DOUBLE_EQ(pa[1], 0.25);
    EXPECT_DOUBLE_EQ(pa[2], 0.75);
    const auto pb = pseudo_observations(std::vector<double>{1, 2, 3, 4});
    EXPECT_DOUBLE_EQ(pb[0], 0.2);
    EXPECT_DOUBLE_EQ(pb[3], 0.8);
    const auto pc = pseudo_observations(std::vector<double>{1, 1, 2});
    EXPECT_DOUBLE_EQ(pc[0], 0.375);
    EXPECT_DOUBLE_EQ(pc[1], 0.375);
    EXPECT_DOUBLE_EQ(pc[2], 0.75);
}

TEST(PseudoObservationsTest, InvariantUnderMonotoneTransforms) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> N;
    Eigen::MatrixXd X(200, 2);
    for (Eigen::Index i = 0; i < X.rows(); ++i) X.row(i) << N(rng), N(rng);
    Eigen::MatrixXd Y = X;
    Y.col(0) = X.col(0).array().exp();
    Y.col(1) = X.col(1).array().cube() * 3.0 + 1.0;
    const Eigen::MatrixXd P = pseudo_observations(X);
    EXPECT_EQ(P, pseudo_observations(Y));
    // No ties: each column is a permutation of k / (n + 1).
    std::vector<double> c(P.col(0).data(), P.col(0).data() + P.rows());
    std::sort(c.begin(), c.end());
    for (std::size_t k = 0; k < c.size(); ++k) EXPECT_DOUBLE_EQ(c[k], (k + 1) / 201.0);
}
