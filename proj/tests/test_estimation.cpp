#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "pcc/asymptotics.hpp"
#include "pcc/errors.hpp"
#include "pcc/estimation.hpp"
#include "pcc/optimize.hpp"
#include "oracles.hpp"

using namespace pcc;

namespace {

Eigen::MatrixXd simulate_pseudo(const VineSpec& spec, int n, std::uint64_t seed) {
    return pseudo_observations(simulate(spec, n, seed));
}

VineSpec gumbel3(double a, double b, double c) {
    return VineSpec(VineKind::DVine, 3, {PairCopula::gumbel(a), PairCopula::gumbel(b), PairCopula::gumbel(c)});
}

// sum x_a x_b / sqrt(sum x_a^2 sum x_b^2): the correlation of a zero-mean
// normal sample with unknown scales.
double uncentered_correlation(const Eigen::MatrixXd& X, int a, int b) {
    return X.col(a).dot(X.col(b)) / std::sqrt(X.col(a).squaredNorm() * X.col(b).squaredNorm());
}

}  // namespace

TEST(FitSspTest, EqualsSpInTwoDimensions) {
    const std::vector<PairCopula> pairs{PairCopula::gaussian(-0.4), PairCopula::student_t(0.6, 5.0),
                                        PairCopula::gumbel(1.8)};
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const VineSpec truth(VineKind::DVine, 2, {pairs[k]});
        const Eigen::MatrixXd U = simulate_pseudo(truth, 600, 40 + k);
        const FitResult ssp = fit_ssp(U, truth.skeleton());
        EXPECT_EQ(fit_sp(U, truth.skeleton()).theta_hat, ssp.theta_hat);
        // Started away from the SSP solution, the joint search has to find it
        // on its own. The likelihood is so flat in nu that rounding noise in
        // the numerical gradient moves the stopping point by a few 1e-8.
        const Eigen::VectorXd u = U.col(0), v = U.col(1);
        const PairCopula moment =
            tau_inversion(pairs[k].family(), 0.8 * sample_kendall_tau({u.data(), 600}, {v.data(), 600}), 15.0);
        const std::vector<double> p0 = moment.params();
        const FitResult sp = fit_sp(U, truth.skeleton(), Eigen::Map<const Eigen::VectorXd>(p0.data(), moment.size()));
        EXPECT_NEAR(sp.theta_hat[0], ssp.theta_hat[0], 1e-8) << pairs[k].describe();
        if (sp.theta_hat.size() > 1) {
            EXPECT_NEAR(sp.theta_hat[1], ssp.theta_hat[1], 1e-6);
        }
        EXPECT_NEAR(ssp.loglik, sp.loglik, 1e-9);
    }
}

TEST(FitSspTest, GaussianWithinThreeAsymptoticSEs) {
    const double r12 = 0.5, r23 = 0.5, partial = 0.2;
    const double r13 = partial * std::sqrt((1 - r12 * r12) * (1 - r23 * r23)) + r12 * r23;
    const VineSpec truth(VineKind::DVine, 3,
                         {PairCopula::gaussian(r12), PairCopula::gaussian(r23), PairCopula::gaussian(partial)});
    const int n = 5000;
    const FitResult fit = fit_ssp(simulate_pseudo(truth, n, 3), truth.skeleton());
    // The closed form is in (rho12, rho23, rho13); map it to the vine
    // parametrization with the delta method.
    const Eigen::Matrix3d G = partial_correlation_jacobian(r12, r23, r13);
    const Eigen::Matrix3d V = G * trivariate_gaussian_analytic(r12, r23, r13).V_SSP * G.transpose();
    for (int i = 0; i < 3; ++i)
        EXPECT_LT(std::abs(fit.theta_hat[i] - truth.theta()[i]), 3.0 * std::sqrt(V(i, i) / n)) << i;
}

TEST(FitSspTest, AllIndependence) {
    const Skeleton sk(VineKind::CVine, 4, std::vector<Family>(6, Family::Independence));
    const FitResult fit = fit_ssp(simulate_pseudo(VineSpec(sk), 100, 1), sk);
    EXPECT_EQ(fit.theta_hat.size(), 0);
    EXPECT_EQ(fit.loglik, 0.0);
    EXPECT_TRUE(fit.converged);
}

TEST(FitSspTest, EstimatingEquationsHold) {
    // Each edge's own score, summed over the sample, vanishes at the SSP
    // solution. Derivatives are taken here on the natural parameters.
    for (VineKind kind : {VineKind::DVine, VineKind::CVine}) {
        const VineSpec truth(kind, 4,
                             {PairCopula::gumbel(1.5), PairCopula::gaussian(0.4), PairCopula::student_t(-0.3, 6.0),
                              PairCopula::gumbel(1.2), PairCopula::gaussian(0.2), PairCopula::gumbel(1.1)});
        const FitResult fit = fit_ssp(simulate_pseudo(truth, 1500, 8), truth.skeleton());
        const auto args = level_arguments(fit.spec, simulate_pseudo(truth, 1500, 8));
        for (int l = 0; l < 3; ++l)
            for (int e = 0; e < fit.spec.edges_in_level(l); ++e) {
                const PairCopula& c = fit.spec.edge(l, e);
                const auto& u = args[l].first[e];
                const auto& v = args[l].second[e];
                auto f = [&](const Eigen::VectorXd& p) {
                    return pair_loglik(PairCopula(c.family(), std::span<const double>(p.data(), p.size())), u, v);
                };
                const std::vector<double> par = c.params();
                const Eigen::Map<const Eigen::VectorXd> p(par.data(), c.size());
                EXPECT_LT(numerical_gradient(f, p).norm(), 1e-4) << l << "," << e;
            }
    }
}

TEST(FitSspTest, LevelOneUntouchedByOtherColumns) {
    const VineSpec truth = gumbel3(1.5, 1.3, 1.2);
    const Eigen::MatrixXd U = simulate_pseudo(truth, 500, 9);
    Eigen::MatrixXd V = U;
    // New third column: only the (2,3) edge and the level above can change.
    V.col(2) = simulate_pseudo(truth, 500, 10).col(2);
    const FitResult a = fit_ssp(U, truth.skeleton());
    const FitResult b = fit_ssp(V, truth.skeleton());
    EXPECT_EQ(a.theta_hat[0], b.theta_hat[0]);
    EXPECT_NE(a.theta_hat[1], b.theta_hat[1]);
    // Monotone transforms of the raw data leave ranks, and every estimate, alone.
    Eigen::MatrixXd X = simulate(truth, 500, 9);
    const Eigen::MatrixXd Y = X.array().log().matrix();
    EXPECT_EQ(fit_ssp(pseudo_observations(X), truth.skeleton()).theta_hat,
              fit_ssp(pseudo_observations(Y), truth.skeleton()).theta_hat);
}

TEST(FitSspTest, ThreadCountDoesNotChangeResults) {
    const VineSpec truth(VineKind::DVine, 5, std::vector<PairCopula>(10, PairCopula::gumbel(1.4)));
    const Eigen::MatrixXd U = simulate_pseudo(truth, 400, 11);
    FitOptions one, four;
    four.threads = 4;
    EXPECT_EQ(fit_ssp(U, truth.skeleton(), one).theta_hat, fit_ssp(U, truth.skeleton(), four).theta_hat);
}

TEST(FitSspTest, EdgeFailuresAreTagged) {
    Eigen::MatrixXd U = simulate_pseudo(gumbel3(1.5, 1.5, 1.5), 100, 12);
    U.col(1).setConstant(0.5);
    U.col(2).setConstant(0.5);
    try {
        fit_ssp(U, gumbel3(1.5, 1.5, 1.5).skeleton());
        FAIL() << "expected FitError";
    } catch (const FitError& e) {
        EXPECT_EQ(e.level(), 1);
        EXPECT_EQ(e.edge(), 2);
    }
    EXPECT_THROW(fit_ssp(U.topRows(5), gumbel3(1.5, 1.5, 1.5).skeleton()), DomainError);
}

TEST(FitSpTest, BeatsSspOnGumbel) {
    const VineSpec truth = gumbel3(2.0, 1.5, 1.3);
    const Eigen::MatrixXd U = simulate_pseudo(truth, 5000, 13);
    const FitResult ssp = fit_ssp(U, truth.skeleton());
    const FitResult sp = fit_sp(U, truth.skeleton());
    EXPECT_GE(sp.loglik, ssp.loglik - 1e-6);
    EXPECT_NEAR(sp.loglik, vine_loglik(sp.spec, U), 1e-8);
    EXPECT_TRUE(sp.converged);
}

TEST(FitSpTest, ParameterCap) {
    const VineSpec truth = gumbel3(1.5, 1.5, 1.5);
    const Eigen::MatrixXd U = simulate_pseudo(truth, 200, 14);
    FitOptions capped;
    capped.param_cap = 2;
    EXPECT_THROW(fit_sp(U, truth.skeleton(), std::nullopt, capped), DomainError);
    // SSP has no cap.
    EXPECT_NO_THROW(fit_ssp(U, truth.skeleton(), capped));
    capped.force_large = true;
    EXPECT_NO_THROW(fit_sp(U, truth.skeleton(), std::nullopt, capped));
    const std::vector<MarginFamily> expo(3, MarginFamily::Exponential);
    capped.force_large = false;
    EXPECT_THROW(fit_ml(-U.array().log().matrix(), expo, truth.skeleton(), std::nullopt, capped), DomainError);
}

TEST(FitIfmTest, GaussianEqualsNormalScoreCorrelations) {
    // With zero-mean normal margins both IFM and ML reduce to the empirical
    // second-moment correlations.
    const VineSpec truth(VineKind::DVine, 3,
                         {PairCopula::gaussian(0.6), PairCopula::gaussian(-0.3), PairCopula::gaussian(0.25)});
    const std::vector<MarginModel> margins{MarginModel::normal(1.0), MarginModel::normal(2.5),
                                           MarginModel::normal(0.4)};
    const Eigen::MatrixXd X = apply_margin_quantiles(margins, simulate(truth, 800, 15));
    const std::vector<MarginFamily> fams(3, MarginFamily::Normal);
    const double r12 = uncentered_correlation(X, 0, 1), r23 = uncentered_correlation(X, 1, 2),
                 r13 = uncentered_correlation(X, 0, 2);
    const Eigen::Vector3d expected(r12, r23, partial_correlation(r12, r23, r13));
    const FitResult ifm = fit_ifm(X, fams, truth.skeleton());
    const FitResult ml = fit_ml(X, fams, truth.skeleton());
    EXPECT_LT((ifm.theta_hat - expected).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((ml.theta_hat - expected).cwiseAbs().maxCoeff(), 1e-6);
    for (int j = 0; j < 3; ++j)
        EXPECT_NEAR(ifm.margins[j].param(0), std::sqrt(X.col(j).squaredNorm() / X.rows()), 1e-12);

    const VineSpec two(VineKind::DVine, 2, {PairCopula::gaussian(0.5)});
    const Eigen::MatrixXd X2 = apply_margin_quantiles({margins[0], margins[1]}, simulate(two, 500, 16));
    const FitResult i2 = fit_ifm(X2, {MarginFamily::Normal, MarginFamily::Normal}, two.skeleton());
    const FitResult m2 = fit_ml(X2, {MarginFamily::Normal, MarginFamily::Normal}, two.skeleton());
    EXPECT_NEAR(i2.theta_hat[0], uncentered_correlation(X2, 0, 1), 1e-6);
    EXPECT_NEAR(i2.theta_hat[0], m2.theta_hat[0], 1e-6);
}

TEST(FitIfmTest, GumbelWithExponentialMargins) {
    const VineSpec truth(VineKind::DVine, 2, {PairCopula::gumbel(2.0)});
    const std::vector<MarginModel> margins(2, MarginModel::exponential(1.0));
    const std::vector<MarginFamily> fams(2, MarginFamily::Exponential);
    std::vector<double> est;
    for (std::uint64_t s = 0; s < 20; ++s)
        est.push_back(fit_ifm(apply_margin_quantiles(margins, simulate(truth, 5000, 100 + s)), fams, truth.skeleton())
                          .theta_hat[0]);
    const Eigen::Map<Eigen::VectorXd> e(est.data(), est.size());
    const double sd = std::sqrt((e.array() - e.mean()).square().sum() / (e.size() - 1));
    EXPECT_LT(std::abs(est[0] - 2.0), 3.0 * sd);
    EXPECT_LT(std::abs(e.mean() - 2.0), 3.0 * sd / std::sqrt(20.0));
}

TEST(FitIfmTest, MisspecifiedMarginsPullAwayFromSp) {
    // Exponential margins fitted to generalized gamma data distort the
    // probability transforms; rank-based SP is unaffected.
    const VineSpec truth(VineKind::DVine, 2, {PairCopula::gumbel(3.0)});
    const std::vector<MarginModel> margins(2, MarginModel::generalized_gamma(0.6, 3.0, 2.2));
    const std::vector<MarginFamily> fams(2, MarginFamily::Exponential);
    const int reps = 20;
    std::vector<double> ifm, sp;
    for (int r = 0; r < reps; ++r) {
        const Eigen::MatrixXd X = apply_margin_quantiles(margins, simulate(truth, 2000, 200 + r));
        ifm.push_back(fit_ifm(X, fams, truth.skeleton()).theta_hat[0]);
        sp.push_back(fit_sp(pseudo_observations(X), truth.skeleton()).theta_hat[0]);
    }
    const Eigen::Map<Eigen::VectorXd> s(sp.data(), reps);
    const double se = std::sqrt((s.array() - s.mean()).square().sum() / (reps - 1));
    int far = 0;
    for (int r = 0; r < reps; ++r) far += std::abs(ifm[r] - sp[r]) > 2.0 * se;
    EXPECT_GE(far, reps / 2);
}

TEST(FitMlTest, AtLeastIfmLikelihood) {
    const VineSpec truth(VineKind::DVine, 2, {PairCopula::gumbel(1.7)});
    const std::vector<MarginModel> margins{MarginModel::exponential(1.0), MarginModel::exponential(2.0)};
    const std::vector<MarginFamily> fams(2, MarginFamily::Exponential);
    const Eigen::MatrixXd X = apply_margin_quantiles(margins, simulate(truth, 1000, 17));
    const FitResult ifm = fit_ifm(X, fams, truth.skeleton());
    const FitResult ml = fit_ml(X, fams, truth.skeleton());
    EXPECT_GE(ml.loglik, ifm.loglik - 1e-6);
    EXPECT_NEAR(ml.loglik, full_loglik(ml.spec, ml.margins, X), 1e-8);
    EXPECT_NEAR(ifm.loglik, full_loglik(ifm.spec, ifm.margins, X), 1e-8);
    EXPECT_EQ(ml.alpha_hat().size(), 2);
    EXPECT_EQ(ml.alpha_labels().size(), 2u);
}

TEST(FitMlTest, RmseNoWorseThanSsp) {
    // 200 replicates at n = 2000 on the Gumbel configuration with true
    // exponential margins.
    EfficiencyConfig cfg;
    cfg.truth = gumbel3(1.2, 1.2, 1.2);
    cfg.margins.assign(3, MarginModel::exponential(1.0));
    cfg.n = 2000;
    cfg.replicates = 200;
    cfg.methods = {Method::ML, Method::SSP};
    cfg.seed = 18;
    const EfficiencyTable t = efficiency_study(cfg);
    for (int p = 0; p < 3; ++p)
        EXPECT_LE(t.methods[0].rmse[p], 1.1 * t.methods[1].rmse[p]) << t.labels[p];
}

TEST(FitMethodTest, DispatchAndParsing) {
    EXPECT_EQ(parse_method("ssp"), Method::SSP);
    EXPECT_EQ(parse_method("ML"), Method::ML);  // case-insensitive
    EXPECT_THROW(parse_method("mle"), DomainError);
    const VineSpec truth = gumbel3(1.5, 1.5, 1.5);
    const Eigen::MatrixXd X = apply_margin_quantiles(std::vector<MarginModel>(3, MarginModel::exponential(1.0)),
                                                     simulate(truth, 300, 19));
    const Eigen::MatrixXd U = pseudo_observations(X);
    const std::vector<MarginFamily> fams(3, MarginFamily::Exponential);
    EXPECT_EQ(fit_method(Method::SSP, X, U, fams, truth.skeleton()).theta_hat, fit_ssp(U, truth.skeleton()).theta_hat);
    EXPECT_EQ(fit_method(Method::IFM, X, U, fams, truth.skeleton()).method, Method::IFM);
}
