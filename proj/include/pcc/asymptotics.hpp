#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pcc/estimation.hpp"

namespace pcc {

// Closed-form asymptotic covariances for the trivariate Gaussian D-vine with
// parameters ordered (rho12, rho23, rho13), the level-2 slot holding the
// unconditional correlation.
struct GaussianAnalytic {
    Eigen::Matrix3d V_ML;
    Eigen::Matrix3d K_theta;
    Eigen::Matrix3d J_theta;
    Eigen::Matrix3d B_SSP;
    Eigen::Matrix3d V_SSP;
};

GaussianAnalytic trivariate_gaussian_analytic(double rho12, double rho23, double rho13);

double partial_correlation(double rho12, double rho23, double rho13);
// Jacobian of (rho12, rho23, rho13) -> (rho12, rho23, rho13|2).
Eigen::Matrix3d partial_correlation_jacobian(double rho12, double rho23, double rho13);

struct SandwichParts {
    Eigen::MatrixXd K;  // (1/n) sum psi psi'
    Eigen::MatrixXd J;  // -(1/n) sum d psi / d theta', zero above the level blocks
    Eigen::MatrixXd B;  // contribution of the rank transforms
    // W[j] is the n x p matrix of W_j evaluated at the observed U_j.
    std::vector<Eigen::MatrixXd> W;
    std::vector<int> level_of;  // level of each parameter
};

struct CovMatrix {
    std::string method;
    Eigen::MatrixXd V;  // scaled so that se_i = sqrt(V_ii / n)
    long n = 0;
    Eigen::VectorXd se() const;
};

// Score vectors psi(u; theta) of every row: column p is the derivative of
// the log density of the edge owning parameter p, at that edge's arguments.
Eigen::MatrixXd ssp_scores(const VineSpec& spec, const Eigen::MatrixXd& U);

// Plug-in sandwich for the SSP estimator. Only d <= 3 is supported. W_j
// integrals use mc_points quasi-random draws from the fitted copula.
CovMatrix ssp_sandwich(const Eigen::MatrixXd& U, const VineSpec& fitted, long mc_points = 100000,
                       SandwichParts* parts = nullptr);

struct Uncertainty {
    std::string kind;  // "bootstrap" or "fisher"
    std::vector<std::string> labels;
    Eigen::VectorXd estimate, se, lower, upper;
    int replicates = 0;
    int failed = 0;
    std::vector<std::string> failures;  // first few failure messages
};

// theta-hat +/- Phi^-1(0.975) * se.
void fill_normal_ci(Uncertainty& u);

struct BootstrapOptions {
    int replicates = 500;
    std::uint64_t seed = 1;
    int threads = 1;
    double max_fail_fraction = 0.10;
    FitOptions fit;
};

// Parametric bootstrap: resample n rows from the fitted model, refit with
// the same method. SSP and SP refit on pseudo-observations of the draws;
// IFM and ML draw on the data scale through the fitted margins and report
// marginal parameters first.
Uncertainty bootstrap_se(const FitResult& fit, long n, const BootstrapOptions& opts = {});

// Standard errors for an ML fit from the outer-product-of-scores estimate of
// the information matrix. Marginal parameters come first.
Uncertainty ml_fisher_ci(const FitResult& fit, const Eigen::MatrixXd& X);

struct EfficiencyConfig {
    VineSpec truth;
    std::vector<MarginModel> margins;
    long n = 1000;
    int replicates = 100;
    std::vector<Method> methods{Method::ML, Method::IFM, Method::SP, Method::SSP};
    std::uint64_t seed = 1;
    int threads = 1;
    double max_fail_fraction = 0.10;
    FitOptions fit;
};

struct MethodSummary {
    Method method = Method::ML;
    Eigen::VectorXd mean, variance, rmse, efficiency;  // efficiency = Var_ML / Var_method
    Eigen::MatrixXd estimates;                          // replicates x params
};

struct EfficiencyTable {
    std::vector<std::string> labels;
    std::vector<int> level_of;
    Eigen::VectorXd truth;
    std::vector<MethodSummary> methods;
    int replicates_used = 0;
    int failed = 0;
    // Efficiency averaged within each vine level: rows follow `methods`.
    Eigen::MatrixXd level_efficiency;
};

EfficiencyTable efficiency_study(const EfficiencyConfig& config);

}  // namespace pcc
