#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pcc/copula.hpp"
#include "pcc/margins.hpp"
#include "pcc/optimize.hpp"
#include "pcc/vine.hpp"

namespace pcc {

enum class Method { ML, IFM, SP, SSP };

std::string_view method_name(Method m);
Method parse_method(std::string_view s);

struct FitOptions {
    OptimOptions optim = [] {
        OptimOptions o;
        o.initial_step = 0.1;
        return o;
    }();
    PairFitOptions pair;
    int param_cap = 60;        // SP and ML refuse larger problems...
    bool force_large = false;  // ...unless forced
    int threads = 1;           // SSP fits the edges of a level concurrently
};

struct LevelDiagnostics {
    int level = 0;  // 0-based
    bool converged = true;
    int evaluations = 0;
    double loglik = 0.0;
    double max_grad_norm = 0.0;
};

struct FitResult {
    Method method = Method::SSP;
    VineSpec spec;                     // vine at the estimate
    Eigen::VectorXd theta_hat;         // level-major, edge-minor
    std::vector<MarginModel> margins;  // ML and IFM only
    double loglik = 0.0;               // objective value (see below)
    double copula_loglik = 0.0;        // sum of log pair-copula densities
    double margin_loglik = 0.0;        // ML and IFM only
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    double grad_norm = 0.0;
    std::vector<LevelDiagnostics> levels;  // SSP only

    // For SSP and SP `loglik` is the pseudo log-likelihood; for ML and IFM it
    // is the full log-likelihood (margins plus copula).

    std::vector<std::string> theta_labels() const { return spec.param_labels(); }
    Eigen::VectorXd alpha_hat() const;
    std::vector<std::string> alpha_labels() const;
};

// Sum of the level-l pair-copula log densities at the given arguments.
double level_loglik(const VineSpec& spec, const LevelArguments& args);

// Stepwise semiparametric estimation: one level at a time, each edge on its
// own, arguments of deeper levels built from the fresh estimates.
FitResult fit_ssp(const Eigen::MatrixXd& U, const Skeleton& skeleton, const FitOptions& opts = {});

// Joint maximum pseudo-likelihood. Starts from the SSP estimate by default.
FitResult fit_sp(const Eigen::MatrixXd& U, const Skeleton& skeleton,
                 std::optional<Eigen::VectorXd> theta0 = std::nullopt, const FitOptions& opts = {});

// Inference functions for margins: margins first, then the copula with the
// parametric probability transforms plugged in.
FitResult fit_ifm(const Eigen::MatrixXd& X, const std::vector<MarginFamily>& margin_families,
                  const Skeleton& skeleton, std::optional<Eigen::VectorXd> theta0 = std::nullopt,
                  const FitOptions& opts = {});

struct MLStart {
    std::vector<MarginModel> margins;
    Eigen::VectorXd theta;
};

// Joint maximum likelihood over margins and copula. Default start is the
// marginal MLEs together with the SSP estimate on pseudo-observations.
FitResult fit_ml(const Eigen::MatrixXd& X, const std::vector<MarginFamily>& margin_families,
                 const Skeleton& skeleton, std::optional<MLStart> start = std::nullopt,
                 const FitOptions& opts = {});

// Dispatches on method. U is only used by SSP and SP, X only by IFM and ML.
FitResult fit_method(Method m, const Eigen::MatrixXd& X, const Eigen::MatrixXd& U,
                     const std::vector<MarginFamily>& margin_families, const Skeleton& skeleton,
                     const FitOptions& opts = {});

// Full log-likelihood at given margins and vine.
double full_loglik(const VineSpec& spec, const std::vector<MarginModel>& margins, const Eigen::MatrixXd& X);

}  // namespace pcc
