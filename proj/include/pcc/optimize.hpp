#pragma once

#include <functional>

#include <Eigen/Dense>

namespace pcc {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct OptimOptions {
    double ftol = 1e-9;             // simplex f-spread at which a run stops
    int max_evals_per_dim = 2000;   // evaluation budget is this times the dimension
    double initial_step = 0.25;     // simplex edge length in unconstrained units
    int max_restarts = 8;
    bool polish = true;             // Newton refinement after the simplex stops
    double gtol = 1e-7;             // gradient norm target for the polish
    double gtol_stalled = 1e-4;     // accepted when no further ascent is possible
    double xtol = 1e-10;            // Newton steps shorter than this end the polish
    int max_polish_iterations = 25;
    // Stop the polish once the Newton step predicts a gain below the rounding
    // noise of f. Meant for large joint fits, where a gradient target can sit
    // under the noise floor of central differences.
    bool stop_at_noise = false;
    // Build the polish Hessian from forward differences at step 1e-4, at
    // 1 + n + n(n+1)/2 evaluations instead of 1 + 2n^2. The gradient stays
    // central, so only the path to the optimum changes, not the optimum.
    bool forward_hessian = false;
};

struct OptimResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int evaluations = 0;
    int iterations = 0;
    int restarts = 0;
    double grad_norm = 0.0;
    bool converged = false;
};

// Maximizes f by Nelder-Mead with adaptive coefficients, restarting from the
// best vertex whenever the simplex collapses or a run ends, then optionally
// polishes with damped Newton steps on numerical derivatives.
// Throws DomainError if f(x0) is not finite and ConvergenceError (with the
// best point) if the evaluation budget runs out.
OptimResult maximize(const Objective& f, const Eigen::VectorXd& x0,
                     const OptimOptions& opts = {});

// One-dimensional maximization on [lo, hi] by Brent's method followed by a
// few safeguarded Newton steps.
OptimResult maximize_1d(const std::function<double(double)>& f, double lo, double hi,
                        const OptimOptions& opts = {});

// Newton refinement from x; never returns a point worse than x by more than
// the rounding noise of f. Reports convergence when the gradient norm drops
// below gtol, when the Newton step is shorter than xtol, or when the
// gradient is below gtol_stalled once no step can make further progress.
OptimResult newton_polish(const Objective& f, const Eigen::VectorXd& x,
                          const OptimOptions& opts = {});

// Central differences with step 1e-5 * max(1, |x_i|).
Eigen::VectorXd numerical_gradient(const Objective& f, const Eigen::VectorXd& x);
Eigen::MatrixXd numerical_hessian(const Objective& f, const Eigen::VectorXd& x);
// Forward differences with step 1e-4 * max(1, |x_i|); f0 = f(x).
Eigen::MatrixXd forward_hessian(const Objective& f, const Eigen::VectorXd& x, double f0);

// Newton from x0 first, Nelder-Mead (then Newton) only if that stalls away
// from a stationary point. Suited to starts that are already close.
OptimResult maximize_from_close_start(const Objective& f, const Eigen::VectorXd& x0,
                                      const OptimOptions& opts = {});

}  // namespace pcc
