#include "pcc/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "pcc/errors.hpp"

namespace pcc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double step_for(double x) { return 1e-5 * std::max(1.0, std::abs(x)); }

std::vector<double> to_std(const Eigen::VectorXd& x) { return {x.data(), x.data() + x.size()}; }

// Wraps f so that NaN counts as -inf and every call is counted against the
// budget. Keeps track of the best point seen for error reporting.
class Counted {
public:
    Counted(const Objective& f, long budget) : f_(f), budget_(budget) {}

    double operator()(const Eigen::VectorXd& x) {
        if (evals_ >= budget_) {
            throw ConvergenceError("evaluation budget of " + std::to_string(budget_) +
                                       " exhausted",
                                   to_std(best_x_), best_f_);
        }
        ++evals_;
        double v = f_(x);
        if (!std::isfinite(v)) v = kNegInf;
        if (v > best_f_ || best_x_.size() == 0) {
            best_f_ = v;
            best_x_ = x;
        }
        return v;
    }

    long evals() const { return evals_; }

private:
    const Objective& f_;
    long budget_;
    long evals_ = 0;
    double best_f_ = kNegInf;
    Eigen::VectorXd best_x_;
};

struct RunOutcome {
    Eigen::VectorXd x;
    double f;
    int iterations;
};

RunOutcome nelder_mead_run(Counted& f, const Eigen::VectorXd& x0, double f0, double step,
                           double ftol) {
    const int n = static_cast<int>(x0.size());
    const double dn = n;
    const double alpha = 1.0;
    const double beta = 1.0 + 2.0 / dn;
    const double gamma = 0.75 - 0.5 / dn;
    const double delta = 1.0 - 1.0 / dn;

    std::vector<Eigen::VectorXd> simplex(n + 1, x0);
    std::vector<double> fv(n + 1, f0);
    for (int i = 0; i < n; ++i) {
        simplex[i + 1](i) += step;
        fv[i + 1] = f(simplex[i + 1]);
    }

    std::vector<int> order(n + 1);
    int iterations = 0;
    for (;;) {
        std::iota(order.begin(), order.end(), 0);
        // Descending by value: order[0] is the best vertex (we maximize).
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fv[a] > fv[b]; });
        const int best = order[0];
        const int worst = order[n];
        const int second_worst = order[n - 1];

        const double spread = fv[best] - fv[worst];
        if (std::isfinite(spread) && spread < ftol) break;

        // Collapse check: all vertices numerically on top of the best one.
        double diameter = 0.0;
        for (int i = 0; i <= n; ++i)
            diameter = std::max(diameter, (simplex[i] - simplex[best]).lpNorm<Eigen::Infinity>());
        if (diameter < 1e-13 * std::max(1.0, simplex[best].lpNorm<Eigen::Infinity>())) break;

        ++iterations;
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (int i = 0; i <= n; ++i)
            if (i != worst) centroid += simplex[i];
        centroid /= dn;

        const Eigen::VectorXd xr = centroid + alpha * (centroid - simplex[worst]);
        const double fr = f(xr);
        if (fr > fv[best]) {
            const Eigen::VectorXd xe = centroid + beta * (xr - centroid);
            const double fe = f(xe);
            if (fe > fr) {
                simplex[worst] = xe;
                fv[worst] = fe;
            } else {
                simplex[worst] = xr;
                fv[worst] = fr;
            }
            continue;
        }
        if (fr > fv[second_worst]) {
            simplex[worst] = xr;
            fv[worst] = fr;
            continue;
        }
        bool shrink = false;
        if (fr > fv[worst]) {
            const Eigen::VectorXd xc = centroid + gamma * (xr - centroid);
            const double fc = f(xc);
            if (fc >= fr) {
                simplex[worst] = xc;
                fv[worst] = fc;
            } else {
                shrink = true;
            }
        } else {
            const Eigen::VectorXd xc = centroid - gamma * (xr - centroid);
            const double fc = f(xc);
            if (fc > fv[worst]) {
                simplex[worst] = xc;
                fv[worst] = fc;
            } else {
                shrink = true;
            }
        }
        if (shrink) {
            for (int i = 0; i <= n; ++i) {
                if (i == best) continue;
                simplex[i] = simplex[best] + delta * (simplex[i] - simplex[best]);
                fv[i] = f(simplex[i]);
            }
        }
    }
    const int best = static_cast<int>(std::max_element(fv.begin(), fv.end()) - fv.begin());
    return {simplex[best], fv[best], iterations};
}

}  // namespace

Eigen::VectorXd numerical_gradient(const Objective& f, const Eigen::VectorXd& x) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = step_for(x(i));
        xp(i) = x(i) + h;
        const double fp = f(xp);
        xp(i) = x(i) - h;
        const double fm = f(xp);
        xp(i) = x(i);
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw DomainError("objective is not finite near the differentiation point");
        g(i) = (fp - fm) / (2.0 * h);
    }
    return g;
}

Eigen::MatrixXd numerical_hessian(const Objective& f, const Eigen::VectorXd& x) {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd H(n, n);
    const double f0 = f(x);
    if (!std::isfinite(f0)) throw DomainError("objective is not finite at the differentiation point");
    Eigen::VectorXd xp = x;
    auto eval = [&](const Eigen::VectorXd& p) {
        const double v = f(p);
        if (!std::isfinite(v)) throw DomainError("objective is not finite near the differentiation point");
        return v;
    };
    for (Eigen::Index i = 0; i < n; ++i) {
        const double hi = step_for(x(i));
        xp(i) = x(i) + hi;
        const double fp = eval(xp);
        xp(i) = x(i) - hi;
        const double fm = eval(xp);
        xp(i) = x(i);
        H(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
        for (Eigen::Index j = 0; j < i; ++j) {
            const double hj = step_for(x(j));
            double acc = 0.0;
            for (int si : {1, -1}) {
                for (int sj : {1, -1}) {
                    xp(i) = x(i) + si * hi;
                    xp(j) = x(j) + sj * hj;
                    acc += si * sj * eval(xp);
                }
            }
            xp(i) = x(i);
            xp(j) = x(j);
            H(i, j) = H(j, i) = acc / (4.0 * hi * hj);
        }
    }
    return 0.5 * (H + H.transpose());
}

Eigen::MatrixXd forward_hessian(const Objective& f, const Eigen::VectorXd& x, double f0) {
    const Eigen::Index n = x.size();
    if (!std::isfinite(f0)) throw DomainError("objective is not finite at the differentiation point");
    auto eval = [&](const Eigen::VectorXd& p) {
        const double v = f(p);
        if (!std::isfinite(v)) throw DomainError("objective is not finite near the differentiation point");
        return v;
    };
    Eigen::VectorXd h(n), fi(n);
    Eigen::VectorXd xp = x;
    for (Eigen::Index i = 0; i < n; ++i) {
        h(i) = 1e-4 * std::max(1.0, std::abs(x(i)));
        xp(i) = x(i) + h(i);
        fi(i) = eval(xp);
        xp(i) = x(i);
    }
    Eigen::MatrixXd H(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        xp(i) = x(i) + h(i);
        for (Eigen::Index j = 0; j <= i; ++j) {
            xp(j) += h(j);
            H(i, j) = H(j, i) = (eval(xp) - fi(i) - fi(j) + f0) / (h(i) * h(j));
            xp(j) = j == i ? x(i) + h(i) : x(j);
        }
        xp(i) = x(i);
    }
    return H;
}

OptimResult newton_polish(const Objective& f, const Eigen::VectorXd& x0, const OptimOptions& opts) {
    OptimResult res;
    res.x = x0;
    res.value = f(x0);
    int evals = 1;
    if (!std::isfinite(res.value)) throw DomainError("objective is not finite at the polish start");
    const Eigen::Index n = x0.size();

    // The Hessian is recomputed only when the previous one stopped giving
    // full Newton steps; near the optimum a stale Hessian costs a little
    // convergence rate and saves most of the evaluations.
    Eigen::MatrixXd H;
    bool fresh = false;
    for (int it = 0; it < opts.max_polish_iterations; ++it) {
        Eigen::VectorXd g;
        try {
            g = numerical_gradient(f, res.x);
            evals += static_cast<int>(2 * n);
            if (H.size() == 0) {
                if (opts.forward_hessian) {
                    H = forward_hessian(f, res.x, res.value);
                    evals += static_cast<int>(n + n * (n + 1) / 2);
                } else {
                    H = numerical_hessian(f, res.x);
                    evals += static_cast<int>(1 + 2 * n * n);
                }
                fresh = true;
            }
        } catch (const DomainError&) {
            break;  // sitting on the edge of the finite region; keep what we have
        }
        res.grad_norm = g.norm();
        if (res.grad_norm < opts.gtol) {
            res.converged = true;
            // Inside the tolerance ball the objective can be so flat along
            // one direction that different starts stop visibly apart. A few
            // more Newton steps, each kept only if it shrinks the gradient
            // without losing more than rounding noise in f, settle every
            // start on the same point.
            Eigen::LDLT<Eigen::MatrixXd> fin(-H);
            for (int k = 0; k < 3 && fin.info() == Eigen::Success && fin.isPositive(); ++k) {
                const Eigen::VectorXd trial = res.x + fin.solve(g);
                const double ft = f(trial);
                ++evals;
                if (!std::isfinite(ft) || ft < res.value - 1e-12 * std::max(1.0, std::abs(res.value))) break;
                Eigen::VectorXd gt;
                try {
                    gt = numerical_gradient(f, trial);
                } catch (const DomainError&) {
                    break;
                }
                evals += static_cast<int>(2 * n);
                if (!(gt.norm() < res.grad_norm)) break;
                res.x = trial;
                res.value = ft;
                res.grad_norm = gt.norm();
                g = gt;
            }
            break;
        }
        // Newton direction when -H is positive definite, otherwise fall back
        // to a gradient step scaled by the Hessian diagonal.
        Eigen::VectorXd dir;
        bool newton = false;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(-H);
        if (ldlt.info() == Eigen::Success && ldlt.isPositive() &&
            (ldlt.vectorD().array() > 0.0).all()) {
            dir = ldlt.solve(g);
            newton = dir.allFinite();
        }
        if (!newton) dir = g / std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
        // A Newton step this small means we are at the optimum to within
        // the resolution of the numerical derivatives.
        if (newton && dir.lpNorm<Eigen::Infinity>() < opts.xtol) {
            res.converged = true;
            break;
        }
        if (opts.stop_at_noise && newton &&
            0.5 * g.dot(dir) < 1e-12 * std::max(1.0, std::abs(res.value))) {
            // A stale Hessian misjudges the remaining gain; refresh it and
            // decide again. A fresh one makes the last step land.
            if (!fresh) {
                H.resize(0, 0);
                continue;
            }
            const Eigen::VectorXd trial = res.x + dir;
            const double ft = f(trial);
            ++evals;
            if (std::isfinite(ft) && ft >= res.value - 1e-12 * std::max(1.0, std::abs(res.value))) {
                try {
                    const Eigen::VectorXd gt = numerical_gradient(f, trial);
                    evals += static_cast<int>(2 * n);
                    if (gt.norm() < res.grad_norm) {
                        res.x = trial;
                        res.value = std::max(ft, res.value);
                        res.grad_norm = gt.norm();
                    }
                } catch (const DomainError&) {
                }
            }
            ++res.iterations;
            res.converged = true;
            break;
        }
        double t = 1.0;
        bool moved = false;
        for (int k = 0; k < 30; ++k, t *= 0.5) {
            const Eigen::VectorXd trial = res.x + t * dir;
            const double ft = f(trial);
            ++evals;
            if (std::isfinite(ft) && ft > res.value) {
                moved = true;
                res.x = trial;
                res.value = ft;
                break;
            }
        }
        // Right at the optimum a Newton step gains less than the rounding
        // noise in f, so the line search cannot see it. The step is still
        // taken when f stays level within that noise and the gradient
        // shrinks, which is what the step is for.
        if (!moved && newton && fresh) {
            const Eigen::VectorXd trial = res.x + dir;
            const double ft = f(trial);
            ++evals;
            const double noise = 1e-12 * std::max(1.0, std::abs(res.value));
            if (std::isfinite(ft) && ft >= res.value - noise) {
                try {
                    const Eigen::VectorXd gt = numerical_gradient(f, trial);
                    evals += static_cast<int>(2 * n);
                    if (gt.norm() < res.grad_norm) {
                        res.x = trial;
                        res.value = std::max(ft, res.value);
                        res.grad_norm = gt.norm();
                        moved = true;
                        t = 1.0;
                    }
                } catch (const DomainError&) {
                }
            }
        }
        ++res.iterations;
        if (!moved || t < 1.0 || !newton) {
            if (!moved && fresh) {
                res.converged = res.grad_norm < opts.gtol_stalled;
                break;
            }
            H.resize(0, 0);  // stale: recompute next round
        }
        fresh = false;
    }
    res.evaluations = evals;
    return res;
}

OptimResult maximize(const Objective& f, const Eigen::VectorXd& x0, const OptimOptions& opts) {
    const int n = static_cast<int>(x0.size());
    OptimResult res;
    const double f0 = f(x0);
    if (!std::isfinite(f0)) throw DomainError("objective is not finite at the starting point");
    if (n == 0) {
        res.x = x0;
        res.value = f0;
        res.evaluations = 1;
        res.converged = true;
        return res;
    }

    Counted counted(f, static_cast<long>(opts.max_evals_per_dim) * n);
    Eigen::VectorXd x = x0;
    double fx = f0;
    int iterations = 0;
    int restarts = 0;
    for (;;) {
        RunOutcome run = nelder_mead_run(counted, x, fx, opts.initial_step, opts.ftol);
        iterations += run.iterations;
        const double gain = run.f - fx;
        x = run.x;
        fx = run.f;
        // A restart that gains essentially nothing means the first run was
        // not a collapse artefact.
        if (restarts > 0 && gain < opts.ftol) break;
        if (restarts >= opts.max_restarts) break;
        ++restarts;
    }
    res.x = x;
    res.value = fx;
    res.iterations = iterations;
    res.restarts = restarts;
    res.evaluations = static_cast<int>(counted.evals()) + 1;
    res.converged = true;

    if (opts.polish) {
        OptimResult pol = newton_polish(f, res.x, opts);
        res.evaluations += pol.evaluations;
        res.iterations += pol.iterations;
        if (pol.value >= res.value) {
            res.x = pol.x;
            res.value = pol.value;
        }
        res.grad_norm = pol.grad_norm;
    } else {
        try {
            res.grad_norm = numerical_gradient(f, res.x).norm();
        } catch (const DomainError&) {
            res.grad_norm = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return res;
}

OptimResult maximize_from_close_start(const Objective& f, const Eigen::VectorXd& x0,
                                      const OptimOptions& opts) {
    if (!std::isfinite(f(x0))) throw DomainError("objective is not finite at the starting point");
    OptimResult r = newton_polish(f, x0, opts);
    if (r.converged) return r;
    OptimResult nm = maximize(f, r.x, opts);
    nm.evaluations += r.evaluations;
    nm.iterations += r.iterations;
    return nm;
}

OptimResult maximize_1d(const std::function<double(double)>& f, double lo, double hi,
                        const OptimOptions& opts) {
    int evals = 0;
    auto neg = [&](double t) {
        ++evals;
        const double v = f(t);
        return std::isfinite(v) ? -v : std::numeric_limits<double>::max();
    };
    boost::uintmax_t max_iter = 500;
    const auto [xb, fb] = boost::math::tools::brent_find_minima(neg, lo, hi, 52, max_iter);
    if (max_iter >= 500) throw ConvergenceError("Brent search did not converge", {xb}, -fb);

    OptimResult res;
    res.x = Eigen::VectorXd::Constant(1, xb);
    res.value = -fb;
    res.iterations = static_cast<int>(max_iter);
    res.evaluations = evals;
    res.converged = true;
    if (!std::isfinite(res.value)) throw ConvergenceError("no finite value on the search interval");

    if (opts.polish) {
        const Objective fv = [&](const Eigen::VectorXd& x) { return f(x(0)); };
        OptimResult pol = newton_polish(fv, res.x, opts);
        res.evaluations += pol.evaluations;
        if (pol.value >= res.value) {
            res.x = pol.x;
            res.value = pol.value;
        }
        res.grad_norm = pol.grad_norm;
    }
    return res;
}

}  // namespace pcc
