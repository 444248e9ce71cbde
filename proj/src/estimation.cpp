#include "pcc/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pcc/errors.hpp"
#include "pcc/parallel.hpp"

namespace pcc {

std::string_view method_name(Method m) {
    switch (m) {
        case Method::ML: return "ml";
        case Method::IFM: return "ifm";
        case Method::SP: return "sp";
        case Method::SSP: return "ssp";
    }
    return "?";
}

Method parse_method(std::string_view s) {
    std::string t(s);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "ml") return Method::ML;
    if (t == "ifm") return Method::IFM;
    if (t == "sp") return Method::SP;
    if (t == "ssp") return Method::SSP;
    throw DomainError("unknown method '" + std::string(s) + "' (expected ml, ifm, sp or ssp)");
}

Eigen::VectorXd FitResult::alpha_hat() const {
    int m = 0;
    for (const auto& mm : margins) m += mm.size();
    Eigen::VectorXd a(m);
    int k = 0;
    for (const auto& mm : margins)
        for (double v : mm.params()) a(k++) = v;
    return a;
}

std::vector<std::string> FitResult::alpha_labels() const {
    std::vector<std::string> out;
    for (std::size_t j = 0; j < margins.size(); ++j)
        for (const auto& nm : margins[j].param_names()) out.push_back(nm + "_" + std::to_string(j + 1));
    return out;
}

double level_loglik(const VineSpec& spec, const LevelArguments& args) {
    double s = 0.0;
    for (int e = 0; e < spec.edges_in_level(args.level); ++e)
        s += pair_loglik(spec.edge(args.level, e), args.first[e], args.second[e]);
    return s;
}

namespace {

void check_data(const Eigen::MatrixXd& M, const Skeleton& sk, const char* what) {
    if (M.cols() != sk.d)
        throw DomainError(std::string(what) + " has " + std::to_string(M.cols()) + " columns but the vine has dimension " +
                          std::to_string(sk.d));
    if (!M.allFinite()) throw DomainError(std::string(what) + " contains non-finite values");
}

void check_unit(const Eigen::MatrixXd& U) {
    if ((U.array() < 0.0).any() || (U.array() > 1.0).any())
        throw DomainError("pseudo-observations must lie in [0, 1]");
}

void enforce_cap(int params, const FitOptions& opts, const char* who) {
    if (params > opts.param_cap && !opts.force_large) {
        throw DomainError(std::string(who) + " would optimize " + std::to_string(params) +
                          " parameters jointly, above the cap of " + std::to_string(opts.param_cap) +
                          "; use the stepwise estimator or force the run");
    }
}

std::vector<MarginModel> margins_from_eta(const std::vector<MarginFamily>& fams, const Eigen::VectorXd& eta,
                                          int offset = 0) {
    std::vector<MarginModel> out;
    int k = offset;
    for (MarginFamily f : fams) {
        const int m = num_margin_params(f);
        out.push_back(MarginModel::from_unconstrained(f, {eta.data() + k, static_cast<std::size_t>(m)}));
        k += m;
    }
    return out;
}

// Joint fits over many parameters reach the rounding noise of the summed
// log-likelihood before any fixed gradient target, so they stop on the
// predicted gain instead. Their Hessians only steer, so the cheaper forward
// differences do.
OptimOptions joint_options(const FitOptions& opts) {
    OptimOptions o = opts.optim;
    o.stop_at_noise = true;
    o.forward_hessian = true;
    return o;
}

// Maximizes the copula log-likelihood over all edges jointly on a fixed
// matrix of probability-scale observations (pseudo or parametric).
struct JointOutcome {
    VineSpec spec;
    OptimResult opt;
};

JointOutcome joint_copula_fit(const Eigen::MatrixXd& U, VineSpec spec, const FitOptions& opts) {
    const Objective f = [&](const Eigen::VectorXd& eta) {
        VineSpec s = spec;
        s.set_eta(eta);
        return vine_loglik(s, U);
    };
    OptimResult r = maximize_from_close_start(f, spec.eta(), joint_options(opts));
    spec.set_eta(r.x);
    return {spec, r};
}

}  // namespace

FitResult fit_ssp(const Eigen::MatrixXd& U, const Skeleton& sk, const FitOptions& opts) {
    check_data(U, sk, "data");
    check_unit(U);
    const int max_per_edge = std::max(1, [&] {
        int m = 0;
        for (Family f : sk.families) m = std::max(m, num_params(f));
        return m;
    }());
    if (U.rows() < 10 * max_per_edge)
        throw DomainError("need at least " + std::to_string(10 * max_per_edge) + " observations");

    FitResult res;
    res.method = Method::SSP;
    res.spec = VineSpec(sk);
    res.converged = true;

    const int d = sk.d;
    LevelArguments args = level_arguments(res.spec, U, 0).front();
    for (int l = 0; l < d - 1; ++l) {
        const int m = res.spec.edges_in_level(l);
        std::vector<PairFit> fits(m);
        parallel_for(static_cast<std::size_t>(m), opts.threads, [&](std::size_t e) {
            const Family fam = res.spec.edge(l, static_cast<int>(e)).family();
            try {
                fits[e] = fit_pair(args.first[e], args.second[e], fam, std::nullopt, opts.pair);
            } catch (const std::exception& ex) {
                throw FitError(l + 1, static_cast<int>(e) + 1, ex.what());
            }
        });
        LevelDiagnostics diag;
        diag.level = l;
        for (int e = 0; e < m; ++e) {
            res.spec.edge(l, e) = fits[e].copula;
            diag.converged = diag.converged && fits[e].converged;
            diag.evaluations += fits[e].evaluations;
            diag.loglik += fits[e].loglik;
            diag.max_grad_norm = std::max(diag.max_grad_norm, fits[e].grad_norm);
        }
        res.levels.push_back(diag);
        res.converged = res.converged && diag.converged;
        res.evaluations += diag.evaluations;
        res.copula_loglik += diag.loglik;
        res.grad_norm = std::max(res.grad_norm, diag.max_grad_norm);
        if (l + 1 < d - 1) args = next_level_arguments(res.spec, args);
    }
    res.theta_hat = res.spec.theta();
    res.loglik = res.copula_loglik;
    res.iterations = d - 1;
    return res;
}

FitResult fit_sp(const Eigen::MatrixXd& U, const Skeleton& sk, std::optional<Eigen::VectorXd> theta0,
                 const FitOptions& opts) {
    check_data(U, sk, "data");
    check_unit(U);
    enforce_cap(sk.num_params(), opts, "SP");
    VineSpec start(sk);
    if (theta0) {
        start.set_theta(*theta0);
    } else {
        FitResult ssp = fit_ssp(U, sk, opts);
        if (sk.d == 2) {
            // A single edge: the joint program is the edge fit SSP just solved.
            ssp.method = Method::SP;
            ssp.levels.clear();
            return ssp;
        }
        start = ssp.spec;
    }
    const double start_ll = vine_loglik(start, U);
    JointOutcome j = joint_copula_fit(U, start, opts);

    FitResult res;
    res.method = Method::SP;
    if (j.opt.value < start_ll) {
        // The optimizer never returns a worse point, but guard anyway.
        j.spec = start;
        j.opt.value = start_ll;
    }
    res.spec = j.spec;
    res.theta_hat = res.spec.theta();
    res.copula_loglik = j.opt.value;
    res.loglik = j.opt.value;
    res.iterations = j.opt.iterations;
    res.evaluations = j.opt.evaluations;
    res.converged = j.opt.converged;
    res.grad_norm = j.opt.grad_norm;
    return res;
}

double full_loglik(const VineSpec& spec, const std::vector<MarginModel>& margins, const Eigen::MatrixXd& X) {
    double lm = 0.0;
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        for (Eigen::Index r = 0; r < X.rows(); ++r) lm += marg_log_pdf(margins[j], X(r, j));
    return lm + vine_loglik(spec, apply_margin_cdfs(margins, X));
}

FitResult fit_ifm(const Eigen::MatrixXd& X, const std::vector<MarginFamily>& fams, const Skeleton& sk,
                  std::optional<Eigen::VectorXd> theta0, const FitOptions& opts) {
    check_data(X, sk, "data");
    if (static_cast<int>(fams.size()) != sk.d) throw DomainError("need one margin family per column");
    enforce_cap(sk.num_params(), opts, "IFM");

    FitResult res;
    res.method = Method::IFM;
    for (int j = 0; j < sk.d; ++j) {
        try {
            const MarginFit mf = fit_margin(fams[j], {X.col(j).data(), static_cast<std::size_t>(X.rows())});
            res.margins.push_back(mf.model);
            res.margin_loglik += mf.loglik;
            res.evaluations += mf.evaluations;
        } catch (const std::exception& ex) {
            throw DomainError("IFM margin step, column " + std::to_string(j + 1) + ": " + ex.what());
        }
    }
    const Eigen::MatrixXd U = apply_margin_cdfs(res.margins, X);
    VineSpec start(sk);
    try {
        if (theta0) {
            start.set_theta(*theta0);
        } else {
            start = fit_ssp(U, sk, opts).spec;
        }
        const double start_ll = vine_loglik(start, U);
        JointOutcome j = joint_copula_fit(U, start, opts);
        if (j.opt.value < start_ll) {
            j.spec = start;
            j.opt.value = start_ll;
        }
        res.spec = j.spec;
        res.copula_loglik = j.opt.value;
        res.iterations = j.opt.iterations;
        res.evaluations += j.opt.evaluations;
        res.converged = j.opt.converged;
        res.grad_norm = j.opt.grad_norm;
    } catch (const FitError&) {
        throw;
    } catch (const std::exception& ex) {
        throw std::runtime_error(std::string("IFM copula step: ") + ex.what());
    }
    res.theta_hat = res.spec.theta();
    res.loglik = res.margin_loglik + res.copula_loglik;
    return res;
}

FitResult fit_ml(const Eigen::MatrixXd& X, const std::vector<MarginFamily>& fams, const Skeleton& sk,
                 std::optional<MLStart> start, const FitOptions& opts) {
    check_data(X, sk, "data");
    if (static_cast<int>(fams.size()) != sk.d) throw DomainError("need one margin family per column");
    int n_alpha = 0;
    for (MarginFamily f : fams) n_alpha += num_margin_params(f);
    enforce_cap(n_alpha + sk.num_params(), opts, "ML");

    if (!start) {
        MLStart s;
        for (int j = 0; j < sk.d; ++j)
            s.margins.push_back(fit_margin(fams[j], {X.col(j).data(), static_cast<std::size_t>(X.rows())}).model);
        s.theta = fit_ssp(pseudo_observations(X), sk, opts).theta_hat;
        start = std::move(s);
    }
    if (static_cast<int>(start->margins.size()) != sk.d) throw DomainError("ML start needs one margin per column");
    for (int j = 0; j < sk.d; ++j)
        if (start->margins[j].family() != fams[j]) throw DomainError("ML start margin family mismatch");

    VineSpec spec(sk);
    spec.set_theta(start->theta);
    const int p_theta = spec.num_params();
    Eigen::VectorXd eta0(n_alpha + p_theta);
    {
        int k = 0;
        for (const auto& m : start->margins)
            for (double v : m.to_unconstrained()) eta0(k++) = v;
        eta0.tail(p_theta) = spec.eta();
    }
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        for (Eigen::Index r = 0; r < X.rows(); ++r)
            if (!start->margins[j].in_support(X(r, j)))
                throw SupportError("ML: observation outside the support of margin " + std::to_string(j + 1));

    const Objective f = [&](const Eigen::VectorXd& eta) {
        const auto margins = margins_from_eta(fams, eta);
        VineSpec s = spec;
        s.set_eta(eta.tail(p_theta));
        return full_loglik(s, margins, X);
    };
    const double start_ll = f(eta0);
    OptimResult r = maximize_from_close_start(f, eta0, joint_options(opts));
    if (r.value < start_ll) {
        r.x = eta0;
        r.value = start_ll;
    }

    FitResult res;
    res.method = Method::ML;
    res.margins = margins_from_eta(fams, r.x);
    res.spec = spec;
    res.spec.set_eta(r.x.tail(p_theta));
    res.theta_hat = res.spec.theta();
    res.loglik = r.value;
    res.copula_loglik = vine_loglik(res.spec, apply_margin_cdfs(res.margins, X));
    res.margin_loglik = res.loglik - res.copula_loglik;
    res.iterations = r.iterations;
    res.evaluations = r.evaluations;
    res.converged = r.converged;
    res.grad_norm = r.grad_norm;
    return res;
}

FitResult fit_method(Method m, const Eigen::MatrixXd& X, const Eigen::MatrixXd& U,
                     const std::vector<MarginFamily>& fams, const Skeleton& sk, const FitOptions& opts) {
    switch (m) {
        case Method::SSP: return fit_ssp(U, sk, opts);
        case Method::SP: return fit_sp(U, sk, std::nullopt, opts);
        case Method::IFM: return fit_ifm(X, fams, sk, std::nullopt, opts);
        case Method::ML: return fit_ml(X, fams, sk, std::nullopt, opts);
    }
    throw DomainError("unknown method");
}

}  // namespace pcc
