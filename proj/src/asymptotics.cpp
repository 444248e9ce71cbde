#include "pcc/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/random/sobol.hpp>

#include "pcc/errors.hpp"
#include "pcc/parallel.hpp"
#include "pcc/special.hpp"

namespace pcc {

double partial_correlation(double r12, double r23, double r13) {
    return (r13 - r12 * r23) / std::sqrt((1.0 - r12 * r12) * (1.0 - r23 * r23));
}

Eigen::Matrix3d partial_correlation_jacobian(double r12, double r23, double r13) {
    const double s = std::sqrt((1.0 - r12 * r12) * (1.0 - r23 * r23));
    const double q = r13 - r12 * r23;
    const double s3 = s * s * s;
    Eigen::Matrix3d G = Eigen::Matrix3d::Identity();
    G(2, 0) = -r23 / s + q * r12 * (1.0 - r23 * r23) / s3;
    G(2, 1) = -r12 / s + q * r23 * (1.0 - r12 * r12) / s3;
    G(2, 2) = 1.0 / s;
    return G;
}

GaussianAnalytic trivariate_gaussian_analytic(double r12, double r23, double r13) {
    Eigen::Matrix3d R;
    R << 1.0, r12, r13, r12, 1.0, r23, r13, r23, 1.0;
    const Eigen::LLT<Eigen::Matrix3d> llt(R);
    const double det = R.determinant();
    if (llt.info() != Eigen::Success || !(det > 0.0) || std::abs(r12) >= 1.0 || std::abs(r23) >= 1.0 ||
        std::abs(r13) >= 1.0) {
        throw DomainError("correlation matrix is not positive definite");
    }
    const double a = 1.0 + r12 * r12 + r13 * r13 + r23 * r23;
    const double q = r13 - r12 * r23;
    const double c12 = 1.0 - r12 * r12;
    const double c23 = 1.0 - r23 * r23;
    const double c13 = 1.0 - r13 * r13;

    GaussianAnalytic out;

    // Covariance of the ML correlation estimates. The entry for a pair of
    // correlations sharing index l is 2 rho_ik (1 - rho_il^2)(1 - rho_lk^2)
    // - rho_il rho_lk |R|, halved.
    auto v = [&](double rik, double ril, double rlk) { return 2.0 * rik * (1.0 - ril * ril) * (1.0 - rlk * rlk) - ril * rlk * det; };
    const double v_12_23 = v(r13, r12, r23);
    const double v_12_13 = v(r23, r12, r13);
    const double v_23_13 = v(r12, r13, r23);
    out.V_ML << 2.0 * c12 * c12, v_12_23, v_12_13,
                v_12_23, 2.0 * c23 * c23, v_23_13,
                v_12_13, v_23_13, 2.0 * c13 * c13;
    out.V_ML *= 0.5;

    const double k11 = (1.0 + r12 * r12) / (c12 * c12);
    const double k22 = (1.0 + r23 * r23) / (c23 * c23);
    const double k33 = (det + 2.0 * q * q) / (det * det);
    // Cross moment of the two ground-level scores; the denominator carries
    // both squared factors (see the derivation by Isserlis' theorem).
    const double k12 = q * (det + r13 * r13 - r12 * r12 * r23 * r23) / (c12 * c12 * c23 * c23);
    out.K_theta << k11, k12, 0.0,
                   k12, k22, 0.0,
                   0.0, 0.0, k33;

    auto j = [&](double rik, double ril, double rlk) { return -rik * det + 2.0 * (ril - rlk * rik) * (rlk - ril * rik); };
    out.J_theta << k11, 0.0, 0.0,
                   0.0, k22, 0.0,
                   j(r23, r12, r13) / (det * det), j(r12, r13, r23) / (det * det), k33;

    auto b = [&](double rik, double ril, double rlk) {
        return rik * a * (1.0 - 2.0 / (1.0 - rik * rik)) + 2.0 * (1.0 + rik * rik) * (rik + ril * rlk) / (1.0 - rik * rik);
    };
    const double b12 = b(r12, r13, r23);
    const double b23 = b(r23, r12, r13);
    const double B11 = r12 * r12 * (1.0 + r12 * r12) / (c12 * c12);
    const double B22 = r23 * r23 * (1.0 + r23 * r23) / (c23 * c23);
    const double B12 = (r23 * b12 + r12 * b23 - r12 * r23 * a) / (2.0 * c12 * c23);
    const double B13 = q * b12 / (2.0 * c12 * det);
    const double B23 = q * b23 / (2.0 * c23 * det);
    const double B33 = (1.0 + r13 * r13) * q * q / (det * det);
    out.B_SSP << B11, B12, B13,
                 B12, B22, B23,
                 B13, B23, B33;

    const Eigen::Matrix3d Jinv = out.J_theta.inverse();
    out.V_SSP = Jinv * out.K_theta * Jinv.transpose() + Jinv * out.B_SSP * Jinv.transpose();
    return out;
}

Eigen::VectorXd CovMatrix::se() const {
    return (V.diagonal().array().max(0.0) / static_cast<double>(n)).sqrt();
}

namespace {

double param_step(double x) { return 1e-5 * std::max(1.0, std::abs(x)); }

// Derivative of g(theta) at one parameter slot of a pair copula, central if
// both neighbours are inside the domain, one-sided otherwise.
template <class G>
void edge_param_derivative(const PairCopula& c, int slot, G&& eval, Eigen::Ref<Eigen::VectorXd> out) {
    std::vector<double> p = c.params();
    const double h = param_step(p[slot]);
    const ParamBound& bd = param_domain(c.family()).bounds[slot];
    auto at = [&](double val) {
        std::vector<double> q = p;
        q[slot] = val;
        return PairCopula(c.family(), q);
    };
    const bool up = bd.contains(p[slot] + h);
    const bool down = bd.contains(p[slot] - h);
    if (up && down) {
        out = (eval(at(p[slot] + h)) - eval(at(p[slot] - h))) / (2.0 * h);
    } else if (up) {
        out = (eval(at(p[slot] + h)) - eval(c)) / h;
    } else {
        out = (eval(c) - eval(at(p[slot] - h))) / h;
    }
}

Eigen::VectorXd edge_log_density(const PairCopula& c, const std::vector<double>& a, const std::vector<double>& b) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(a.size()));
    for (std::size_t k = 0; k < a.size(); ++k) out(static_cast<Eigen::Index>(k)) = log_density(c, a[k], b[k]);
    return out;
}

std::vector<int> param_levels(const VineSpec& spec) {
    std::vector<int> lv;
    for (const auto& r : spec.param_refs()) lv.push_back(r.level);
    return lv;
}

Eigen::MatrixXd sobol_uniforms(int d, long m) {
    boost::random::sobol qrng(static_cast<std::size_t>(d));
    // Skip the origin so every coordinate is strictly inside (0, 1).
    qrng.discard(static_cast<boost::uintmax_t>(d));
    Eigen::MatrixXd W(m, d);
    // The engine yields 64-bit integers; keep the top 53 bits.
    static_assert(boost::random::sobol::result_type(~0ULL) == ~0ULL, "expected a 64-bit Sobol engine");
    for (long r = 0; r < m; ++r)
        for (int j = 0; j < d; ++j) W(r, j) = (static_cast<double>(qrng() >> 11) + 0.5) * 0x1.0p-53;
    return W;
}

Eigen::MatrixXd centered_cov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    const double n = static_cast<double>(A.rows());
    const Eigen::MatrixXd Ac = A.rowwise() - A.colwise().mean();
    const Eigen::MatrixXd Bc = B.rowwise() - B.colwise().mean();
    return Ac.transpose() * Bc / n;
}

}  // namespace

Eigen::MatrixXd ssp_scores(const VineSpec& spec, const Eigen::MatrixXd& U) {
    const auto refs = spec.param_refs();
    Eigen::MatrixXd S(U.rows(), static_cast<Eigen::Index>(refs.size()));
    if (refs.empty()) return S;
    const auto args = level_arguments(spec, U);
    for (std::size_t p = 0; p < refs.size(); ++p) {
        const auto& r = refs[p];
        const auto& a = args[r.level].first[r.edge];
        const auto& b = args[r.level].second[r.edge];
        edge_param_derivative(spec.edge(r.level, r.edge), r.slot,
                              [&](const PairCopula& c) { return edge_log_density(c, a, b); },
                              S.col(static_cast<Eigen::Index>(p)));
    }
    return S;
}

CovMatrix ssp_sandwich(const Eigen::MatrixXd& U, const VineSpec& fitted, long mc_points, SandwichParts* parts) {
    const int d = fitted.dim();
    if (d > 3) {
        throw UnsupportedError("the SSP sandwich needs integrals of dimension d and is only offered for d <= 3; "
                               "use the parametric bootstrap for larger vines");
    }
    if (U.cols() != d) throw DomainError("data dimension does not match the vine");
    if (mc_points < 100) throw DomainError("need at least 100 Monte Carlo points");
    const Eigen::Index n = U.rows();
    const int P = fitted.num_params();
    CovMatrix out;
    out.method = "ssp-sandwich";
    out.n = n;
    if (P == 0) {
        out.V.resize(0, 0);
        return out;
    }
    const std::vector<int> level_of = param_levels(fitted);
    const auto refs = fitted.param_refs();

    const Eigen::MatrixXd psi = ssp_scores(fitted, U);
    const Eigen::MatrixXd K = psi.transpose() * psi / static_cast<double>(n);

    // J: perturb one parameter at a time, rebuild the deeper arguments and
    // difference the scores. Rows at levels below the perturbed parameter
    // cannot change and are zero by construction.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(P, P);
    const Eigen::VectorXd theta = fitted.theta();
    for (int q = 0; q < P; ++q) {
        const PairCopula& c = fitted.edge(refs[q].level, refs[q].edge);
        const ParamBound& bd = param_domain(c.family()).bounds[refs[q].slot];
        const double h = param_step(theta(q));
        auto scores_at = [&](double val) {
            VineSpec s = fitted;
            Eigen::VectorXd t = theta;
            t(q) = val;
            s.set_theta(t);
            return ssp_scores(s, U);
        };
        Eigen::VectorXd dcol;
        const bool up = bd.contains(theta(q) + h);
        const bool down = bd.contains(theta(q) - h);
        if (up && down) {
            dcol = ((scores_at(theta(q) + h) - scores_at(theta(q) - h)) / (2.0 * h)).colwise().mean();
        } else if (up) {
            dcol = ((scores_at(theta(q) + h) - psi) / h).colwise().mean();
        } else {
            dcol = ((psi - scores_at(theta(q) - h)) / h).colwise().mean();
        }
        for (int p = 0; p < P; ++p)
            if (level_of[p] >= level_of[q]) J(p, q) = -dcol(p);
    }

    // W_j(s) = E[(1{s <= V_j} - V_j) d psi / d u_j (V)] under the fitted copula.
    const Eigen::MatrixXd V = simulate_from_uniforms(fitted, sobol_uniforms(d, mc_points));
    const double hu = 1e-4;
    std::vector<Eigen::MatrixXd> W(d);
    for (int j = 0; j < d; ++j) {
        Eigen::MatrixXd Vp = V, Vm = V;
        Eigen::VectorXd width(mc_points);
        for (long m = 0; m < mc_points; ++m) {
            const double v = V(m, j);
            const double lo = std::max(kUnitEps, v - hu);
            const double hi = std::min(1.0 - kUnitEps, v + hu);
            Vp(m, j) = hi;
            Vm(m, j) = lo;
            width(m) = hi - lo;
        }
        const Eigen::MatrixXd G =
            (ssp_scores(fitted, Vp) - ssp_scores(fitted, Vm)).array().colwise() / width.array();

        std::vector<long> order(static_cast<std::size_t>(mc_points));
        std::iota(order.begin(), order.end(), 0L);
        std::sort(order.begin(), order.end(), [&](long a, long b) { return V(a, j) < V(b, j); });
        std::vector<double> vs(order.size());
        Eigen::MatrixXd suffix(mc_points + 1, P);
        suffix.row(mc_points).setZero();
        for (long k = mc_points - 1; k >= 0; --k) {
            vs[static_cast<std::size_t>(k)] = V(order[k], j);
            suffix.row(k) = suffix.row(k + 1) + G.row(order[k]);
        }
        const Eigen::RowVectorXd weighted = (G.array().colwise() * V.col(j).array()).colwise().sum();

        W[j].resize(n, P);
        for (Eigen::Index r = 0; r < n; ++r) {
            const double s = U(r, j);
            const long k = std::lower_bound(vs.begin(), vs.end(), s) - vs.begin();
            W[j].row(r) = (suffix.row(k) - weighted) / static_cast<double>(mc_points);
        }
    }

    Eigen::MatrixXd Wsum = Eigen::MatrixXd::Zero(n, P);
    for (const auto& w : W) Wsum += w;
    Eigen::MatrixXd B = centered_cov(Wsum, Wsum);
    for (const auto& w : W) {
        const Eigen::MatrixXd C = centered_cov(psi, w);
        B += C + C.transpose();
    }
    B = 0.5 * (B + B.transpose());

    const Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
    if (lu.rank() < P) throw SingularMatrixError("the estimated J matrix is singular");
    const Eigen::MatrixXd Jinv = lu.inverse();
    out.V = Jinv * (K + B) * Jinv.transpose();
    out.V = 0.5 * (out.V + out.V.transpose());

    if (parts) {
        parts->K = K;
        parts->J = J;
        parts->B = B;
        parts->W = std::move(W);
        parts->level_of = level_of;
    }
    return out;
}

void fill_normal_ci(Uncertainty& u) {
    const double z = special::norm_quantile(0.975);
    u.lower = u.estimate - z * u.se;
    u.upper = u.estimate + z * u.se;
}

namespace {

Eigen::VectorXd stacked_estimate(const FitResult& f) {
    const Eigen::VectorXd a = f.alpha_hat();
    Eigen::VectorXd out(a.size() + f.theta_hat.size());
    out << a, f.theta_hat;
    return out;
}

std::vector<std::string> stacked_labels(const FitResult& f) {
    auto l = f.alpha_labels();
    for (auto& s : f.theta_labels()) l.push_back(s);
    return l;
}

std::vector<MarginFamily> margin_families(const FitResult& f) {
    std::vector<MarginFamily> fams;
    for (const auto& m : f.margins) fams.push_back(m.family());
    return fams;
}

}  // namespace

Uncertainty bootstrap_se(const FitResult& fit, long n, const BootstrapOptions& opts) {
    if (opts.replicates < 2) throw DomainError("bootstrap needs at least two replicates");
    if (n < 10) throw DomainError("bootstrap sample size must be at least 10");
    const bool parametric_margins = fit.method == Method::IFM || fit.method == Method::ML;
    if (parametric_margins && static_cast<int>(fit.margins.size()) != fit.spec.dim())
        throw DomainError("IFM and ML bootstrap need fitted margins");
    const Skeleton sk = fit.spec.skeleton();
    const auto fams = margin_families(fit);

    Uncertainty u;
    u.kind = "bootstrap";
    u.labels = stacked_labels(fit);
    u.estimate = stacked_estimate(fit);
    const Eigen::Index P = u.estimate.size();

    const std::size_t B = static_cast<std::size_t>(opts.replicates);
    Eigen::MatrixXd draws(static_cast<Eigen::Index>(B), P);
    std::vector<char> ok(B, 0);
    std::vector<std::string> errors(B);
    parallel_for(B, opts.threads, [&](std::size_t b) {
        try {
            const Eigen::MatrixXd Us = simulate(fit.spec, static_cast<int>(n), derive_seed(opts.seed, b));
            FitResult r;
            if (parametric_margins) {
                const Eigen::MatrixXd Xs = apply_margin_quantiles(fit.margins, Us);
                r = fit_method(fit.method, Xs, Eigen::MatrixXd(), fams, sk, opts.fit);
            } else {
                r = fit_method(fit.method, Eigen::MatrixXd(), pseudo_observations(Us), fams, sk, opts.fit);
            }
            draws.row(static_cast<Eigen::Index>(b)) = stacked_estimate(r).transpose();
            ok[b] = 1;
        } catch (const std::exception& ex) {
            errors[b] = ex.what();
        }
    });

    std::vector<Eigen::Index> good;
    for (std::size_t b = 0; b < B; ++b) {
        if (ok[b]) {
            good.push_back(static_cast<Eigen::Index>(b));
        } else {
            ++u.failed;
            if (u.failures.size() < 5) u.failures.push_back("replicate " + std::to_string(b) + ": " + errors[b]);
        }
    }
    u.replicates = static_cast<int>(good.size());
    if (static_cast<double>(u.failed) > opts.max_fail_fraction * static_cast<double>(B) || good.size() < 2) {
        throw ReplicateFailureError(std::to_string(u.failed) + " of " + std::to_string(B) +
                                    " bootstrap replicates failed" +
                                    (u.failures.empty() ? std::string() : "; first: " + u.failures.front()));
    }
    const Eigen::MatrixXd D = draws(good, Eigen::all);
    const Eigen::MatrixXd C = D.rowwise() - D.colwise().mean();
    u.se = (C.array().square().colwise().sum() / static_cast<double>(good.size() - 1)).sqrt().transpose();
    fill_normal_ci(u);
    return u;
}

Uncertainty ml_fisher_ci(const FitResult& fit, const Eigen::MatrixXd& X) {
    if (fit.method != Method::ML) throw DomainError("Fisher intervals are defined for ML fits");
    const int d = fit.spec.dim();
    if (X.cols() != d || static_cast<int>(fit.margins.size()) != d)
        throw DomainError("data and fitted margins do not match the vine");
    const Eigen::Index n = X.rows();

    Uncertainty u;
    u.kind = "fisher";
    u.labels = stacked_labels(fit);
    u.estimate = stacked_estimate(fit);
    const Eigen::Index P = u.estimate.size();
    const Eigen::Index n_alpha = fit.alpha_hat().size();

    auto rows_at = [&](const Eigen::VectorXd& phi) {
        std::vector<MarginModel> margins;
        Eigen::Index k = 0;
        for (const auto& m : fit.margins) {
            const int s = m.size();
            margins.emplace_back(m.family(), std::span<const double>(phi.data() + k, static_cast<std::size_t>(s)));
            k += s;
        }
        VineSpec spec = fit.spec;
        spec.set_theta(phi.tail(P - n_alpha));
        Eigen::VectorXd l = vine_log_density_rows(spec, apply_margin_cdfs(margins, X));
        for (int j = 0; j < d; ++j)
            for (Eigen::Index r = 0; r < n; ++r) l(r) += marg_log_pdf(margins[j], X(r, j));
        return l;
    };
    auto valid = [&](const Eigen::VectorXd& phi) {
        try {
            (void)rows_at(phi).sum();
            return true;
        } catch (const DomainError&) {
            return false;
        }
    };

    Eigen::MatrixXd S(n, P);
    const Eigen::VectorXd base = rows_at(u.estimate);
    for (Eigen::Index p = 0; p < P; ++p) {
        const double h = param_step(u.estimate(p));
        Eigen::VectorXd up = u.estimate, dn = u.estimate;
        up(p) += h;
        dn(p) -= h;
        const bool up_ok = valid(up);
        const bool dn_ok = valid(dn);
        if (up_ok && dn_ok) {
            S.col(p) = (rows_at(up) - rows_at(dn)) / (2.0 * h);
        } else if (up_ok) {
            S.col(p) = (rows_at(up) - base) / h;
        } else if (dn_ok) {
            S.col(p) = (base - rows_at(dn)) / h;
        } else {
            throw DomainError("cannot differentiate the likelihood at the estimate");
        }
    }
    const Eigen::MatrixXd I = S.transpose() * S / static_cast<double>(n);
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(I);
    if (lu.rank() < P) throw SingularMatrixError("the sample information matrix is singular");
    const Eigen::MatrixXd Iinv = lu.inverse();
    u.se = (Iinv.diagonal().array().max(0.0) / static_cast<double>(n)).sqrt();
    u.replicates = 0;
    fill_normal_ci(u);
    return u;
}

EfficiencyTable efficiency_study(const EfficiencyConfig& cfg) {
    const auto& methods = cfg.methods;
    if (std::find(methods.begin(), methods.end(), Method::ML) == methods.end())
        throw DomainError("the efficiency study needs ML as the reference method");
    if (static_cast<int>(cfg.margins.size()) != cfg.truth.dim())
        throw DomainError("the efficiency study needs one true margin per variable");
    if (cfg.replicates < 2) throw DomainError("need at least two replicates");
    const Skeleton sk = cfg.truth.skeleton();
    std::vector<MarginFamily> fams;
    for (const auto& m : cfg.margins) fams.push_back(m.family());
    const int P = cfg.truth.num_params();
    auto has = [&](Method m) { return std::find(methods.begin(), methods.end(), m) != methods.end(); };

    const std::size_t N = static_cast<std::size_t>(cfg.replicates);
    const std::size_t M = methods.size();
    std::vector<Eigen::MatrixXd> est(M, Eigen::MatrixXd(static_cast<Eigen::Index>(N), P));
    std::vector<char> ok(N, 0);
    std::vector<std::string> errors(N);

    parallel_for(N, cfg.threads, [&](std::size_t r) {
        try {
            const Eigen::MatrixXd Us = simulate(cfg.truth, static_cast<int>(cfg.n), derive_seed(cfg.seed, r));
            const Eigen::MatrixXd X = apply_margin_quantiles(cfg.margins, Us);
            const Eigen::MatrixXd U = pseudo_observations(X);
            std::optional<FitResult> ssp, ifm;
            if (has(Method::SSP) || has(Method::SP)) ssp = fit_ssp(U, sk, cfg.fit);
            ifm = fit_ifm(X, fams, sk, std::nullopt, cfg.fit);
            for (std::size_t k = 0; k < M; ++k) {
                Eigen::VectorXd t;
                switch (methods[k]) {
                    case Method::SSP: t = ssp->theta_hat; break;
                    case Method::SP:
                        // With one edge the two programs coincide.
                        t = sk.d == 2 ? ssp->theta_hat : fit_sp(U, sk, ssp->theta_hat, cfg.fit).theta_hat;
                        break;
                    case Method::IFM: t = ifm->theta_hat; break;
                    case Method::ML:
                        t = fit_ml(X, fams, sk, MLStart{ifm->margins, ifm->theta_hat}, cfg.fit).theta_hat;
                        break;
                }
                est[k].row(static_cast<Eigen::Index>(r)) = t.transpose();
            }
            ok[r] = 1;
        } catch (const std::exception& ex) {
            errors[r] = ex.what();
        }
    });

    EfficiencyTable table;
    table.labels = cfg.truth.param_labels();
    table.level_of = param_levels(cfg.truth);
    table.truth = cfg.truth.theta();
    std::vector<Eigen::Index> good;
    std::string first_error;
    for (std::size_t r = 0; r < N; ++r) {
        if (ok[r]) {
            good.push_back(static_cast<Eigen::Index>(r));
        } else {
            ++table.failed;
            if (first_error.empty()) first_error = errors[r];
        }
    }
    table.replicates_used = static_cast<int>(good.size());
    if (static_cast<double>(table.failed) > cfg.max_fail_fraction * static_cast<double>(N) || good.size() < 2) {
        throw ReplicateFailureError(std::to_string(table.failed) + " of " + std::to_string(N) +
                                    " replicates failed; first: " + first_error);
    }

    const double g = static_cast<double>(good.size());
    Eigen::VectorXd var_ml;
    for (std::size_t k = 0; k < M; ++k) {
        MethodSummary s;
        s.method = methods[k];
        s.estimates = est[k](good, Eigen::all);
        s.mean = s.estimates.colwise().mean().transpose();
        const Eigen::MatrixXd C = s.estimates.rowwise() - s.mean.transpose();
        s.variance = (C.array().square().colwise().sum() / (g - 1.0)).transpose();
        const Eigen::MatrixXd E = s.estimates.rowwise() - table.truth.transpose();
        s.rmse = (E.array().square().colwise().sum() / g).sqrt().transpose();
        if (s.method == Method::ML) var_ml = s.variance;
        table.methods.push_back(std::move(s));
    }
    const int levels = cfg.truth.dim() - 1;
    table.level_efficiency = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(M), levels, std::nan(""));
    for (std::size_t k = 0; k < M; ++k) {
        auto& s = table.methods[k];
        s.efficiency = var_ml.array() / s.variance.array();
        for (int l = 0; l < levels; ++l) {
            double sum = 0.0;
            int cnt = 0;
            for (int p = 0; p < P; ++p) {
                if (table.level_of[p] == l) {
                    sum += s.efficiency(p);
                    ++cnt;
                }
            }
            if (cnt > 0) table.level_efficiency(static_cast<Eigen::Index>(k), l) = sum / cnt;
        }
    }
    return table;
}

}  // namespace pcc
