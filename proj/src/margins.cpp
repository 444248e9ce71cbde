#include "pcc/margins.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>
#include <sstream>

#include "pcc/errors.hpp"
#include "pcc/optimize.hpp"
#include "pcc/special.hpp"

namespace pcc {

std::string_view margin_family_name(MarginFamily f) {
    switch (f) {
        case MarginFamily::Normal: return "normal";
        case MarginFamily::Exponential: return "exponential";
        case MarginFamily::StudentT: return "t";
        case MarginFamily::GeneralizedGamma: return "gengamma";
    }
    return "?";
}

MarginFamily parse_margin_family(std::string_view name) {
    std::string s(name);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "normal" || s == "gaussian") return MarginFamily::Normal;
    if (s == "exponential" || s == "exp") return MarginFamily::Exponential;
    if (s == "t" || s == "student" || s == "studentt") return MarginFamily::StudentT;
    if (s == "gengamma" || s == "generalizedgamma" || s == "ggamma") return MarginFamily::GeneralizedGamma;
    throw DomainError("unknown margin family '" + std::string(name) + "'");
}

int num_margin_params(MarginFamily f) {
    switch (f) {
        case MarginFamily::Normal:
        case MarginFamily::Exponential:
        case MarginFamily::StudentT:
            return 1;
        case MarginFamily::GeneralizedGamma:
            return 3;
    }
    return 0;
}

MarginModel::MarginModel(MarginFamily family, std::span<const double> params) : family_(family) {
    if (static_cast<int>(params.size()) != num_margin_params(family)) {
        throw DomainError("margin " + std::string(margin_family_name(family)) + " takes " +
                          std::to_string(num_margin_params(family)) + " parameter(s), got " +
                          std::to_string(params.size()));
    }
    std::copy(params.begin(), params.end(), par_.begin());
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (!(std::isfinite(params[k]) && params[k] > 0.0))
            throw DomainError("margin parameters must be positive and finite");
    }
    if (family == MarginFamily::StudentT && !(par_[0] > 2.0))
        throw DomainError("t margin needs nu > 2");
}

MarginModel::MarginModel(MarginFamily family, std::initializer_list<double> params)
    : MarginModel(family, std::span<const double>(params.begin(), params.size())) {}

MarginModel MarginModel::from_unconstrained(MarginFamily family, std::span<const double> eta) {
    MarginModel m;
    m.family_ = family;
    for (int k = 0; k < num_margin_params(family); ++k)
        m.par_[k] = std::exp(std::clamp(eta[k], -40.0, 40.0));
    if (family == MarginFamily::StudentT) m.par_[0] = 2.0 + std::exp(std::clamp(eta[0], -30.0, std::log(298.0)));
    return m;
}

std::vector<double> MarginModel::to_unconstrained() const {
    std::vector<double> e(size());
    for (int k = 0; k < size(); ++k) e[k] = std::log(par_[k]);
    if (family_ == MarginFamily::StudentT) e[0] = std::log(par_[0] - 2.0);
    return e;
}

std::vector<double> MarginModel::params() const { return {par_.begin(), par_.begin() + size()}; }

std::vector<std::string> MarginModel::param_names() const {
    switch (family_) {
        case MarginFamily::Normal: return {"sigma"};
        case MarginFamily::Exponential: return {"lambda"};
        case MarginFamily::StudentT: return {"nu"};
        case MarginFamily::GeneralizedGamma: return {"gamma", "beta", "p"};
    }
    return {};
}

bool MarginModel::in_support(double x) const {
    if (!std::isfinite(x)) return false;
    if (family_ == MarginFamily::Exponential || family_ == MarginFamily::GeneralizedGamma) return x > 0.0;
    return true;
}

std::string MarginModel::describe() const {
    std::ostringstream os;
    os << margin_family_name(family_);
    const auto names = param_names();
    for (int k = 0; k < size(); ++k) os << (k == 0 ? "(" : ", ") << names[k] << "=" << par_[k];
    os << ")";
    return os.str();
}

double marg_log_pdf(const MarginModel& m, double x) {
    if (!m.in_support(x)) {
        if (std::isnan(x)) throw SupportError("margin evaluated at NaN");
        return -std::numeric_limits<double>::infinity();
    }
    switch (m.family()) {
        case MarginFamily::Normal: {
            const double s = m.param(0);
            const double z = x / s;
            return -0.5 * z * z - std::log(s) - 0.5 * std::log(2.0 * std::numbers::pi);
        }
        case MarginFamily::Exponential: {
            const double lam = m.param(0);
            return std::log(lam) - lam * x;
        }
        case MarginFamily::StudentT:
            return special::t_log_pdf(x, m.param(0));
        case MarginFamily::GeneralizedGamma: {
            const double g = m.param(0), b = m.param(1), p = m.param(2);
            return std::log(p) - g * std::log(b) - std::lgamma(g / p) + (g - 1.0) * std::log(x) -
                   std::pow(x / b, p);
        }
    }
    return 0.0;
}

double marg_pdf(const MarginModel& m, double x) { return std::exp(marg_log_pdf(m, x)); }

double marg_cdf(const MarginModel& m, double x) {
    if (std::isnan(x)) throw SupportError("margin evaluated at NaN");
    switch (m.family()) {
        case MarginFamily::Normal:
            return special::norm_cdf(x / m.param(0));
        case MarginFamily::Exponential:
            return x <= 0.0 ? 0.0 : -std::expm1(-m.param(0) * x);
        case MarginFamily::StudentT:
            return special::t_cdf(x, m.param(0));
        case MarginFamily::GeneralizedGamma: {
            if (x <= 0.0) return 0.0;
            const double g = m.param(0), b = m.param(1), p = m.param(2);
            return special::gamma_p(g / p, std::pow(x / b, p));
        }
    }
    return 0.0;
}

double marg_quantile(const MarginModel& m, double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("margin quantile needs p in (0, 1)");
    switch (m.family()) {
        case MarginFamily::Normal:
            return m.param(0) * special::norm_quantile(p);
        case MarginFamily::Exponential:
            return -std::log1p(-p) / m.param(0);
        case MarginFamily::StudentT:
            return special::t_quantile(p, m.param(0));
        case MarginFamily::GeneralizedGamma: {
            const double g = m.param(0), b = m.param(1), pp = m.param(2);
            // Use the upper-tail inverse above the median for accuracy.
            const double q = p < 0.5 ? special::gamma_p_inv(g / pp, p) : special::gamma_q_inv(g / pp, 1.0 - p);
            return b * std::pow(q, 1.0 / pp);
        }
    }
    return 0.0;
}

MarginFit fit_margin(MarginFamily family, std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 20) throw DomainError("fit_margin: need at least 20 observations");
    for (double xi : x) {
        if (!std::isfinite(xi)) throw SupportError("fit_margin: non-finite observation");
        if ((family == MarginFamily::Exponential || family == MarginFamily::GeneralizedGamma) && !(xi > 0.0))
            throw SupportError("fit_margin: " + std::string(margin_family_name(family)) +
                               " margin needs strictly positive data");
    }
    const double dn = static_cast<double>(n);
    MarginFit out;

    auto loglik_of = [&](const MarginModel& m) {
        double s = 0.0;
        for (double xi : x) s += marg_log_pdf(m, xi);
        return s;
    };

    switch (family) {
        case MarginFamily::Normal: {
            double ss = 0.0;
            for (double xi : x) ss += xi * xi;
            out.model = MarginModel::normal(std::sqrt(ss / dn));
            out.loglik = loglik_of(out.model);
            out.evaluations = 1;
            return out;
        }
        case MarginFamily::Exponential: {
            const double mean = std::accumulate(x.begin(), x.end(), 0.0) / dn;
            out.model = MarginModel::exponential(1.0 / mean);
            out.loglik = loglik_of(out.model);
            out.evaluations = 1;
            return out;
        }
        case MarginFamily::StudentT: {
            auto f1 = [&](double e) {
                return loglik_of(MarginModel::from_unconstrained(MarginFamily::StudentT, {&e, 1}));
            };
            const OptimResult r = maximize_1d(f1, -8.0, std::log(298.0));
            const double e = r.x(0);
            out.model = MarginModel::from_unconstrained(MarginFamily::StudentT, {&e, 1});
            out.loglik = r.value;
            out.evaluations = r.evaluations;
            out.grad_norm = r.grad_norm;
            return out;
        }
        case MarginFamily::GeneralizedGamma: {
            // Gamma method-of-moments start with p = 1.
            const double mean = std::accumulate(x.begin(), x.end(), 0.0) / dn;
            double var = 0.0;
            for (double xi : x) var += (xi - mean) * (xi - mean);
            var /= dn;
            if (!(var > 0.0)) throw DegenerateDataError("fit_margin: constant data");
            const double shape = mean * mean / var;
            const double scale = var / mean;
            const Objective f = [&](const Eigen::VectorXd& e) {
                return loglik_of(MarginModel::from_unconstrained(
                    MarginFamily::GeneralizedGamma, {e.data(), static_cast<std::size_t>(e.size())}));
            };
            Eigen::VectorXd e0(3);
            e0 << std::log(shape), std::log(scale), 0.0;
            const OptimResult r = maximize(f, e0);
            out.model = MarginModel::from_unconstrained(MarginFamily::GeneralizedGamma,
                                                        {r.x.data(), static_cast<std::size_t>(r.x.size())});
            out.loglik = r.value;
            out.evaluations = r.evaluations;
            out.grad_norm = r.grad_norm;
            return out;
        }
    }
    return out;
}

std::vector<double> pseudo_observations(std::span<const double> column) {
    const std::size_t n = column.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return column[a] < column[b]; });
    std::vector<double> out(n);
    const double denom = static_cast<double>(n) + 1.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && column[idx[j]] == column[idx[i]]) ++j;
        // Ranks i+1 .. j share their average.
        const double rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t k = i; k < j; ++k) out[idx[k]] = rank / denom;
        i = j;
    }
    return out;
}

Eigen::MatrixXd pseudo_observations(const Eigen::MatrixXd& x) {
    Eigen::MatrixXd u(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const auto col = pseudo_observations(
            std::span<const double>(x.col(j).data(), static_cast<std::size_t>(x.rows())));
        u.col(j) = Eigen::Map<const Eigen::VectorXd>(col.data(), x.rows());
    }
    return u;
}

}  // namespace pcc
