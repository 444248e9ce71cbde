#include "pcc/copula.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "pcc/errors.hpp"
#include "pcc/optimize.hpp"
#include "pcc/special.hpp"

namespace pcc {

namespace {

constexpr double kMaxAbsEtaRho = 15.0;
constexpr double kMinEtaExp = -30.0;
const double kMaxEtaDelta = std::log(499.0);
const double kMaxEtaNu = std::log(kMaxNu - 2.0);

void require(bool ok, const std::string& msg) {
    if (!ok) throw DomainError(msg);
}

void validate(Family f, const std::array<double, 2>& p) {
    switch (f) {
        case Family::Independence:
            return;
        case Family::Gaussian:
            require(std::isfinite(p[0]) && std::abs(p[0]) < 1.0, "Gaussian rho must lie in (-1, 1)");
            return;
        case Family::StudentT:
            require(std::isfinite(p[0]) && std::abs(p[0]) < 1.0, "Student-t rho must lie in (-1, 1)");
            require(p[1] > 2.0 && !std::isnan(p[1]), "Student-t nu must exceed 2");
            return;
        case Family::Gumbel:
            require(std::isfinite(p[0]) && p[0] >= 1.0, "Gumbel delta must be at least 1");
            return;
    }
}

// Gumbel pieces shared by density, h and h_inverse. With x = -log u and
// y = -log v, S = x^d + y^d is formed in log space to avoid overflow.
struct GumbelTerms {
    double lx, ly, logS, A;
};

GumbelTerms gumbel_terms(double delta, double x, double y) {
    const double lx = std::log(x);
    const double ly = std::log(y);
    const double m = std::max(lx, ly);
    const double logS = delta * m + std::log(std::exp(delta * (lx - m)) + std::exp(delta * (ly - m)));
    return {lx, ly, logS, std::exp(logS / delta)};
}

double gumbel_log_density_xy(double delta, double x, double y) {
    const GumbelTerms t = gumbel_terms(delta, x, y);
    return -t.A + (delta - 1.0) * (t.lx + t.ly) + std::log(t.A + delta - 1.0) -
           (2.0 - 1.0 / delta) * t.logS + x + y;
}

double t_log_const(double nu) {
    return std::lgamma(0.5 * (nu + 2.0)) + std::lgamma(0.5 * nu) - 2.0 * std::lgamma(0.5 * (nu + 1.0));
}

double t_log_density_xy(double rho, double nu, double x, double y, double k = NAN) {
    if (std::isnan(k)) k = t_log_const(nu);
    const double r2 = 1.0 - rho * rho;
    const double q = (x * x + y * y - 2.0 * rho * x * y) / (nu * r2);
    return k - 0.5 * std::log(r2) - 0.5 * (nu + 2.0) * std::log1p(q) +
           0.5 * (nu + 1.0) * (std::log1p(x * x / nu) + std::log1p(y * y / nu));
}

double gaussian_log_density_xy(double rho, double x, double y) {
    const double r2 = 1.0 - rho * rho;
    return -0.5 * std::log(r2) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2);
}

}  // namespace

std::string_view family_name(Family f) {
    switch (f) {
        case Family::Independence: return "indep";
        case Family::Gaussian: return "gaussian";
        case Family::StudentT: return "t";
        case Family::Gumbel: return "gumbel";
    }
    return "?";
}

Family parse_family(std::string_view name) {
    std::string s(name);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "indep" || s == "independence" || s == "i") return Family::Independence;
    if (s == "gaussian" || s == "normal" || s == "n") return Family::Gaussian;
    if (s == "t" || s == "student" || s == "studentt" || s == "student-t") return Family::StudentT;
    if (s == "gumbel" || s == "g") return Family::Gumbel;
    throw DomainError("unknown copula family '" + std::string(name) + "'");
}

int num_params(Family f) {
    switch (f) {
        case Family::Independence: return 0;
        case Family::Gaussian: return 1;
        case Family::StudentT: return 2;
        case Family::Gumbel: return 1;
    }
    return 0;
}

double clamp_unit(double u) {
    if (std::isnan(u)) return u;
    return std::clamp(u, kUnitEps, 1.0 - kUnitEps);
}

bool ParamBound::contains(double x) const {
    if (std::isnan(x)) return false;
    const bool lo_ok = lower_closed ? x >= lower : x > lower;
    const bool hi_ok = upper_closed ? x <= upper : x < upper;
    return lo_ok && hi_ok;
}

const ParamDomain& param_domain(Family f) {
    static const ParamDomain indep{};
    static const ParamDomain gauss{{{-1.0, 1.0, false, false}}, {Reparam::Tanh}, {"rho"}};
    static const ParamDomain student{
        {{-1.0, 1.0, false, false}, {2.0, INFINITY, false, false}},
        {Reparam::Tanh, Reparam::ShiftedExp},
        {"rho", "nu"}};
    static const ParamDomain gumbel{{{1.0, INFINITY, true, false}}, {Reparam::ShiftedExp}, {"delta"}};
    switch (f) {
        case Family::Independence: return indep;
        case Family::Gaussian: return gauss;
        case Family::StudentT: return student;
        case Family::Gumbel: return gumbel;
    }
    return indep;
}

PairCopula::PairCopula(Family family, std::span<const double> params) : family_(family) {
    if (static_cast<int>(params.size()) != num_params(family)) {
        throw DomainError("family " + std::string(family_name(family)) + " takes " +
                          std::to_string(num_params(family)) + " parameter(s), got " +
                          std::to_string(params.size()));
    }
    std::copy(params.begin(), params.end(), par_.begin());
    validate(family_, par_);
}

PairCopula::PairCopula(Family family, std::initializer_list<double> params)
    : PairCopula(family, std::span<const double>(params.begin(), params.size())) {}

PairCopula PairCopula::from_unconstrained(Family family, std::span<const double> eta) {
    PairCopula c;
    c.family_ = family;
    switch (family) {
        case Family::Independence:
            break;
        case Family::Gaussian:
            c.par_[0] = std::tanh(std::clamp(eta[0], -kMaxAbsEtaRho, kMaxAbsEtaRho));
            break;
        case Family::StudentT:
            c.par_[0] = std::tanh(std::clamp(eta[0], -kMaxAbsEtaRho, kMaxAbsEtaRho));
            c.par_[1] = std::min(2.0 + std::exp(std::clamp(eta[1], kMinEtaExp, kMaxEtaNu)), kMaxNu);
            break;
        case Family::Gumbel:
            c.par_[0] = 1.0 + std::exp(std::clamp(eta[0], kMinEtaExp, kMaxEtaDelta));
            break;
    }
    return c;
}

std::vector<double> PairCopula::to_unconstrained() const {
    switch (family_) {
        case Family::Independence:
            return {};
        case Family::Gaussian:
            return {std::atanh(std::clamp(par_[0], -1.0 + 1e-15, 1.0 - 1e-15))};
        case Family::StudentT:
            return {std::atanh(std::clamp(par_[0], -1.0 + 1e-15, 1.0 - 1e-15)),
                    std::log(std::min(par_[1], kMaxNu) - 2.0)};
        case Family::Gumbel:
            return {std::log(std::max(par_[0] - 1.0, std::exp(kMinEtaExp)))};
    }
    return {};
}

std::vector<double> PairCopula::params() const {
    return {par_.begin(), par_.begin() + size()};
}

std::string PairCopula::describe() const {
    std::ostringstream os;
    os << family_name(family_);
    const auto& dom = param_domain(family_);
    for (int k = 0; k < size(); ++k) os << (k == 0 ? "(" : ", ") << dom.names[k] << "=" << par_[k];
    if (size() > 0) os << ")";
    return os.str();
}

double log_density(const PairCopula& c, double u, double v) {
    u = clamp_unit(u);
    v = clamp_unit(v);
    switch (c.family()) {
        case Family::Independence:
            return 0.0;
        case Family::Gaussian:
            return gaussian_log_density_xy(c.rho(), special::norm_quantile(u), special::norm_quantile(v));
        case Family::StudentT: {
            const double nu = c.nu();
            return t_log_density_xy(c.rho(), nu, special::t_quantile(u, nu), special::t_quantile(v, nu));
        }
        case Family::Gumbel:
            return gumbel_log_density_xy(c.delta(), -std::log(u), -std::log(v));
    }
    return 0.0;
}

double density(const PairCopula& c, double u, double v) { return std::exp(log_density(c, u, v)); }

namespace {

double h_unclamped(const PairCopula& c, double u, double v) {
    u = clamp_unit(u);
    v = clamp_unit(v);
    switch (c.family()) {
        case Family::Independence:
            return u;
        case Family::Gaussian: {
            const double rho = c.rho();
            const double x = special::norm_quantile(u);
            const double y = special::norm_quantile(v);
            return special::norm_cdf((x - rho * y) / std::sqrt(1.0 - rho * rho));
        }
        case Family::StudentT: {
            const double rho = c.rho();
            const double nu = c.nu();
            const double x = special::t_quantile(u, nu);
            const double y = special::t_quantile(v, nu);
            const double scale = std::sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0));
            return special::t_cdf((x - rho * y) / scale, nu + 1.0);
        }
        case Family::Gumbel: {
            const double delta = c.delta();
            const double x = -std::log(u);
            const double y = -std::log(v);
            const GumbelTerms t = gumbel_terms(delta, x, y);
            // exp(-A) A^(1-delta) y^(delta-1) / v
            return std::exp(-t.A + (1.0 - delta) * std::log(t.A) + (delta - 1.0) * t.ly + y);
        }
    }
    return u;
}

}  // namespace

// Rounding can push the closed forms a hair outside the unit interval; the
// result feeds further h evaluations, so it is clamped like any input.
double h(const PairCopula& c, double u, double v) { return clamp_unit(h_unclamped(c, u, v)); }

double h_inverse(const PairCopula& c, double p, double v) {
    p = clamp_unit(p);
    v = clamp_unit(v);
    switch (c.family()) {
        case Family::Independence:
            return p;
        case Family::Gaussian: {
            const double rho = c.rho();
            const double y = special::norm_quantile(v);
            return special::norm_cdf(rho * y + std::sqrt(1.0 - rho * rho) * special::norm_quantile(p));
        }
        case Family::StudentT: {
            const double rho = c.rho();
            const double nu = c.nu();
            const double y = special::t_quantile(v, nu);
            const double scale = std::sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0));
            return special::t_cdf(rho * y + scale * special::t_quantile(p, nu + 1.0), nu);
        }
        case Family::Gumbel: {
            const double delta = c.delta();
            const double y = -std::log(v);
            const double ly = std::log(y);
            // With z = A(x, y) the equation h = p reads
            //   z + (delta - 1) log z = y + (delta - 1) log y - log p,
            // whose left side is increasing and concave in z, so Newton from
            // z = y climbs monotonically to the root.
            const double target = y + (delta - 1.0) * ly - std::log(p);
            double z = y;
            bool done = false;
            for (int it = 0; it < 200; ++it) {
                const double g = z + (delta - 1.0) * std::log(z) - target;
                const double step = g / (1.0 + (delta - 1.0) / z);
                const double next = std::max(z - step, z);
                if (std::abs(next - z) <= 1e-15 * next) {
                    z = next;
                    done = true;
                    break;
                }
                z = next;
            }
            if (!done) {
                throw ConvergenceError("Gumbel h-inverse did not converge (delta=" +
                                       std::to_string(delta) + ")");
            }
            // x = (z^d - y^d)^(1/d) = y (exp(d log(z/y)) - 1)^(1/d)
            const double ratio = std::expm1(delta * std::log(z / y));
            if (!(ratio > 0.0)) return 1.0 - kUnitEps;
            const double x = y * std::pow(ratio, 1.0 / delta);
            return std::exp(-x);
        }
    }
    return p;
}

double kendall_tau(const PairCopula& c) {
    switch (c.family()) {
        case Family::Independence:
            return 0.0;
        case Family::Gaussian:
        case Family::StudentT:
            return 2.0 / std::numbers::pi * std::asin(c.rho());
        case Family::Gumbel:
            return 1.0 - 1.0 / c.delta();
    }
    return 0.0;
}

PairCopula tau_inversion(Family f, double tau, double nu) {
    switch (f) {
        case Family::Independence:
            return {};
        case Family::Gaussian:
            return PairCopula::gaussian(std::clamp(std::sin(0.5 * std::numbers::pi * tau), -0.98, 0.98));
        case Family::StudentT:
            return PairCopula::student_t(
                std::clamp(std::sin(0.5 * std::numbers::pi * tau), -0.98, 0.98), nu);
        case Family::Gumbel:
            return PairCopula::gumbel(1.0 / (1.0 - std::clamp(tau, 0.01, 0.95)));
    }
    return {};
}

double sample_kendall_tau(std::span<const double> x, std::span<const double> y) {
    // Knight's algorithm: sort by (x, y), count y-inversions with merge sort.
    const std::size_t n = x.size();
    if (n != y.size()) throw DomainError("sample_kendall_tau: length mismatch");
    if (n < 2) return 0.0;
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
    });

    auto pairs = [](double k) { return k * (k - 1.0) / 2.0; };
    double n1 = 0.0;  // pairs tied in x
    double n3 = 0.0;  // pairs tied in both
    {
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i + 1;
            while (j < n && x[idx[j]] == x[idx[i]]) ++j;
            n1 += pairs(static_cast<double>(j - i));
            std::size_t k = i;
            while (k < j) {
                std::size_t l = k + 1;
                while (l < j && y[idx[l]] == y[idx[k]]) ++l;
                n3 += pairs(static_cast<double>(l - k));
                k = l;
            }
            i = j;
        }
    }

    std::vector<double> ys(n), buf(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];
    double swaps = 0.0;
    for (std::size_t width = 1; width < n; width *= 2) {
        for (std::size_t lo = 0; lo < n; lo += 2 * width) {
            const std::size_t mid = std::min(lo + width, n);
            const std::size_t hi = std::min(lo + 2 * width, n);
            std::size_t a = lo, b = mid, o = lo;
            while (a < mid && b < hi) {
                if (ys[b] < ys[a]) {
                    swaps += static_cast<double>(mid - a);
                    buf[o++] = ys[b++];
                } else {
                    buf[o++] = ys[a++];
                }
            }
            while (a < mid) buf[o++] = ys[a++];
            while (b < hi) buf[o++] = ys[b++];
        }
        ys.swap(buf);
    }

    double n2 = 0.0;  // pairs tied in y
    {
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i + 1;
            while (j < n && ys[j] == ys[i]) ++j;
            n2 += pairs(static_cast<double>(j - i));
            i = j;
        }
    }
    const double n0 = pairs(static_cast<double>(n));
    const double concordant_minus_discordant = n0 - n1 - n2 + n3 - 2.0 * swaps;
    const double denom = std::sqrt((n0 - n1) * (n0 - n2));
    return denom > 0.0 ? concordant_minus_discordant / denom : 0.0;
}

double pair_loglik(const PairCopula& c, std::span<const double> u, std::span<const double> v) {
    if (c.family() == Family::Independence) return 0.0;
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) s += log_density(c, u[k], v[k]);
    return s;
}

void h_vec(const PairCopula& c, std::span<const double> u, std::span<const double> v,
           std::span<double> out) {
    for (std::size_t k = 0; k < u.size(); ++k) out[k] = h(c, u[k], v[k]);
}

void pair_terms(const PairCopula& c, std::span<const double> u, std::span<const double> v,
                std::span<double> log_dens, std::span<double> h_uv, std::span<double> h_vu) {
    const std::size_t n = u.size();
    const bool want_ld = !log_dens.empty();
    const bool want_uv = !h_uv.empty();
    const bool want_vu = !h_vu.empty();
    switch (c.family()) {
        case Family::Independence:
            for (std::size_t k = 0; k < n; ++k) {
                if (want_ld) log_dens[k] = 0.0;
                if (want_uv) h_uv[k] = clamp_unit(u[k]);
                if (want_vu) h_vu[k] = clamp_unit(v[k]);
            }
            return;
        case Family::Gaussian: {
            const double rho = c.rho();
            const double s = std::sqrt(1.0 - rho * rho);
            for (std::size_t k = 0; k < n; ++k) {
                const double x = special::norm_quantile(clamp_unit(u[k]));
                const double y = special::norm_quantile(clamp_unit(v[k]));
                if (want_ld) log_dens[k] = gaussian_log_density_xy(rho, x, y);
                if (want_uv) h_uv[k] = clamp_unit(special::norm_cdf((x - rho * y) / s));
                if (want_vu) h_vu[k] = clamp_unit(special::norm_cdf((y - rho * x) / s));
            }
            return;
        }
        case Family::StudentT: {
            const double rho = c.rho();
            const double nu = c.nu();
            const double lk = t_log_const(nu);
            const double r2 = 1.0 - rho * rho;
            for (std::size_t k = 0; k < n; ++k) {
                const double x = special::t_quantile(clamp_unit(u[k]), nu);
                const double y = special::t_quantile(clamp_unit(v[k]), nu);
                if (want_ld) log_dens[k] = t_log_density_xy(rho, nu, x, y, lk);
                if (want_uv)
                    h_uv[k] = clamp_unit(special::t_cdf((x - rho * y) / std::sqrt((nu + y * y) * r2 / (nu + 1.0)),
                                                        nu + 1.0));
                if (want_vu)
                    h_vu[k] = clamp_unit(special::t_cdf((y - rho * x) / std::sqrt((nu + x * x) * r2 / (nu + 1.0)),
                                                        nu + 1.0));
            }
            return;
        }
        case Family::Gumbel: {
            const double delta = c.delta();
            for (std::size_t k = 0; k < n; ++k) {
                const double x = -std::log(clamp_unit(u[k]));
                const double y = -std::log(clamp_unit(v[k]));
                const GumbelTerms t = gumbel_terms(delta, x, y);
                if (want_ld)
                    log_dens[k] = -t.A + (delta - 1.0) * (t.lx + t.ly) + std::log(t.A + delta - 1.0) -
                                  (2.0 - 1.0 / delta) * t.logS + x + y;
                const double base = -t.A + (1.0 - delta) * std::log(t.A);
                if (want_uv) h_uv[k] = clamp_unit(std::exp(base + (delta - 1.0) * t.ly + y));
                if (want_vu) h_vu[k] = clamp_unit(std::exp(base + (delta - 1.0) * t.lx + x));
            }
            return;
        }
    }
}

namespace {

// Per-family objective in unconstrained coordinates, with whatever
// transforms of the data do not depend on the parameters computed once.
class PairObjective {
public:
    PairObjective(std::span<const double> u, std::span<const double> v, Family f)
        : family_(f), n_(u.size()) {
        switch (f) {
            case Family::Gaussian: {
                for (std::size_t k = 0; k < n_; ++k) {
                    const double x = special::norm_quantile(clamp_unit(u[k]));
                    const double y = special::norm_quantile(clamp_unit(v[k]));
                    sq_ += x * x + y * y;
                    cross_ += x * y;
                }
                break;
            }
            case Family::Gumbel: {
                x_.resize(n_);
                y_.resize(n_);
                for (std::size_t k = 0; k < n_; ++k) {
                    x_[k] = -std::log(clamp_unit(u[k]));
                    y_[k] = -std::log(clamp_unit(v[k]));
                }
                break;
            }
            case Family::StudentT:
                u_.assign(u.begin(), u.end());
                v_.assign(v.begin(), v.end());
                for (auto& a : u_) a = clamp_unit(a);
                for (auto& a : v_) a = clamp_unit(a);
                break;
            case Family::Independence:
                break;
        }
    }

    double operator()(std::span<const double> eta) const {
        const PairCopula c = PairCopula::from_unconstrained(family_, eta);
        switch (family_) {
            case Family::Independence:
                return 0.0;
            case Family::Gaussian: {
                const double rho = c.rho();
                const double r2 = 1.0 - rho * rho;
                return -0.5 * static_cast<double>(n_) * std::log(r2) -
                       (rho * rho * sq_ - 2.0 * rho * cross_) / (2.0 * r2);
            }
            case Family::Gumbel: {
                double s = 0.0;
                for (std::size_t k = 0; k < n_; ++k) s += gumbel_log_density_xy(c.delta(), x_[k], y_[k]);
                return s;
            }
            case Family::StudentT: {
                const double nu = c.nu();
                double s = 0.0;
                for (std::size_t k = 0; k < n_; ++k) {
                    s += t_log_density_xy(c.rho(), nu, special::t_quantile(u_[k], nu),
                                          special::t_quantile(v_[k], nu));
                }
                return s;
            }
        }
        return 0.0;
    }

private:
    Family family_;
    std::size_t n_;
    double sq_ = 0.0;
    double cross_ = 0.0;
    std::vector<double> x_, y_, u_, v_;
};

struct EtaLimits {
    double lo, hi;
};

EtaLimits eta_limits(Family f) {
    if (f == Family::Gumbel) return {kMinEtaExp, kMaxEtaDelta};
    return {-kMaxAbsEtaRho, kMaxAbsEtaRho};
}

OptimResult fit_one_param(const PairObjective& obj, Family f, double eta0) {
    const EtaLimits lim = eta_limits(f);
    double width = 3.0;
    auto f1 = [&](double e) { return obj(std::span<const double>(&e, 1)); };
    for (;;) {
        const double lo = std::max(lim.lo, eta0 - width);
        const double hi = std::min(lim.hi, eta0 + width);
        OptimResult r = maximize_1d(f1, lo, hi);
        const double x = r.x(0);
        const double tol = 1e-4 * (hi - lo);
        const bool at_lo = x - lo < tol && lo > lim.lo;
        const bool at_hi = hi - x < tol && hi < lim.hi;
        if ((!at_lo && !at_hi) || width > 64.0) return r;
        eta0 = x;
        width *= 2.0;
    }
}

}  // namespace

PairFit fit_pair(std::span<const double> u, std::span<const double> v, Family family,
                 std::optional<PairCopula> start, const PairFitOptions& opts) {
    const std::size_t n = u.size();
    if (n != v.size()) throw DomainError("fit_pair: u and v differ in length");
    if (n < 10) throw DomainError("fit_pair: need at least 10 observations");
    for (std::size_t k = 0; k < n; ++k) {
        if (!(u[k] >= 0.0 && u[k] <= 1.0 && v[k] >= 0.0 && v[k] <= 1.0))
            throw DomainError("fit_pair: observations must lie in [0, 1]");
    }
    bool all_same = true;
    for (std::size_t k = 1; k < n && all_same; ++k) all_same = u[k] == u[0] && v[k] == v[0];
    if (all_same) throw DegenerateDataError("fit_pair: all observation pairs are identical");

    PairFit out;
    if (family == Family::Independence) {
        out.converged = true;
        return out;
    }
    if (start && start->family() != family) throw DomainError("fit_pair: start value family mismatch");
    const PairCopula init = start ? *start : tau_inversion(family, sample_kendall_tau(u, v));

    const PairObjective obj(u, v, family);
    std::vector<Eigen::VectorXd> starts;
    {
        const auto e = init.to_unconstrained();
        starts.emplace_back(Eigen::Map<const Eigen::VectorXd>(e.data(), static_cast<Eigen::Index>(e.size())));
    }
    if (opts.multistart) {
        std::mt19937_64 rng(opts.seed);
        std::normal_distribution<double> z(0.0, 1.0);
        for (int r = 0; r < 5; ++r) {
            Eigen::VectorXd e = starts[0];
            for (Eigen::Index i = 0; i < e.size(); ++i) e(i) += z(rng);
            starts.push_back(e);
        }
    }

    OptimResult best;
    bool have = false;
    int evals = 0;
    for (const auto& s : starts) {
        OptimResult r;
        if (num_params(family) == 1) {
            r = fit_one_param(obj, family, s(0));
        } else {
            const Objective f = [&](const Eigen::VectorXd& e) {
                return obj(std::span<const double>(e.data(), static_cast<std::size_t>(e.size())));
            };
            r = maximize(f, s);
        }
        evals += r.evaluations;
        if (!have || r.value > best.value) {
            best = r;
            have = true;
        }
    }
    out.copula = PairCopula::from_unconstrained(
        family, std::span<const double>(best.x.data(), static_cast<std::size_t>(best.x.size())));
    out.loglik = best.value;
    out.evaluations = evals;
    out.converged = best.converged;
    out.grad_norm = best.grad_norm;
    return out;
}

}  // namespace pcc
