#include "pcc/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace pcc::special {

namespace {

// Stay in double throughout and report domain problems as NaN rather than
// throwing; callers validate their own arguments.
using Policy = boost::math::policies::policy<
    boost::math::policies::promote_double<false>,
    boost::math::policies::domain_error<boost::math::policies::ignore_error>,
    boost::math::policies::overflow_error<boost::math::policies::ignore_error>,
    boost::math::policies::evaluation_error<boost::math::policies::ignore_error>>;

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

}  // namespace

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double norm_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double norm_quantile(double p) {
    if (!(p > 0.0)) return p == 0.0 ? -std::numeric_limits<double>::infinity()
                                    : std::numeric_limits<double>::quiet_NaN();
    if (!(p < 1.0)) return p == 1.0 ? std::numeric_limits<double>::infinity()
                                    : std::numeric_limits<double>::quiet_NaN();
    // erfc_inv keeps full relative accuracy in both tails.
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p, Policy());
}

double t_log_pdf(double x, double nu) {
    return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
           0.5 * std::log(nu * std::numbers::pi) - 0.5 * (nu + 1.0) * std::log1p(x * x / nu);
}

double t_cdf(double x, double nu) {
    // P(T <= x) through the regularized incomplete beta. Pick the branch
    // that avoids cancellation for small and large |x|.
    const double x2 = x * x;
    double tail;
    if (nu > 2.0 * x2) {
        tail = 0.5 * boost::math::ibetac(0.5, 0.5 * nu, x2 / (nu + x2), Policy());
    } else {
        tail = 0.5 * boost::math::ibeta(0.5 * nu, 0.5, nu / (nu + x2), Policy());
    }
    return x > 0.0 ? 1.0 - tail : tail;
}

double t_quantile(double p, double nu) {
    if (p == 0.5) return 0.0;
    const boost::math::students_t_distribution<double, Policy> dist(nu);
    if (p < 0.5) return boost::math::quantile(dist, p);
    return -boost::math::quantile(dist, 1.0 - p);
}

double gamma_p(double a, double x) { return boost::math::gamma_p(a, x, Policy()); }
double gamma_q(double a, double x) { return boost::math::gamma_q(a, x, Policy()); }
double gamma_p_inv(double a, double p) { return boost::math::gamma_p_inv(a, p, Policy()); }
double gamma_q_inv(double a, double q) { return boost::math::gamma_q_inv(a, q, Policy()); }

double lgamma(double x) { return std::lgamma(x); }
double digamma(double x) { return boost::math::digamma(x, Policy()); }

}  // namespace pcc::special
