#pragma once

// Scalar special functions shared by the copula and margin code.

namespace pcc::special {

double norm_pdf(double x);
double norm_cdf(double x);
// Upper tail 1 - Phi(x), accurate for large x.
double norm_sf(double x);
double norm_quantile(double p);

double t_log_pdf(double x, double nu);
double t_cdf(double x, double nu);
double t_quantile(double p, double nu);

// Regularized lower incomplete gamma P(a, x) and its inverse in x.
double gamma_p(double a, double x);
double gamma_p_inv(double a, double p);
double gamma_q(double a, double x);
double gamma_q_inv(double a, double q);

double lgamma(double x);
double digamma(double x);

}  // namespace pcc::special
