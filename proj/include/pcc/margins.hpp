#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace pcc {

enum class MarginFamily { Normal, Exponential, StudentT, GeneralizedGamma };

std::string_view margin_family_name(MarginFamily f);
MarginFamily parse_margin_family(std::string_view name);
int num_margin_params(MarginFamily f);

// Normal{sigma} has mean zero, StudentT{nu} is the standard t.
// GeneralizedGamma{gamma, beta, p} has density
//   p / (beta^gamma Gamma(gamma/p)) x^(gamma-1) exp(-(x/beta)^p).
class MarginModel {
public:
    MarginModel() = default;
    MarginModel(MarginFamily family, std::span<const double> params);
    MarginModel(MarginFamily family, std::initializer_list<double> params);

    static MarginModel normal(double sigma) { return {MarginFamily::Normal, {sigma}}; }
    static MarginModel exponential(double lambda) { return {MarginFamily::Exponential, {lambda}}; }
    static MarginModel student_t(double nu) { return {MarginFamily::StudentT, {nu}}; }
    static MarginModel generalized_gamma(double gamma, double beta, double p) {
        return {MarginFamily::GeneralizedGamma, {gamma, beta, p}};
    }

    // All parameters are positive (nu > 2), so the unconstrained
    // coordinates are logs (log(nu - 2) for the t).
    static MarginModel from_unconstrained(MarginFamily family, std::span<const double> eta);
    std::vector<double> to_unconstrained() const;

    MarginFamily family() const noexcept { return family_; }
    int size() const noexcept { return num_margin_params(family_); }
    double param(int k) const { return par_[k]; }
    std::vector<double> params() const;
    std::vector<std::string> param_names() const;
    bool in_support(double x) const;
    std::string describe() const;

private:
    MarginFamily family_ = MarginFamily::Normal;
    std::array<double, 3> par_{1.0, 0.0, 0.0};
};

double marg_log_pdf(const MarginModel& m, double x);
double marg_pdf(const MarginModel& m, double x);
double marg_cdf(const MarginModel& m, double x);
double marg_quantile(const MarginModel& m, double p);

struct MarginFit {
    MarginModel model;
    double loglik = 0.0;
    int evaluations = 0;
    double grad_norm = 0.0;
};

// Maximum likelihood fit of one marginal family.
MarginFit fit_margin(MarginFamily family, std::span<const double> x);

// Column-wise rank / (n + 1) with average ranks for ties.
Eigen::MatrixXd pseudo_observations(const Eigen::MatrixXd& x);
std::vector<double> pseudo_observations(std::span<const double> column);

}  // namespace pcc
