#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pcc {

enum class Family { Independence, Gaussian, StudentT, Gumbel };

std::string_view family_name(Family f);
// Accepts "indep", "gaussian", "t", "gumbel" (and a few spelled-out aliases).
Family parse_family(std::string_view name);
int num_params(Family f);

// Inputs are clamped into [kUnitEps, 1 - kUnitEps] before any evaluation.
inline constexpr double kUnitEps = 1e-10;
double clamp_unit(double u);

// Upper cap applied to the Student-t degrees of freedom by the
// unconstrained parametrization.
inline constexpr double kMaxNu = 300.0;

struct ParamBound {
    double lower;
    double upper;
    bool lower_closed;
    bool upper_closed;
    bool contains(double x) const;
};

enum class Reparam {
    Tanh,        // theta = tanh(eta), onto (-1, 1)
    ShiftedExp,  // theta = lower + exp(eta), onto (lower, inf)
};

struct ParamDomain {
    std::vector<ParamBound> bounds;
    std::vector<Reparam> maps;
    std::vector<std::string> names;
};

const ParamDomain& param_domain(Family f);

class PairCopula {
public:
    PairCopula() = default;  // independence
    // Throws DomainError if the parameter count or values are invalid.
    PairCopula(Family family, std::span<const double> params);
    PairCopula(Family family, std::initializer_list<double> params);

    static PairCopula independence() { return {}; }
    static PairCopula gaussian(double rho) { return {Family::Gaussian, {rho}}; }
    static PairCopula student_t(double rho, double nu) { return {Family::StudentT, {rho, nu}}; }
    static PairCopula gumbel(double delta) { return {Family::Gumbel, {delta}}; }

    // Builds from unconstrained coordinates; never throws for finite eta.
    static PairCopula from_unconstrained(Family family, std::span<const double> eta);
    std::vector<double> to_unconstrained() const;

    Family family() const noexcept { return family_; }
    int size() const noexcept { return num_params(family_); }
    double param(int k) const { return par_[k]; }
    std::vector<double> params() const;

    // Convenience accessors; meaning depends on the family.
    double rho() const { return par_[0]; }
    double nu() const { return par_[1]; }
    double delta() const { return par_[0]; }

    std::string describe() const;

private:
    Family family_ = Family::Independence;
    std::array<double, 2> par_{0.0, 0.0};
};

double density(const PairCopula& c, double u, double v);
double log_density(const PairCopula& c, double u, double v);
// Conditional distribution of U given V = v, that is dC(u, v)/dv.
double h(const PairCopula& c, double u, double v);
// Solves h(c, u, v) = p for u.
double h_inverse(const PairCopula& c, double p, double v);
double kendall_tau(const PairCopula& c);

// Family member whose population tau equals tau (clipped into the family's
// attainable range). The Student-t degrees of freedom are set to nu.
PairCopula tau_inversion(Family f, double tau, double nu = 10.0);

// O(n log n) sample Kendall tau (tau-b, so ties are handled).
double sample_kendall_tau(std::span<const double> x, std::span<const double> y);

// Vectorised helpers over paired samples.
double pair_loglik(const PairCopula& c, std::span<const double> u, std::span<const double> v);
void h_vec(const PairCopula& c, std::span<const double> u, std::span<const double> v,
           std::span<double> out);

// Log density and both h-functions at every (u_k, v_k) in one pass, so the
// quantile transforms are computed once per point. Entry k of the outputs
// equals log_density(c, u_k, v_k), h(c, u_k, v_k) and h(c, v_k, u_k)
// exactly. An empty output span is skipped.
void pair_terms(const PairCopula& c, std::span<const double> u, std::span<const double> v,
                std::span<double> log_dens, std::span<double> h_uv, std::span<double> h_vu);

struct PairFitOptions {
    bool multistart = false;  // five extra random starts, keep the best
    std::uint64_t seed = 0;   // only used for multistart
};

struct PairFit {
    PairCopula copula;
    double loglik = 0.0;
    int evaluations = 0;
    bool converged = false;
    double grad_norm = 0.0;  // in unconstrained coordinates
};

// Maximum pseudo-likelihood fit of one family to paired observations.
PairFit fit_pair(std::span<const double> u, std::span<const double> v, Family family,
                 std::optional<PairCopula> start = std::nullopt,
                 const PairFitOptions& opts = {});

}  // namespace pcc
