#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pcc {

// Parameters outside a family's domain, or otherwise invalid arguments.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Data outside the support of a marginal family.
class SupportError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Every observation identical, or otherwise carrying no information.
class DegenerateDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An iterative method hit its evaluation or iteration cap. The best point
// seen so far is kept so callers can decide whether to use it anyway.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, std::vector<double> best = {},
                     double best_value = 0.0)
        : std::runtime_error(what), best_(std::move(best)), best_value_(best_value) {}

    const std::vector<double>& best_point() const noexcept { return best_; }
    double best_value() const noexcept { return best_value_; }

private:
    std::vector<double> best_;
    double best_value_;
};

// A pair-copula fit failed somewhere inside a vine. Level and edge are
// 1-based, matching the way vine edges are usually written down.
class FitError : public std::runtime_error {
public:
    FitError(int level, int edge, const std::string& cause)
        : std::runtime_error("fit failed at level " + std::to_string(level) + ", edge " +
                             std::to_string(edge) + ": " + cause),
          level_(level), edge_(edge) {}

    int level() const noexcept { return level_; }
    int edge() const noexcept { return edge_; }

private:
    int level_;
    int edge_;
};

class SingularMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when too many bootstrap or efficiency-study replicates fail.
class ReplicateFailureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pcc
