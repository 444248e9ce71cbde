#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pcc/copula.hpp"
#include "pcc/margins.hpp"

namespace pcc {

enum class VineKind { DVine, CVine };

std::string_view vine_kind_name(VineKind k);
VineKind parse_vine_kind(std::string_view s);

// Edge families in storage order, without parameters.
struct Skeleton {
    VineKind kind = VineKind::DVine;
    int d = 2;
    std::vector<Family> families;  // level-major, edge-minor

    Skeleton() = default;
    Skeleton(VineKind kind, int d, std::vector<Family> families);
    int num_edges() const { return d * (d - 1) / 2; }
    int num_params() const;
};

// Levels and edges are 0-based in this API. Level j (0-based) has d-1-j
// edges. Edges are stored level-major, edge-minor, and the flattened
// parameter vector follows the same order with multi-parameter families
// contributing a contiguous block.
class VineSpec {
public:
    VineSpec() = default;
    VineSpec(VineKind kind, int d, std::vector<PairCopula> edges);
    // Edges get placeholder values (rho = 0, nu = 10, delta = 1); callers
    // normally follow up with set_theta.
    explicit VineSpec(const Skeleton& sk);

    VineKind kind() const noexcept { return kind_; }
    int dim() const noexcept { return d_; }
    int num_edges() const noexcept { return static_cast<int>(edges_.size()); }
    int num_params() const;

    static int edge_index(int d, int level, int edge);
    int edges_in_level(int level) const { return d_ - 1 - level; }

    const PairCopula& edge(int level, int e) const { return edges_[edge_index(d_, level, e)]; }
    PairCopula& edge(int level, int e) { return edges_[edge_index(d_, level, e)]; }
    const std::vector<PairCopula>& edges() const noexcept { return edges_; }

    Skeleton skeleton() const;

    Eigen::VectorXd theta() const;
    void set_theta(const Eigen::VectorXd& theta);  // throws DomainError on invalid values
    Eigen::VectorXd eta() const;                   // unconstrained coordinates
    void set_eta(const Eigen::VectorXd& eta);

    // For each flattened parameter: owning level, edge and slot.
    struct ParamRef {
        int level, edge, slot;
    };
    std::vector<ParamRef> param_refs() const;
    // Human-readable labels such as "delta_13|2" (1-based variables).
    std::vector<std::string> param_labels() const;

private:
    VineKind kind_ = VineKind::DVine;
    int d_ = 2;
    std::vector<PairCopula> edges_{PairCopula{}};
};

struct IndexSet {
    std::vector<int> conditioning;  // 1-based variable indices
    std::pair<int, int> conditioned;
};

// 1-based i (edge) and j (level), as edges are conventionally written:
// D-vine edge (i, i+j | i+1..i+j-1), C-vine edge (j, j+i | 1..j-1).
IndexSet index_sets(VineKind kind, int d, int i, int j);

struct LevelArguments {
    int level = 0;  // 0-based
    // Per edge, the two argument columns: the conditional distribution of
    // the first conditioned variable and of the second.
    std::vector<std::vector<double>> first, second;
};

// Arguments for levels 0..up_to_level (inclusive; default all levels).
// Level l only reads the parameters of edges at levels below l.
std::vector<LevelArguments> level_arguments(const VineSpec& spec, const Eigen::MatrixXd& U,
                                            int up_to_level = -1);
// Given level l arguments and the fitted level-l edges, the level l+1 ones.
LevelArguments next_level_arguments(const VineSpec& spec, const LevelArguments& current);

double vine_log_density(const VineSpec& spec, std::span<const double> u);
// Per-row copula log-densities.
Eigen::VectorXd vine_log_density_rows(const VineSpec& spec, const Eigen::MatrixXd& U);
double vine_loglik(const VineSpec& spec, const Eigen::MatrixXd& U);

// Inverse Rosenblatt transform of independent uniforms W (n x d).
Eigen::MatrixXd simulate_from_uniforms(const VineSpec& spec, const Eigen::MatrixXd& W);
// n draws from the vine copula, a pure function of (spec, n, seed).
Eigen::MatrixXd simulate(const VineSpec& spec, int n, std::uint64_t seed);

// Joint log density with parametric margins.
double full_log_density(const VineSpec& spec, const std::vector<MarginModel>& margins,
                        std::span<const double> x);
double full_density(const VineSpec& spec, const std::vector<MarginModel>& margins,
                    std::span<const double> x);

// Applies each margin's CDF (clamped into the unit interval) column-wise.
Eigen::MatrixXd apply_margin_cdfs(const std::vector<MarginModel>& margins, const Eigen::MatrixXd& X);
Eigen::MatrixXd apply_margin_quantiles(const std::vector<MarginModel>& margins, const Eigen::MatrixXd& U);

}  // namespace pcc
