#include "pcc/vine.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "pcc/errors.hpp"

namespace pcc {

std::string_view vine_kind_name(VineKind k) { return k == VineKind::DVine ? "dvine" : "cvine"; }

VineKind parse_vine_kind(std::string_view s) {
    if (s == "dvine" || s == "d" || s == "D") return VineKind::DVine;
    if (s == "cvine" || s == "c" || s == "C") return VineKind::CVine;
    throw DomainError("unknown vine kind '" + std::string(s) + "' (expected dvine or cvine)");
}

Skeleton::Skeleton(VineKind k, int dim, std::vector<Family> fams)
    : kind(k), d(dim), families(std::move(fams)) {
    if (d < 2) throw DomainError("vine dimension must be at least 2");
    if (static_cast<int>(families.size()) != num_edges()) {
        throw DomainError("a " + std::to_string(d) + "-dimensional vine has " + std::to_string(num_edges()) +
                          " edges, got " + std::to_string(families.size()) + " families");
    }
}

int Skeleton::num_params() const {
    int p = 0;
    for (Family f : families) p += pcc::num_params(f);
    return p;
}

namespace {

PairCopula placeholder(Family f) {
    switch (f) {
        case Family::Independence: return {};
        case Family::Gaussian: return PairCopula::gaussian(0.0);
        case Family::StudentT: return PairCopula::student_t(0.0, 10.0);
        case Family::Gumbel: return PairCopula::gumbel(1.0);
    }
    return {};
}

void check_unit_matrix(const Eigen::MatrixXd& U, int d) {
    if (U.cols() != d)
        throw DomainError("data has " + std::to_string(U.cols()) + " columns, vine dimension is " +
                          std::to_string(d));
}

}  // namespace

VineSpec::VineSpec(VineKind kind, int d, std::vector<PairCopula> edges)
    : kind_(kind), d_(d), edges_(std::move(edges)) {
    if (d < 2) throw DomainError("vine dimension must be at least 2");
    if (static_cast<int>(edges_.size()) != d * (d - 1) / 2) {
        throw DomainError("a " + std::to_string(d) + "-dimensional vine has " +
                          std::to_string(d * (d - 1) / 2) + " edges, got " + std::to_string(edges_.size()));
    }
}

VineSpec::VineSpec(const Skeleton& sk) : kind_(sk.kind), d_(sk.d) {
    if (static_cast<int>(sk.families.size()) != sk.num_edges())
        throw DomainError("skeleton family list does not match its dimension");
    edges_.clear();
    for (Family f : sk.families) edges_.push_back(placeholder(f));
}

int VineSpec::num_params() const {
    int p = 0;
    for (const auto& e : edges_) p += e.size();
    return p;
}

int VineSpec::edge_index(int d, int level, int edge) {
    if (level < 0 || level > d - 2 || edge < 0 || edge > d - 2 - level)
        throw DomainError("edge (" + std::to_string(level) + ", " + std::to_string(edge) + ") out of range");
    return level * (d - 1) - level * (level - 1) / 2 + edge;
}

Skeleton VineSpec::skeleton() const {
    std::vector<Family> fams;
    for (const auto& e : edges_) fams.push_back(e.family());
    return Skeleton(kind_, d_, std::move(fams));
}

Eigen::VectorXd VineSpec::theta() const {
    Eigen::VectorXd t(num_params());
    int k = 0;
    for (const auto& e : edges_)
        for (int s = 0; s < e.size(); ++s) t(k++) = e.param(s);
    return t;
}

void VineSpec::set_theta(const Eigen::VectorXd& theta) {
    if (theta.size() != num_params())
        throw DomainError("expected " + std::to_string(num_params()) + " parameters, got " +
                          std::to_string(theta.size()));
    int k = 0;
    for (auto& e : edges_) {
        const int m = e.size();
        e = PairCopula(e.family(), std::span<const double>(theta.data() + k, static_cast<std::size_t>(m)));
        k += m;
    }
}

Eigen::VectorXd VineSpec::eta() const {
    Eigen::VectorXd t(num_params());
    int k = 0;
    for (const auto& e : edges_)
        for (double v : e.to_unconstrained()) t(k++) = v;
    return t;
}

void VineSpec::set_eta(const Eigen::VectorXd& eta) {
    if (eta.size() != num_params()) throw DomainError("unconstrained parameter vector has the wrong length");
    int k = 0;
    for (auto& e : edges_) {
        const int m = e.size();
        e = PairCopula::from_unconstrained(e.family(),
                                           std::span<const double>(eta.data() + k, static_cast<std::size_t>(m)));
        k += m;
    }
}

std::vector<VineSpec::ParamRef> VineSpec::param_refs() const {
    std::vector<ParamRef> refs;
    for (int l = 0; l < d_ - 1; ++l)
        for (int e = 0; e < edges_in_level(l); ++e)
            for (int s = 0; s < edge(l, e).size(); ++s) refs.push_back({l, e, s});
    return refs;
}

std::vector<std::string> VineSpec::param_labels() const {
    std::vector<std::string> out;
    const std::string sep = d_ >= 10 ? "," : "";
    for (const auto& r : param_refs()) {
        const IndexSet ix = index_sets(kind_, d_, r.edge + 1, r.level + 1);
        std::ostringstream os;
        os << param_domain(edge(r.level, r.edge).family()).names[r.slot] << "_" << ix.conditioned.first << sep
           << ix.conditioned.second;
        if (!ix.conditioning.empty()) {
            os << "|";
            for (std::size_t k = 0; k < ix.conditioning.size(); ++k) os << (k ? sep : "") << ix.conditioning[k];
        }
        out.push_back(os.str());
    }
    return out;
}

IndexSet index_sets(VineKind kind, int d, int i, int j) {
    if (j < 1 || j > d - 1 || i < 1 || i > d - j)
        throw DomainError("index_sets: need 1 <= j <= d-1 and 1 <= i <= d-j");
    IndexSet out;
    if (kind == VineKind::DVine) {
        for (int k = i + 1; k <= i + j - 1; ++k) out.conditioning.push_back(k);
        out.conditioned = {i, i + j};
    } else {
        for (int k = 1; k <= j - 1; ++k) out.conditioning.push_back(k);
        out.conditioned = {j, j + i};
    }
    return out;
}

LevelArguments next_level_arguments(const VineSpec& spec, const LevelArguments& cur) {
    const int l = cur.level;
    const int m = spec.edges_in_level(l);
    if (m < 2) throw DomainError("no level above the top of the vine");
    const std::size_t n = cur.first.empty() ? 0 : cur.first[0].size();
    LevelArguments next;
    next.level = l + 1;
    next.first.assign(m - 1, std::vector<double>(n));
    next.second.assign(m - 1, std::vector<double>(n));
    if (spec.kind() == VineKind::DVine) {
        for (int i = 0; i < m - 1; ++i) {
            const PairCopula& a = spec.edge(l, i);
            const PairCopula& b = spec.edge(l, i + 1);
            for (std::size_t k = 0; k < n; ++k) {
                next.first[i][k] = clamp_unit(h(a, cur.first[i][k], cur.second[i][k]));
                next.second[i][k] = clamp_unit(h(b, cur.second[i + 1][k], cur.first[i + 1][k]));
            }
        }
    } else {
        const PairCopula& root = spec.edge(l, 0);
        std::vector<double> shared(n);
        for (std::size_t k = 0; k < n; ++k) shared[k] = clamp_unit(h(root, cur.second[0][k], cur.first[0][k]));
        for (int i = 0; i < m - 1; ++i) {
            next.first[i] = shared;
            const PairCopula& b = spec.edge(l, i + 1);
            for (std::size_t k = 0; k < n; ++k)
                next.second[i][k] = clamp_unit(h(b, cur.second[i + 1][k], cur.first[i + 1][k]));
        }
    }
    return next;
}

namespace {

LevelArguments ground_level(const VineSpec& spec, const Eigen::MatrixXd& U) {
    const int d = spec.dim();
    const std::size_t n = static_cast<std::size_t>(U.rows());
    LevelArguments a;
    a.level = 0;
    a.first.assign(d - 1, std::vector<double>(n));
    a.second.assign(d - 1, std::vector<double>(n));
    for (int i = 0; i < d - 1; ++i) {
        const int c1 = spec.kind() == VineKind::DVine ? i : 0;
        for (std::size_t k = 0; k < n; ++k) {
            a.first[i][k] = clamp_unit(U(static_cast<Eigen::Index>(k), c1));
            a.second[i][k] = clamp_unit(U(static_cast<Eigen::Index>(k), i + 1));
        }
    }
    return a;
}

}  // namespace

std::vector<LevelArguments> level_arguments(const VineSpec& spec, const Eigen::MatrixXd& U, int up_to_level) {
    check_unit_matrix(U, spec.dim());
    const int top = up_to_level < 0 ? spec.dim() - 2 : std::min(up_to_level, spec.dim() - 2);
    std::vector<LevelArguments> out;
    out.push_back(ground_level(spec, U));
    for (int l = 1; l <= top; ++l) out.push_back(next_level_arguments(spec, out.back()));
    return out;
}

Eigen::VectorXd vine_log_density_rows(const VineSpec& spec, const Eigen::MatrixXd& U) {
    check_unit_matrix(U, spec.dim());
    const std::size_t n = static_cast<std::size_t>(U.rows());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(U.rows());
    const bool dvine = spec.kind() == VineKind::DVine;
    LevelArguments args = ground_level(spec, U);
    std::vector<double> ld(n);
    for (int l = 0; l < spec.dim() - 1; ++l) {
        const int m = spec.edges_in_level(l);
        const bool top = l + 1 == spec.dim() - 1;
        // The next level is built from the h values computed alongside each
        // edge's density, the same values next_level_arguments produces.
        LevelArguments next;
        if (!top) {
            next.level = l + 1;
            next.first.assign(m - 1, std::vector<double>(n));
            next.second.assign(m - 1, std::vector<double>(n));
        }
        for (int e = 0; e < m; ++e) {
            const PairCopula& c = spec.edge(l, e);
            // h(first | second) feeds first[e] above a D-vine edge, and
            // h(second | first) feeds second[e - 1] (or, at a C-vine root,
            // every first[i]).
            std::span<double> h_fs, h_sf;
            if (!top && dvine && e < m - 1) h_fs = next.first[e];
            if (!top && e > 0) h_sf = next.second[e - 1];
            if (!top && !dvine && e == 0) h_sf = next.first[0];
            if (c.family() == Family::Independence) {
                pair_terms(c, args.first[e], args.second[e], {}, h_fs, h_sf);
                continue;
            }
            pair_terms(c, args.first[e], args.second[e], ld, h_fs, h_sf);
            for (std::size_t k = 0; k < n; ++k) out(static_cast<Eigen::Index>(k)) += ld[k];
        }
        if (top) break;
        if (!dvine)
            for (int i = 1; i < m - 1; ++i) next.first[i] = next.first[0];
        args = std::move(next);
    }
    return out;
}

double vine_loglik(const VineSpec& spec, const Eigen::MatrixXd& U) { return vine_log_density_rows(spec, U).sum(); }

double vine_log_density(const VineSpec& spec, std::span<const double> u) {
    if (static_cast<int>(u.size()) != spec.dim()) throw DomainError("point dimension does not match the vine");
    Eigen::MatrixXd U(1, spec.dim());
    for (int j = 0; j < spec.dim(); ++j) U(0, j) = u[j];
    return vine_log_density_rows(spec, U)(0);
}

Eigen::MatrixXd simulate_from_uniforms(const VineSpec& spec, const Eigen::MatrixXd& W) {
    const int d = spec.dim();
    check_unit_matrix(W, d);
    Eigen::MatrixXd out(W.rows(), d);
    // first[l][i] and second[l][i] hold the level-l arguments of edge i for
    // the row being generated.
    std::vector<std::vector<double>> first(d - 1, std::vector<double>(d, 0.5));
    std::vector<std::vector<double>> second(d - 1, std::vector<double>(d, 0.5));
    const bool dvine = spec.kind() == VineKind::DVine;

    for (Eigen::Index r = 0; r < W.rows(); ++r) {
        for (int k = 0; k < d; ++k) {
            double p = clamp_unit(W(r, k));
            for (int l = k - 1; l >= 0; --l) {
                const int i = k - l - 1;
                const double cond = dvine ? first[l][i] : first[l][0];
                p = clamp_unit(h_inverse(spec.edge(l, i), p, cond));
                second[l][i] = p;
            }
            out(r, k) = p;
            if (dvine && k < d - 1) first[0][k] = p;
            if (!dvine && k == 0) first[0][0] = p;
            if (dvine) {
                // Conditional values of variable k-l-1 given the l+1 variables
                // after it, needed by the next variable at level l+1.
                for (int l = 0; l + 1 <= k && l + 1 < d - 1; ++l) {
                    const int i = k - l - 1;
                    if (i + l + 2 > d - 1) continue;
                    first[l + 1][i] = clamp_unit(h(spec.edge(l, i), first[l][i], second[l][i]));
                }
            } else if (k >= 1 && k < d - 1) {
                first[k][0] = clamp_unit(h(spec.edge(k - 1, 0), second[k - 1][0], first[k - 1][0]));
            }
        }
    }
    return out;
}

Eigen::MatrixXd simulate(const VineSpec& spec, int n, std::uint64_t seed) {
    if (n < 1) throw DomainError("simulate: n must be positive");
    std::mt19937_64 rng(seed);
    Eigen::MatrixXd W(n, spec.dim());
    // Fixed row-major consumption of 53-bit uniforms on the open interval.
    for (int r = 0; r < n; ++r)
        for (int j = 0; j < spec.dim(); ++j) W(r, j) = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
    return simulate_from_uniforms(spec, W);
}

double full_log_density(const VineSpec& spec, const std::vector<MarginModel>& margins, std::span<const double> x) {
    const int d = spec.dim();
    if (static_cast<int>(margins.size()) != d || static_cast<int>(x.size()) != d)
        throw DomainError("full density needs one margin and one coordinate per variable");
    std::vector<double> u(d);
    double s = 0.0;
    for (int j = 0; j < d; ++j) {
        if (!margins[j].in_support(x[j]))
            throw SupportError("coordinate " + std::to_string(j + 1) + " is outside its margin's support");
        s += marg_log_pdf(margins[j], x[j]);
        u[j] = marg_cdf(margins[j], x[j]);
    }
    return s + vine_log_density(spec, u);
}

double full_density(const VineSpec& spec, const std::vector<MarginModel>& margins, std::span<const double> x) {
    return std::exp(full_log_density(spec, margins, x));
}

Eigen::MatrixXd apply_margin_cdfs(const std::vector<MarginModel>& margins, const Eigen::MatrixXd& X) {
    if (static_cast<Eigen::Index>(margins.size()) != X.cols())
        throw DomainError("need exactly one margin per column");
    Eigen::MatrixXd U(X.rows(), X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        for (Eigen::Index r = 0; r < X.rows(); ++r) U(r, j) = clamp_unit(marg_cdf(margins[j], X(r, j)));
    return U;
}

Eigen::MatrixXd apply_margin_quantiles(const std::vector<MarginModel>& margins, const Eigen::MatrixXd& U) {
    if (static_cast<Eigen::Index>(margins.size()) != U.cols())
        throw DomainError("need exactly one margin per column");
    Eigen::MatrixXd X(U.rows(), U.cols());
    for (Eigen::Index j = 0; j < U.cols(); ++j)
        for (Eigen::Index r = 0; r < U.rows(); ++r) X(r, j) = marg_quantile(margins[j], clamp_unit(U(r, j)));
    return X;
}

}  // namespace pcc
