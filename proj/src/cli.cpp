#include "pcc/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcc/asymptotics.hpp"
#include "pcc/errors.hpp"
#include "pcc/estimation.hpp"
#include "pcc/io.hpp"
#include "pcc/vine.hpp"

namespace pcc {

namespace {

using json = nlohmann::ordered_json;

// Inconsistent or malformed command-line input; maps to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Argument parsing helpers

std::vector<std::string> split_list(const std::string& s, char sep = ',') {
    std::vector<std::string> out;
    if (s.empty()) return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        const auto a = item.find_first_not_of(" \t");
        const auto b = item.find_last_not_of(" \t");
        if (a == std::string::npos) throw UsageError("empty entry in list '" + s + "'");
        out.push_back(item.substr(a, b - a + 1));
    }
    return out;
}

double parse_number(const std::string& s, const std::string& what) {
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && s.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        throw UsageError(what + ": '" + s + "' is not a finite number");
    return v;
}

template <class F>
auto as_usage(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
}

// d from the number of pair copulas d(d-1)/2, or -1 if there is no such d.
int dimension_from_edges(int k) {
    for (int d = 2; d * (d - 1) / 2 <= k; ++d)
        if (d * (d - 1) / 2 == k) return d;
    return -1;
}

Skeleton make_skeleton(const std::string& vine, const std::string& families, int d) {
    const VineKind kind = as_usage([&] { return parse_vine_kind(vine); });
    std::vector<Family> fams;
    for (const auto& name : split_list(families)) fams.push_back(as_usage([&] { return parse_family(name); }));
    const int k = static_cast<int>(fams.size());
    if (k == 0) throw UsageError("--families is required");
    if (d < 0) {
        d = dimension_from_edges(k);
        if (d < 0)
            throw UsageError("--families lists " + std::to_string(k) +
                             " pair copulas, which is not d(d-1)/2 for any dimension d");
    } else if (k != d * (d - 1) / 2) {
        throw UsageError("--families lists " + std::to_string(k) + " pair copulas but a " + std::to_string(d) +
                         "-dimensional vine has " + std::to_string(d * (d - 1) / 2));
    }
    return Skeleton(kind, d, std::move(fams));
}

VineSpec make_spec(const Skeleton& sk, const std::string& params) {
    if (params.empty()) throw UsageError("--params is required");
    const auto items = split_list(params);
    if (static_cast<int>(items.size()) != sk.num_params())
        throw UsageError("--params has " + std::to_string(items.size()) + " values but the vine has " +
                         std::to_string(sk.num_params()) + " parameters");
    Eigen::VectorXd theta(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) theta[i] = parse_number(items[i], "--params");
    VineSpec spec(sk);
    as_usage([&] {
        spec.set_theta(theta);
        return 0;
    });
    return spec;
}

// Margin list entries look like `exponential` or `exponential:1.5`; the
// parameters are separated by colons.
struct MarginArg {
    MarginFamily family;
    std::vector<double> params;
};

std::vector<MarginArg> parse_margins(const std::string& s) {
    std::vector<MarginArg> out;
    for (const auto& item : split_list(s)) {
        auto parts = split_list(item, ':');
        MarginArg m{as_usage([&] { return parse_margin_family(parts[0]); }), {}};
        for (std::size_t i = 1; i < parts.size(); ++i) m.params.push_back(parse_number(parts[i], "--margins"));
        if (!m.params.empty() && static_cast<int>(m.params.size()) != num_margin_params(m.family))
            throw UsageError("margin '" + item + "' needs " + std::to_string(num_margin_params(m.family)) +
                             " parameters");
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<MarginFamily> margin_families(const std::vector<MarginArg>& margins, int d) {
    if (static_cast<int>(margins.size()) != d)
        throw UsageError("--margins lists " + std::to_string(margins.size()) + " margins for " + std::to_string(d) +
                         " variables");
    std::vector<MarginFamily> out;
    for (const auto& m : margins) out.push_back(m.family);
    return out;
}

std::vector<MarginModel> margin_models(const std::vector<MarginArg>& margins, int d) {
    margin_families(margins, d);
    std::vector<MarginModel> out;
    for (const auto& m : margins) {
        if (m.params.empty())
            throw UsageError("margin '" + std::string(margin_family_name(m.family)) +
                             "' needs parameter values here, e.g. exponential:1");
        out.push_back(as_usage([&] { return MarginModel(m.family, m.params); }));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Output helpers

// Rounds to 12 significant digits so that JSON reports are stable against
// last-bit noise in the printed digits.
json num(double x) {
    if (!std::isfinite(x)) return nullptr;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return std::strtod(buf, nullptr);
}

json vec_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
    return a;
}

json mat_json(const Eigen::MatrixXd& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
    return a;
}

std::string fmt(double x, int digits = 6) {
    if (!std::isfinite(x)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

void print_table(std::ostream& os, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t j = 0; j < header.size(); ++j) width[j] = header[j].size();
    for (const auto& r : rows)
        for (std::size_t j = 0; j < r.size(); ++j) width[j] = std::max(width[j], r[j].size());
    auto line = [&](const std::vector<std::string>& r) {
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (j == 0)
                os << std::left << std::setw(static_cast<int>(width[j])) << r[j];
            else
                os << "  " << std::right << std::setw(static_cast<int>(width[j])) << r[j];
        }
        os << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
}

void print_matrix(std::ostream& os, const std::string& name, const Eigen::MatrixXd& m) {
    os << name << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) os << std::setw(16) << fmt(m(i, j), 10);
        os << '\n';
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << text;
}

// ---------------------------------------------------------------------------
// Shared options

struct Common {
    std::string vine = "dvine";
    std::string families;
    std::string margins;
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out;
    bool json_stdout = false;
    bool force_large = false;
};

void add_model_options(CLI::App* cmd, Common& c) {
    cmd->add_option("--vine", c.vine, "Vine shape: dvine or cvine")->capture_default_str();
    cmd->add_option("--families", c.families,
                    "Pair-copula families, level-major, comma separated (gaussian, t, gumbel, indep)");
    cmd->add_option("--margins", c.margins, "Margin families, comma separated, each as name[:p1[:p2..]]");
}

void add_run_options(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "Master random seed")->capture_default_str();
    cmd->add_option("--threads", c.threads, "Worker threads (0 = all cores); results do not depend on it")
        ->capture_default_str();
    cmd->add_flag("--force-large", c.force_large, "Allow SP and ML fits above the parameter cap");
}

void add_output_options(CLI::App* cmd, Common& c) {
    cmd->add_option("--out", c.out, "Write the JSON report to this file");
    cmd->add_flag("--json", c.json_stdout, "Print the JSON report instead of the text summary");
}

void emit(const Common& c, const json& report, const std::string& text, std::ostream& out) {
    if (!c.out.empty()) write_text_file(c.out, report.dump(2) + "\n");
    if (c.json_stdout)
        out << report.dump(2) << '\n';
    else
        out << text;
}

FitOptions fit_options(const Common& c) {
    FitOptions fo;
    fo.force_large = c.force_large;
    fo.threads = c.threads;
    return fo;
}

// ---------------------------------------------------------------------------
// Data loading shared by fit and bootstrap

struct Dataset {
    io::Table table;
    Eigen::MatrixXd U;
    long dropped = 0;
};

Dataset load_data(const std::string& path, bool drop_nonpositive) {
    Dataset ds;
    ds.table = io::read_csv_file(path);
    if (drop_nonpositive) {
        const auto before = ds.table.values.rows();
        ds.table = io::drop_nonpositive_rows(ds.table);
        ds.dropped = before - ds.table.values.rows();
    }
    if (ds.table.columns.size() < 2) throw UsageError("the data need at least two columns");
    ds.U = pseudo_observations(ds.table.values);
    return ds;
}

json parameters_json(const FitResult& f, const Uncertainty* unc, const CovMatrix* sandwich) {
    std::vector<std::string> labels = f.alpha_labels();
    const auto tl = f.theta_labels();
    labels.insert(labels.end(), tl.begin(), tl.end());
    Eigen::VectorXd est(labels.size());
    const auto a = f.alpha_hat();
    est << a, f.theta_hat;

    json arr = json::array();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        json p;
        p["label"] = labels[i];
        p["estimate"] = num(est[i]);
        if (unc) {
            p["se"] = num(unc->se[i]);
            p["lower"] = num(unc->lower[i]);
            p["upper"] = num(unc->upper[i]);
        }
        if (sandwich) {
            const auto k = static_cast<Eigen::Index>(i) - a.size();
            if (k >= 0) p["sandwich_se"] = num(sandwich->se()[k]);
        }
        arr.push_back(std::move(p));
    }
    return arr;
}

int count_params(const FitResult& f) { return static_cast<int>(f.theta_hat.size() + f.alpha_hat().size()); }

json fit_json(const FitResult& f, const Uncertainty* unc, const CovMatrix* sandwich) {
    json j;
    j["method"] = method_name(f.method);
    j["loglik"] = num(f.loglik);
    j["copula_loglik"] = num(f.copula_loglik);
    if (f.method == Method::ML || f.method == Method::IFM) j["margin_loglik"] = num(f.margin_loglik);
    j["num_params"] = count_params(f);
    j["aic"] = num(-2.0 * f.loglik + 2.0 * count_params(f));
    j["converged"] = f.converged;
    j["iterations"] = f.iterations;
    j["evaluations"] = f.evaluations;
    j["grad_norm"] = num(f.grad_norm);
    j["parameters"] = parameters_json(f, unc, sandwich);
    if (unc) {
        j["uncertainty"] = {{"kind", unc->kind},
                            {"confidence", 0.95},
                            {"replicates", unc->replicates},
                            {"failed", unc->failed}};
    }
    if (sandwich) j["sandwich"] = {{"V", mat_json(sandwich->V)}, {"n", sandwich->n}};
    if (!f.levels.empty()) {
        json lv = json::array();
        for (const auto& l : f.levels)
            lv.push_back({{"level", l.level + 1},
                          {"loglik", num(l.loglik)},
                          {"converged", l.converged},
                          {"evaluations", l.evaluations},
                          {"max_grad_norm", num(l.max_grad_norm)}});
        j["levels"] = lv;
    }
    return j;
}

void fit_text(std::ostream& os, const FitResult& f, const Uncertainty* unc, const CovMatrix* sandwich) {
    os << "method " << method_name(f.method) << "  loglik " << fmt(f.loglik, 10) << "  aic "
       << fmt(-2.0 * f.loglik + 2.0 * count_params(f), 10) << "  converged " << (f.converged ? "yes" : "no")
       << '\n';
    const json params = parameters_json(f, unc, sandwich);
    std::vector<std::string> header{"parameter", "estimate"};
    if (unc) header.insert(header.end(), {"se", "lower95", "upper95"});
    if (sandwich) header.push_back("sandwich_se");
    std::vector<std::vector<std::string>> rows;
    auto cell = [](const json& v) { return v.is_null() ? std::string("-") : fmt(v.get<double>()); };
    for (const auto& p : params) {
        std::vector<std::string> r{p["label"].get<std::string>(), cell(p["estimate"])};
        if (unc) r.insert(r.end(), {cell(p["se"]), cell(p["lower"]), cell(p["upper"])});
        if (sandwich) r.push_back(p.contains("sandwich_se") ? cell(p["sandwich_se"]) : "-");
        rows.push_back(std::move(r));
    }
    print_table(os, header, rows);
    if (unc && unc->kind == "bootstrap")
        os << "bootstrap replicates " << unc->replicates << " (" << unc->failed << " failed)\n";
}

json model_json(const Skeleton& sk, const std::vector<MarginFamily>& mf, long n, long dropped) {
    json j;
    j["vine"] = vine_kind_name(sk.kind);
    j["d"] = sk.d;
    j["n"] = n;
    if (dropped) j["dropped_rows"] = dropped;
    json fams = json::array();
    for (auto f : sk.families) fams.push_back(family_name(f));
    j["families"] = fams;
    if (!mf.empty()) {
        json m = json::array();
        for (auto f : mf) m.push_back(margin_family_name(f));
        j["margins"] = m;
    }
    return j;
}

// ---------------------------------------------------------------------------
// Commands

struct FitArgs {
    std::string data;
    std::string method = "ssp";
    int bootstrap = -1;  // -1: method default
    bool compare = false;
    bool sandwich = false;
    bool drop_nonpositive = false;
};

int cmd_fit(const Common& c, const FitArgs& a, std::ostream& out) {
    const Method m = as_usage([&] { return parse_method(a.method); });
    if (a.sandwich && m != Method::SSP) throw UsageError("--sandwich applies to --method ssp only");
    if (a.bootstrap == 1 || a.bootstrap < -1) throw UsageError("--bootstrap needs at least 2 replicates (or 0)");
    const Dataset ds = load_data(a.data, a.drop_nonpositive);
    const auto& X = ds.table.values;
    const int d = static_cast<int>(X.cols());
    const Skeleton sk = make_skeleton(c.vine, c.families, d);

    std::vector<MarginFamily> mf;
    if (!c.margins.empty()) mf = margin_families(parse_margins(c.margins), d);
    if ((m == Method::ML || m == Method::IFM) && mf.empty())
        throw UsageError("--method " + a.method + " needs --margins");

    const FitOptions fo = fit_options(c);
    const FitResult f = fit_method(m, X, ds.U, mf, sk, fo);

    std::optional<Uncertainty> unc;
    if (m == Method::ML && a.bootstrap < 0) {
        unc = ml_fisher_ci(f, X);
    } else {
        const int B = a.bootstrap < 0 ? 100 : a.bootstrap;
        if (B > 0) {
            BootstrapOptions bo;
            bo.replicates = B;
            bo.seed = c.seed;
            bo.threads = c.threads;
            bo.fit = fo;
            unc = bootstrap_se(f, X.rows(), bo);
        }
    }
    std::optional<CovMatrix> sandwich;
    if (a.sandwich) sandwich = ssp_sandwich(ds.U, f.spec);

    json report;
    report["command"] = "fit";
    report["data"] = a.data;
    report["seed"] = c.seed;
    report["model"] = model_json(sk, mf, X.rows(), ds.dropped);
    report["fit"] = fit_json(f, unc ? &*unc : nullptr, sandwich ? &*sandwich : nullptr);

    std::ostringstream text;
    text << "fit " << vine_kind_name(sk.kind) << " d=" << d << " n=" << X.rows();
    if (ds.dropped) text << " (" << ds.dropped << " rows dropped)";
    text << '\n';
    fit_text(text, f, unc ? &*unc : nullptr, sandwich ? &*sandwich : nullptr);

    if (a.compare) {
        std::vector<Method> methods{Method::SSP, Method::SP};
        if (!mf.empty()) methods.insert(methods.end(), {Method::IFM, Method::ML});
        json cmp = json::array();
        text << "\ncomparison\n";
        for (Method cm : methods) {
            const FitResult g = cm == m ? f : fit_method(cm, X, ds.U, mf, sk, fo);
            cmp.push_back(fit_json(g, nullptr, nullptr));
            fit_text(text, g, nullptr, nullptr);
        }
        report["compare"] = cmp;
    }
    emit(c, report, text.str(), out);
    return kExitOk;
}

int cmd_bootstrap(const Common& c, const FitArgs& a, int replicates, std::ostream& out) {
    const Method m = as_usage([&] { return parse_method(a.method); });
    if (replicates < 2) throw UsageError("--replicates must be at least 2");
    const Dataset ds = load_data(a.data, a.drop_nonpositive);
    const auto& X = ds.table.values;
    const int d = static_cast<int>(X.cols());
    const Skeleton sk = make_skeleton(c.vine, c.families, d);
    std::vector<MarginFamily> mf;
    if (!c.margins.empty()) mf = margin_families(parse_margins(c.margins), d);
    if ((m == Method::ML || m == Method::IFM) && mf.empty())
        throw UsageError("--method " + a.method + " needs --margins");

    const FitOptions fo = fit_options(c);
    const FitResult f = fit_method(m, X, ds.U, mf, sk, fo);
    BootstrapOptions bo;
    bo.replicates = replicates;
    bo.seed = c.seed;
    bo.threads = c.threads;
    bo.fit = fo;
    const Uncertainty u = bootstrap_se(f, X.rows(), bo);

    json report;
    report["command"] = "bootstrap";
    report["data"] = a.data;
    report["seed"] = c.seed;
    report["model"] = model_json(sk, mf, X.rows(), ds.dropped);
    report["fit"] = fit_json(f, &u, nullptr);
    if (!u.failures.empty()) report["failures"] = u.failures;

    std::ostringstream text;
    text << "bootstrap " << vine_kind_name(sk.kind) << " d=" << d << " n=" << X.rows() << " B=" << replicates
         << '\n';
    fit_text(text, f, &u, nullptr);
    emit(c, report, text.str(), out);
    return kExitOk;
}

struct SimulateArgs {
    std::string params;
    long n = 0;
};

int cmd_simulate(const Common& c, const SimulateArgs& a, std::ostream& out) {
    if (a.n < 1) throw UsageError("--n must be at least 1");
    const Skeleton sk = make_skeleton(c.vine, c.families, -1);
    const VineSpec spec = make_spec(sk, a.params);
    std::vector<MarginModel> margins;
    if (!c.margins.empty()) margins = margin_models(parse_margins(c.margins), sk.d);

    io::Table t;
    t.values = simulate(spec, static_cast<int>(a.n), c.seed);
    if (!margins.empty()) t.values = apply_margin_quantiles(margins, t.values);
    for (int j = 1; j <= sk.d; ++j) t.columns.push_back((margins.empty() ? "u" : "x") + std::to_string(j));

    if (c.out.empty())
        io::write_csv(out, t);
    else
        io::write_csv_file(c.out, t);
    return kExitOk;
}

struct EfficiencyArgs {
    std::string params;
    std::string methods = "ml,ifm,sp,ssp";
    long n = 1000;
    int replicates = 100;
};

int cmd_efficiency(const Common& c, const EfficiencyArgs& a, std::ostream& out) {
    if (a.n < 10) throw UsageError("--n must be at least 10");
    if (a.replicates < 2) throw UsageError("--replicates must be at least 2");
    const Skeleton sk = make_skeleton(c.vine, c.families, -1);
    EfficiencyConfig cfg;
    cfg.truth = make_spec(sk, a.params);
    if (c.margins.empty()) throw UsageError("efficiency needs --margins with parameter values");
    cfg.margins = margin_models(parse_margins(c.margins), sk.d);
    cfg.n = a.n;
    cfg.replicates = a.replicates;
    cfg.methods.clear();
    for (const auto& s : split_list(a.methods)) cfg.methods.push_back(as_usage([&] { return parse_method(s); }));
    cfg.seed = c.seed;
    cfg.threads = c.threads;
    cfg.fit = fit_options(c);

    const EfficiencyTable t = as_usage([&] { return efficiency_study(cfg); });
    const int levels = static_cast<int>(t.level_efficiency.cols());

    json report;
    report["command"] = "efficiency";
    report["seed"] = c.seed;
    report["model"] = model_json(sk, {}, a.n, 0);
    report["true_parameters"] = vec_json(t.truth);
    json margins = json::array();
    for (const auto& m : cfg.margins) margins.push_back(m.describe());
    report["model"]["margins"] = margins;
    report["replicates"] = a.replicates;
    report["replicates_used"] = t.replicates_used;
    report["failed"] = t.failed;
    json params = json::array();
    for (std::size_t i = 0; i < t.labels.size(); ++i) {
        json p;
        p["label"] = t.labels[i];
        p["level"] = t.level_of[i] + 1;
        p["truth"] = num(t.truth[i]);
        for (const auto& ms : t.methods) {
            p[std::string(method_name(ms.method))] = {{"mean", num(ms.mean[i])},
                                                       {"variance", num(ms.variance[i])},
                                                       {"rmse", num(ms.rmse[i])},
                                                       {"efficiency", num(ms.efficiency[i])}};
        }
        params.push_back(std::move(p));
    }
    report["parameters"] = params;
    json lev;
    for (std::size_t k = 0; k < t.methods.size(); ++k)
        lev[std::string(method_name(t.methods[k].method))] = vec_json(t.level_efficiency.row(k).transpose());
    report["level_efficiency"] = lev;

    // One row per parameter set with a column per (estimator, level), then
    // the per-parameter detail.
    std::ostringstream text;
    text << "relative efficiency Var(ML)/Var(method), n=" << a.n << ", replicates used " << t.replicates_used
         << " of " << a.replicates << '\n';
    std::vector<std::string> header{"parameters"};
    std::vector<std::string> row{"(" + [&] {
        std::string s;
        for (Eigen::Index i = 0; i < t.truth.size(); ++i) s += (i ? "," : "") + fmt(t.truth[i], 4);
        return s;
    }() + ")"};
    for (std::size_t k = 0; k < t.methods.size(); ++k) {
        if (t.methods[k].method == Method::ML) continue;
        for (int l = 0; l < levels; ++l) {
            std::string name(method_name(t.methods[k].method));
            for (auto& ch : name) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
            header.push_back(name + " T" + std::to_string(l + 1));
            row.push_back(fmt(t.level_efficiency(static_cast<Eigen::Index>(k), l), 3));
        }
    }
    print_table(text, header, {row});
    text << '\n';
    std::vector<std::string> dh{"parameter", "truth"};
    for (const auto& ms : t.methods) {
        const std::string nm(method_name(ms.method));
        dh.push_back(nm + " mean");
        dh.push_back(nm + " eff");
    }
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < t.labels.size(); ++i) {
        std::vector<std::string> r{t.labels[i], fmt(t.truth[i])};
        for (const auto& ms : t.methods) {
            r.push_back(fmt(ms.mean[i]));
            r.push_back(fmt(ms.efficiency[i], 3));
        }
        rows.push_back(std::move(r));
    }
    print_table(text, dh, rows);
    emit(c, report, text.str(), out);
    return kExitOk;
}

int cmd_gaussian_oracle(const Common& c, const std::vector<double>& rho, std::ostream& out) {
    const GaussianAnalytic g = as_usage([&] { return trivariate_gaussian_analytic(rho[0], rho[1], rho[2]); });
    json report;
    report["command"] = "gaussian-oracle";
    report["parameter_order"] = {"rho12", "rho23", "rho13"};
    report["rho"] = {num(rho[0]), num(rho[1]), num(rho[2])};
    report["V_ML"] = mat_json(g.V_ML);
    report["K_theta"] = mat_json(g.K_theta);
    report["J_theta"] = mat_json(g.J_theta);
    report["B_SSP"] = mat_json(g.B_SSP);
    report["V_SSP"] = mat_json(g.V_SSP);

    std::ostringstream text;
    text << "trivariate Gaussian D-vine, parameters ordered (rho12, rho23, rho13)\n";
    print_matrix(text, "V_ML", g.V_ML);
    print_matrix(text, "K_theta", g.K_theta);
    print_matrix(text, "J_theta", g.J_theta);
    print_matrix(text, "B_SSP", g.B_SSP);
    print_matrix(text, "V_SSP", g.V_SSP);
    emit(c, report, text.str(), out);
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Pair-copula construction fitting, simulation and efficiency studies", "pcc"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML/INI file with option values, one [section] per command");
    app.set_help_all_flag("--help-all", "Help for every command");

    Common c;
    FitArgs fa;
    SimulateArgs sa;
    EfficiencyArgs ea;
    int boot_replicates = 200;
    std::vector<double> rho;

    auto* fit = app.add_subcommand("fit", "Fit a vine to CSV data with one estimator");
    fit->add_option("--data", fa.data, "CSV file with a header row")->required();
    fit->add_option("--method", fa.method, "ml, ifm, sp or ssp")->capture_default_str();
    fit->add_option("--bootstrap", fa.bootstrap,
                    "Bootstrap replicates for standard errors (default 100; ML uses Fisher unless set; 0 = none)");
    fit->add_flag("--compare", fa.compare, "Also fit every other applicable estimator");
    fit->add_flag("--sandwich", fa.sandwich, "Add plug-in sandwich standard errors (ssp, d <= 3)");
    fit->add_flag("--drop-nonpositive", fa.drop_nonpositive, "Discard rows with any value <= 0");
    add_model_options(fit, c);
    add_run_options(fit, c);
    add_output_options(fit, c);

    auto* boot = app.add_subcommand("bootstrap", "Parametric bootstrap standard errors and 95% intervals");
    boot->add_option("--data", fa.data, "CSV file with a header row")->required();
    boot->add_option("--method", fa.method, "ml, ifm, sp or ssp")->capture_default_str();
    boot->add_option("--replicates,--bootstrap", boot_replicates, "Bootstrap replicates")->capture_default_str();
    boot->add_flag("--drop-nonpositive", fa.drop_nonpositive, "Discard rows with any value <= 0");
    add_model_options(boot, c);
    add_run_options(boot, c);
    add_output_options(boot, c);

    auto* sim = app.add_subcommand("simulate", "Draw from a vine copula, optionally through margins");
    sim->add_option("--params", sa.params, "Parameter values, level-major (t edges take rho then nu)")->required();
    sim->add_option("--n", sa.n, "Number of rows")->required();
    sim->add_option("--out", c.out, "Output CSV (default standard output)");
    add_model_options(sim, c);
    sim->add_option("--seed", c.seed, "Random seed")->capture_default_str();

    auto* eff = app.add_subcommand("efficiency", "Monte Carlo relative efficiencies against ML");
    eff->add_option("--params", ea.params, "True parameter values, level-major")->required();
    eff->add_option("--n", ea.n, "Sample size per replicate")->capture_default_str();
    eff->add_option("--replicates", ea.replicates, "Monte Carlo replicates")->capture_default_str();
    eff->add_option("--methods", ea.methods, "Estimators to compare (must include ml)")->capture_default_str();
    add_model_options(eff, c);
    add_run_options(eff, c);
    add_output_options(eff, c);

    auto* oracle = app.add_subcommand("gaussian-oracle", "Analytic covariances for the trivariate Gaussian vine");
    oracle->add_option("rho", rho, "rho12 rho23 rho13")->expected(3)->required();
    add_output_options(oracle, c);

    try {
        std::vector<std::string> args;
        for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp&) {
        const auto subs = app.get_subcommands();
        out << (subs.empty() ? app.help() : subs.front()->help());
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\nrun with --help for usage\n";
        return kExitUsage;
    }

    try {
        if (*fit) return cmd_fit(c, fa, out);
        if (*boot) return cmd_bootstrap(c, fa, boot_replicates, out);
        if (*sim) return cmd_simulate(c, sa, out);
        if (*eff) return cmd_efficiency(c, ea, out);
        if (*oracle) return cmd_gaussian_oracle(c, rho, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const io::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace pcc
