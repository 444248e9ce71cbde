#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "pcc/cli.hpp"
#include "pcc/copula.hpp"
#include "pcc/estimation.hpp"
#include "pcc/io.hpp"

using namespace pcc;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Outcome {
    int code;
    std::string out, err;
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "pcc");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("pcc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string write(const std::string& name, const std::string& text) const {
        std::ofstream(path(name)) << text;
        return path(name);
    }

    static std::string slurp(const std::string& p) {
        std::ifstream f(p);
        return {std::istreambuf_iterator<char>(f), {}};
    }

    // Simulates through the command line and returns the CSV file path.
    std::string simulate_file(const std::string& name, const std::vector<std::string>& model) const {
        std::vector<std::string> args{"simulate", "--out", path(name)};
        args.insert(args.end(), model.begin(), model.end());
        const Outcome r = run(args);
        EXPECT_EQ(r.code, kExitOk) << r.err;
        return path(name);
    }

    fs::path dir_;
};

double rounded(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return std::strtod(buf, nullptr);
}

}  // namespace

TEST(CsvTest, ParsesWellFormedInput) {
    std::istringstream in("\xEF\xBB\xBF" "a,b\n1.5,+2\n\n-3e-2, 4\r\n");
    const io::Table t = io::read_csv(in);
    EXPECT_EQ(t.columns, (std::vector<std::string>{"a", "b"}));
    ASSERT_EQ(t.values.rows(), 2);
    EXPECT_EQ(t.values(0, 1), 2.0);
    EXPECT_EQ(t.values(1, 0), -0.03);
    EXPECT_EQ(t.values(1, 1), 4.0);
}

TEST(CsvTest, ErrorsNameTheLine) {
    auto message = [](const std::string& text) {
        std::istringstream in(text);
        try {
            io::read_csv(in);
        } catch (const io::ParseError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(message("x,y\n1,2\n3,abc\n").find("line 3"), std::string::npos);
    EXPECT_NE(message("x,y\n1,nan\n").find("line 2"), std::string::npos);
    EXPECT_NE(message("x,y\n1,inf\n").find("line 2"), std::string::npos);
    EXPECT_NE(message("x,y\n1,2\n1,2,3\n").find("line 3"), std::string::npos);
    EXPECT_NE(message("x,y\n1,\n").find("line 2"), std::string::npos);
    EXPECT_NE(message(""), "no error");  // not even a header
}

TEST(CsvTest, RoundTripIsExact) {
    io::Table t;
    t.columns = {"p", "q", "r"};
    t.values = Eigen::MatrixXd::Random(20, 3) * 1e3;
    t.values(0, 0) = 1.0 / 3.0;
    t.values(1, 1) = 5e-310;
    std::stringstream s;
    io::write_csv(s, t);
    const io::Table back = io::read_csv(s);
    EXPECT_EQ(back.columns, t.columns);
    EXPECT_EQ(back.values, t.values);
}

TEST(CsvTest, DropNonpositiveRows) {
    io::Table t;
    t.columns = {"a", "b"};
    t.values.resize(4, 2);
    t.values << 1, 2, 0, 3, 4, 5, 6, -1;
    const io::Table kept = io::drop_nonpositive_rows(t);
    ASSERT_EQ(kept.values.rows(), 2);
    EXPECT_EQ(kept.values(1, 0), 4.0);
}

TEST_F(CliTest, UsageErrorsExitWithTwo) {
    const std::string csv = simulate_file("d.csv", {"--families", "gumbel,gumbel,gumbel", "--params", "1.5,1.5,1.2",
                                                    "--n", "50"});
    EXPECT_EQ(run({}).code, kExitUsage);
    EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
    EXPECT_EQ(run({"fit", "--data", csv, "--families", "gumbel,gumbel", "--bootstrap", "0"}).code, kExitUsage);
    const Outcome bad_method = run({"fit", "--data", csv, "--families", "gumbel,gumbel,gumbel", "--method", "mle"});
    EXPECT_EQ(bad_method.code, kExitUsage);
    EXPECT_NE(bad_method.err.find("mle"), std::string::npos);
    EXPECT_EQ(run({"fit", "--data", csv, "--families", "gumbel,gumbel,gumbel", "--method", "ml"}).code, kExitUsage);
    EXPECT_EQ(run({"fit", "--data", csv, "--families", "gumbel,gumbel,gumbel", "--vine", "rvine"}).code, kExitUsage);
    EXPECT_EQ(run({"simulate", "--families", "gumbel", "--params", "0.5", "--n", "5"}).code, kExitUsage);
    EXPECT_EQ(run({"simulate", "--families", "gumbel,gumbel", "--params", "2", "--n", "5"}).code, kExitUsage);
    EXPECT_EQ(run({"gaussian-oracle", "0.9", "0.9", "-0.9"}).code, kExitUsage);
    EXPECT_EQ(run({"gaussian-oracle", "0.1", "0.2"}).code, kExitUsage);
}

TEST_F(CliTest, RuntimeErrorsExitWithOne) {
    const Outcome missing = run({"fit", "--data", path("nope.csv"), "--families", "gumbel", "--bootstrap", "0"});
    EXPECT_EQ(missing.code, kExitFailure);
    const std::string broken = write("broken.csv", "a,b\n0.1,0.2\n0.3,x\n");
    const Outcome r = run({"fit", "--data", broken, "--families", "gumbel", "--bootstrap", "0"});
    EXPECT_EQ(r.code, kExitFailure);
    EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
    // Exponential margins cannot take negative data.
    std::string rows = "a,b\n-1,2\n";
    for (int i = 0; i < 20; ++i) rows += "3,4\n";
    const std::string neg = write("neg.csv", rows);
    EXPECT_EQ(run({"fit", "--data", neg, "--families", "gumbel", "--margins", "exponential,exponential",
                   "--method", "ifm", "--bootstrap", "0"})
                  .code,
              kExitFailure);
}

TEST_F(CliTest, HelpExitsCleanly) {
    const Outcome r = run({"fit", "--help"});
    EXPECT_EQ(r.code, kExitOk);
    EXPECT_NE(r.out.find("--drop-nonpositive"), std::string::npos);
    EXPECT_EQ(run({"--help"}).code, kExitOk);
}

TEST_F(CliTest, SimulateIsDeterministic) {
    const std::vector<std::string> args{"simulate", "--families", "gaussian,gumbel,t", "--params", "0.5,1.4,0.2,6",
                                        "--n", "2000", "--seed", "7"};
    const Outcome a = run(args), b = run(args);
    ASSERT_EQ(a.code, kExitOk) << a.err;
    EXPECT_EQ(a.out, b.out);
    auto other = args;
    other.back() = "8";
    EXPECT_NE(run(other).out, a.out);

    std::istringstream in(a.out);
    const io::Table t = io::read_csv(in);
    EXPECT_EQ(t.columns, (std::vector<std::string>{"u1", "u2", "u3"}));
    ASSERT_EQ(t.values.rows(), 2000);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(t.values.col(j).mean(), 0.5, 0.03);
}

TEST_F(CliTest, SimulatedTauMatchesClosedForm) {
    const Outcome a = run({"simulate", "--families", "gaussian", "--params", "0.6", "--n", "10000", "--seed", "3"});
    std::istringstream in(a.out);
    const io::Table t = io::read_csv(in);
    const Eigen::VectorXd x = t.values.col(0), y = t.values.col(1);
    EXPECT_NEAR(sample_kendall_tau({x.data(), 10000}, {y.data(), 10000}), 2.0 / std::numbers::pi * std::asin(0.6),
                0.03);
    // Margins with parameters switch to the data scale.
    const Outcome m = run({"simulate", "--families", "gumbel", "--params", "2", "--n", "10", "--margins",
                       "exponential:1,normal:2"});
    ASSERT_EQ(m.code, kExitOk) << m.err;
    EXPECT_EQ(m.out.substr(0, 6), "x1,x2\n");
}

TEST_F(CliTest, FitMatchesLibrary) {
    const std::string csv = simulate_file("g.csv", {"--families", "gumbel,gumbel,gumbel", "--params", "1.6,1.4,1.2",
                                                    "--n", "800", "--seed", "11"});
    const Outcome r = run({"fit", "--data", csv, "--families", "gumbel,gumbel,gumbel", "--bootstrap", "0", "--json"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j["command"], "fit");
    EXPECT_EQ(j["model"]["d"], 3);
    EXPECT_EQ(j["model"]["n"], 800);
    EXPECT_EQ(j["fit"]["method"], "ssp");

    const io::Table t = io::read_csv_file(csv);
    const FitResult lib = fit_ssp(pseudo_observations(t.values), Skeleton(VineKind::DVine, 3,
                                                                          std::vector<Family>(3, Family::Gumbel)));
    const auto& params = j["fit"]["parameters"];
    ASSERT_EQ(params.size(), 3u);
    EXPECT_EQ(params[0]["label"], "delta_12");
    EXPECT_EQ(params[2]["label"], "delta_13|2");
    for (int i = 0; i < 3; ++i) EXPECT_EQ(params[i]["estimate"].get<double>(), rounded(lib.theta_hat[i]));
    EXPECT_EQ(j["fit"]["loglik"].get<double>(), rounded(lib.loglik));
}

TEST_F(CliTest, FitRoundTripWithinThreeStandardErrors) {
    const std::string csv = simulate_file(
        "r.csv", {"--families", "gumbel,gaussian,gumbel", "--params", "1.8,0.5,1.3", "--n", "1500", "--seed", "12",
                  "--margins", "exponential:1,exponential:2,exponential:0.5"});
    const std::vector<std::string> common{"--data",    csv,
                                          "--families", "gumbel,gaussian,gumbel",
                                          "--margins", "exponential,exponential,exponential",
                                          "--json"};
    const double truth[] = {1.8, 0.5, 1.3};
    for (const std::string method : {"ssp", "ml"}) {
        std::vector<std::string> args{"fit", "--method", method, "--bootstrap", method == "ml" ? "-1" : "60"};
        args.insert(args.end(), common.begin(), common.end());
        const Outcome r = run(args);
        ASSERT_EQ(r.code, kExitOk) << r.err;
        const json j = json::parse(r.out);
        const auto& params = j["fit"]["parameters"];
        const std::size_t offset = params.size() - 3;  // ML lists the margins first
        for (std::size_t i = 0; i < 3; ++i) {
            const auto& p = params[offset + i];
            EXPECT_LT(std::abs(p["estimate"].get<double>() - truth[i]), 3.0 * p["se"].get<double>())
                << method << " " << p["label"];
        }
        EXPECT_EQ(j["fit"]["uncertainty"]["kind"], method == "ml" ? "fisher" : "bootstrap");
    }
}

TEST_F(CliTest, ReportsAreByteIdenticalOnRerun) {
    const std::string csv = simulate_file("b.csv", {"--families", "gumbel,gumbel,gumbel", "--params", "1.5,1.5,1.2",
                                                    "--n", "300", "--seed", "13"});
    const std::vector<std::string> args{"fit", "--data", csv, "--families", "gumbel,gumbel,gumbel", "--bootstrap",
                                        "20", "--seed", "5", "--out", path("rep.json")};
    ASSERT_EQ(run(args).code, kExitOk);
    const std::string first = slurp(path("rep.json"));
    auto threaded = args;
    threaded.insert(threaded.end(), {"--threads", "3"});
    ASSERT_EQ(run(threaded).code, kExitOk);
    EXPECT_EQ(slurp(path("rep.json")), first);
    EXPECT_TRUE(json::parse(first)["fit"]["parameters"][0].contains("se"));
}

TEST_F(CliTest, CompareInTwoDimensions) {
    const std::string csv =
        simulate_file("c.csv", {"--families", "t", "--params", "0.4,7", "--n", "400", "--seed", "14"});
    const Outcome r = run({"fit", "--data", csv, "--families", "t", "--bootstrap", "0", "--compare", "--json"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const json j = json::parse(r.out);
    ASSERT_EQ(j["compare"].size(), 2u);
    EXPECT_EQ(j["compare"][0]["method"], "ssp");
    EXPECT_EQ(j["compare"][1]["method"], "sp");
    EXPECT_EQ(j["compare"][0]["parameters"], j["compare"][1]["parameters"]);
}

TEST_F(CliTest, DropNonpositive) {
    const std::string csv = simulate_file("p.csv", {"--families", "gumbel", "--params", "1.5", "--n", "200",
                                                    "--margins", "normal:1,exponential:1"});
    const Outcome r = run({"fit", "--data", csv, "--families", "gumbel", "--bootstrap", "0", "--drop-nonpositive",
                       "--json"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const json j = json::parse(r.out);
    EXPECT_GT(j["model"]["dropped_rows"].get<int>(), 50);
    EXPECT_EQ(j["model"]["n"].get<int>() + j["model"]["dropped_rows"].get<int>(), 200);
}

TEST_F(CliTest, SandwichAndBootstrapCommands) {
    const std::string csv = simulate_file("s.csv", {"--families", "gaussian,gaussian,gaussian", "--params",
                                                    "0.5,0.4,0.2", "--n", "500", "--seed", "15"});
    const Outcome s = run({"fit", "--data", csv, "--families", "gaussian,gaussian,gaussian", "--bootstrap", "0",
                       "--sandwich", "--json"});
    ASSERT_EQ(s.code, kExitOk) << s.err;
    EXPECT_EQ(json::parse(s.out)["fit"]["sandwich"]["V"].size(), 3u);
    const Outcome b = run({"bootstrap", "--data", csv, "--families", "gaussian,gaussian,gaussian", "--replicates", "10",
                       "--json"});
    ASSERT_EQ(b.code, kExitOk) << b.err;
    const json jb = json::parse(b.out);
    EXPECT_EQ(jb["fit"]["uncertainty"]["replicates"], 10);
    const Outcome text = run({"bootstrap", "--data", csv, "--families", "gaussian,gaussian,gaussian", "--replicates",
                          "10"});
    EXPECT_NE(text.out.find("rho_13|2"), std::string::npos) << text.out;
}

TEST_F(CliTest, EfficiencyTable) {
    const Outcome r = run({"efficiency", "--families", "gumbel", "--params", "1.5", "--margins", "exponential:1,exponential:1",
                       "--n", "200", "--replicates", "6", "--json"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j["replicates_used"], 6);
    EXPECT_EQ(j["level_efficiency"]["sp"], j["level_efficiency"]["ssp"]);
    EXPECT_EQ(j["level_efficiency"]["ml"][0], 1.0);
    const Outcome text = run({"efficiency", "--families", "gumbel", "--params", "1.5", "--margins",
                          "exponential:1,exponential:1", "--n", "200", "--replicates", "6"});
    EXPECT_NE(text.out.find("SSP T1"), std::string::npos) << text.out;
    EXPECT_EQ(run({"efficiency", "--families", "gumbel", "--params", "1.5", "--margins",
                   "exponential:1,exponential:1", "--methods", "sp,ssp"})
                  .code,
              kExitUsage);
}

TEST_F(CliTest, GaussianOracle) {
    const Outcome r = run({"gaussian-oracle", "0.5", "0.5", "0.3", "--json"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j["V_ML"][0][0].get<double>(), 0.5625);
    EXPECT_EQ(j["V_SSP"], j["V_ML"]);
    const json z = json::parse(run({"gaussian-oracle", "0", "0", "0", "--json"}).out);
    EXPECT_EQ(z["V_ML"], json::parse("[[1,0,0],[0,1,0],[0,0,1]]"));
    EXPECT_NE(run({"gaussian-oracle", "0.5", "0.5", "0.3"}).out.find("V_SSP"), std::string::npos);
}

TEST_F(CliTest, ConfigFile) {
    const std::string cfg = write("run.toml",
                                  "[simulate]\n"
                                  "families = \"gumbel,gumbel,gumbel\"\n"
                                  "params = \"1.5,1.5,1.2\"\n"
                                  "n = 25\n"
                                  "seed = 4\n");
    const Outcome a = run({"--config", cfg, "simulate"});
    ASSERT_EQ(a.code, kExitOk) << a.err;
    const Outcome b = run({"simulate", "--families", "gumbel,gumbel,gumbel", "--params", "1.5,1.5,1.2", "--n", "25",
                       "--seed", "4"});
    EXPECT_EQ(a.out, b.out);
    // Command-line values win over the file.
    const Outcome c = run({"--config", cfg, "simulate", "--n", "3"});
    EXPECT_EQ(std::count(c.out.begin(), c.out.end(), '\n'), 4);
}
