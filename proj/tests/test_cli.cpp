#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

struct Run {
    int code = -1;
    std::string out, err;
};

Run run(const std::string& args) {
    const auto err_path = std::filesystem::temp_directory_path() / ("hopcycle_cli_err_" + std::to_string(::getpid()));
    const std::string cmd = std::string(HOPCYCLE_CLI) + " " + args + " 2>" + err_path.string();
    Run r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    for (std::size_t got; (got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0;) r.out.append(buf.data(), got);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(err_path);
    std::stringstream ss;
    ss << in.rdbuf();
    r.err = ss.str();
    std::filesystem::remove(err_path);
    return r;
}

nlohmann::json error_json(const Run& r) { return nlohmann::json::parse(r.err); }

} // namespace

TEST(Cli, LearnPrintsCoupling) {
    const auto r = run("learn --eta +++--- --n 3");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["coupling"]["J"][2], (nlohmann::json{"-1", "0", "0"}));
    EXPECT_EQ(j["rank_sigma"], 3);
}

TEST(Cli, NotAdmissibleExitsThree) {
    const auto r = run("learn --eta ++-+ --n 2");
    EXPECT_EQ(r.code, 3);
    const auto e = error_json(r);
    EXPECT_EQ(e["error"], "not_admissible");
    EXPECT_EQ(e["exit_code"], 3);
    EXPECT_TRUE(r.out.empty());
}

TEST(Cli, ClassifyReportsNonAdmissibleAsVerdict) {
    const auto r = run("classify --eta ++-+ --n 2");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["admissible"], false);
    EXPECT_EQ(j["cycle_type"], "none");
}

TEST(Cli, UsageAndConfigErrorsExitTwo) {
    EXPECT_EQ(run("learn --bogus").code, 2);
    EXPECT_EQ(run("learn --eta +0 --n 1").code, 2);
    EXPECT_EQ(run("learn --eta ++-- --n 9").code, 2);
    EXPECT_EQ(run("simulate --formulation relu --eta ++-- --n 3").code, 2);
    EXPECT_EQ(run("").code, 2);

    const auto cfg = std::filesystem::temp_directory_path() / "hopcycle_cli_cfg.json";
    std::ofstream(cfg) << R"({"eta": "+++---", "lamda": 3})";
    const auto r = run("classify --config " + cfg.string());
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(error_json(r)["error"], "config");
    std::filesystem::remove(cfg);
}

TEST(Cli, IntegrationFailureExitsFour) {
    const auto r = run("simulate --formulation logistic --regularization logit_taylor --eta ++- --n 3 --lambda 1e308 --t-end 1");
    EXPECT_EQ(r.code, 4);
    EXPECT_EQ(error_json(r)["error"], "integration_failure");
}

TEST(Cli, ConfigFileOverridesFlags) {
    const auto cfg = std::filesystem::temp_directory_path() / "hopcycle_cli_cfg2.json";
    std::ofstream(cfg) << R"({"eta": "++--", "n": 3})";
    const auto r = run("learn --eta +++--- --n 3 --config " + cfg.string());
    std::filesystem::remove(cfg);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(nlohmann::json::parse(r.out)["coupling"]["J"][2], (nlohmann::json{"-1", "-1", "-1"}));
}

TEST(Cli, SimulateWritesCsv) {
    const auto r = run("simulate --eta +++--- --n 3 --t-end 1 --stride 10");
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream is(r.out);
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "t,x1,x2,x3");
    std::size_t rows = 0;
    while (std::getline(is, line)) ++rows;
    EXPECT_EQ(rows, 11u);
}

TEST(Cli, VerifyAndEnumerate) {
    auto r = run("verify --eta ++-- --n 3 --lambda 3.4 --t-end 400");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(nlohmann::json::parse(r.out)["agreement"], true);
    r = run("enumerate --p 4 --lambda 3.4");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_FALSE(r.out.empty());
}

TEST(Cli, SweepCsv) {
    const auto r = run("sweep --param lambda --grid 1,8 --eta +++--- --n 3 --t-end 100");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "lambda,regime,dwell_ratio,period_estimate");
    EXPECT_EQ(run("sweep --param lambda --grid 1,x --eta +++--- --n 3").code, 2);
}

TEST(Cli, GoldenSingleCase) {
    const auto r = run("golden --case fig5-none-n3p3");
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_NE(r.out.find("PASS"), std::string::npos);
}
