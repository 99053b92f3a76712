#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hopcycle/io.hpp"

using namespace hopcycle;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << text;
    return path.string();
}

} // namespace

TEST(RunConfig, ParsesAllFields) {
    const auto j = Json::parse(R"({
        "eta": "+++---", "n": 3, "formulation": "tanh", "lambda": 3.4, "c0": 0.5, "q": 7,
        "integrator": {"dt": 0.02, "t_end": 50, "stride": 5, "face_floor": 1e-6},
        "x0": "near-vertex:+-+", "threshold": 0.4, "out": "run.csv"})");
    const auto cfg = parse_run_config(j);
    EXPECT_EQ(*cfg.eta, "+++---");
    EXPECT_EQ(*cfg.n, 3u);
    EXPECT_EQ(cfg.lambda, 3.4);
    EXPECT_EQ(cfg.c0, 0.5);
    EXPECT_EQ(cfg.q, 7);
    EXPECT_EQ(cfg.integrator.dt, 0.02);
    EXPECT_EQ(cfg.integrator.stride, 5u);
    EXPECT_EQ(*cfg.integrator.face_floor, 1e-6);
    EXPECT_EQ(cfg.x0, "near-vertex:+-+");
    EXPECT_EQ(cfg.threshold, 0.4);
    EXPECT_EQ(cfg.regularization_spec().kind, RegularizationKind::arctanh_taylor);
}

TEST(RunConfig, OverridesOnlyPresentFields) {
    RunConfig base;
    base.lambda = 2.0;
    base.eta = "++--";
    const auto cfg = parse_run_config(Json::parse(R"({"n": 3})"), base);
    EXPECT_EQ(cfg.lambda, 2.0);
    EXPECT_EQ(*cfg.eta, "++--");
    EXPECT_EQ(*cfg.n, 3u);
}

TEST(RunConfig, RejectsUnknownAndMistypedFields) {
    EXPECT_THROW(parse_run_config(Json::parse(R"({"lamda": 3})")), ConfigError);
    EXPECT_THROW(parse_run_config(Json::parse(R"({"integrator": {"steps": 3}})")), ConfigError);
    EXPECT_THROW(parse_run_config(Json::parse(R"({"lambda": "big"})")), ConfigError);
    EXPECT_THROW(parse_run_config(Json::parse(R"({"n": 0})")), ConfigError);
    EXPECT_THROW(parse_run_config(Json::parse(R"({"formulation": "relu"})")), ConfigError);
    EXPECT_THROW(parse_run_config(Json::parse(R"({"x0": true})")), ConfigError);
    EXPECT_THROW(parse_run_config(Json::parse("[1, 2]")), ConfigError);
    try {
        parse_run_config(Json::parse(R"({"integrator": {"steps": 3}})"));
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("integrator.steps"), std::string::npos);
    }
}

TEST(RunConfig, RoundTripThroughJson) {
    const auto cfg = parse_run_config(Json::parse(R"({"eta": "++--", "n": 3, "formulation": "logistic",
        "regularization": "logit_taylor", "q": 5, "I": 0.8, "coupling": [["1", "1/2"], [0.5, 1]], "x0": [0.2, 0.3]})"));
    const auto again = parse_run_config(to_json(cfg));
    EXPECT_EQ(to_json(again), to_json(cfg));
    ASSERT_TRUE(again.coupling);
    EXPECT_EQ((*again.coupling)[0][1], 0.5);
    EXPECT_EQ(*again.x0_values, (State{0.2, 0.3}));
    EXPECT_EQ(again.regularization_spec().kind, RegularizationKind::logit_taylor);
}

TEST(RunConfig, FileSyntaxErrorReportsPosition) {
    const auto path = write_temp("hopcycle_bad.json", "{\n  \"eta\": \"+-\",\n  \"n\": ,\n}\n");
    try {
        load_run_config(path);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find(path + ":3:"), std::string::npos) << e.what();
    }
    EXPECT_THROW(load_run_config("/nonexistent/cfg.json"), ConfigError);
    std::remove(path.c_str());
}

TEST(ResolveSystem, LearnsCouplingOrUsesExplicitOne) {
    RunConfig cfg;
    cfg.eta = "+++---";
    cfg.n = 3;
    const auto sys = resolve_system(cfg);
    ASSERT_TRUE(sys.coupling);
    EXPECT_EQ(sys.spec.J, (std::vector<std::vector<double>>{{0, 1, 0}, {0, 0, 1}, {-1, 0, 0}}));

    RunConfig explicit_cfg;
    explicit_cfg.formulation = Formulation::logistic_cube;
    explicit_cfg.coupling = std::vector<std::vector<double>>{{1, 2}, {2, 1}};
    const auto sys2 = resolve_system(explicit_cfg);
    EXPECT_FALSE(sys2.coupling);
    EXPECT_EQ(sys2.spec.params.regularization.kind, RegularizationKind::logit_epsilon);

    EXPECT_THROW(resolve_system(RunConfig{}), ConfigError);
    cfg.regularization = RegularizationKind::logit_taylor;
    EXPECT_THROW(resolve_system(cfg), ConfigError);
}

TEST(ResolveX0, Policies) {
    RunConfig cfg;
    cfg.eta = "+++---";
    cfg.n = 3;
    const auto sys = resolve_system(cfg);
    EXPECT_EQ(resolve_x0(cfg, sys), (State{0.99, 0.99, 0.99}));
    cfg.x0 = "near-vertex:-+-";
    EXPECT_EQ(resolve_x0(cfg, sys), (State{-0.99, 0.99, -0.99}));
    cfg.x0 = "random:42";
    const auto a = resolve_x0(cfg, sys), b = resolve_x0(cfg, sys);
    EXPECT_EQ(a, b);
    for (double v : a) EXPECT_TRUE(v > -1 && v < 1);
    cfg.x0 = "random:43";
    EXPECT_NE(resolve_x0(cfg, sys), a);
    cfg.x0 = "near-vertex:+-";
    EXPECT_THROW(resolve_x0(cfg, sys), ConfigError);
    cfg.x0 = "origin";
    EXPECT_THROW(resolve_x0(cfg, sys), ConfigError);
    cfg.x0_values = State{0.1};
    EXPECT_THROW(resolve_x0(cfg, sys), ConfigError);
}

TEST(JsonReports, RationalsAsStringsAndOneBasedIndices) {
    EXPECT_EQ(to_json(Rational(-3) / 4), "-3/4");
    const auto J = solve_learning(build_consecutive_sigma(parse_generator("++--"), 3));
    const auto j = to_json(J);
    EXPECT_EQ(j["J"][2], (Json{"-1", "-1", "-1"}));

    ModelParams p;
    const auto rep = to_json(predict_cycle(parse_generator("+++---"), 3, p));
    EXPECT_EQ(rep["cycle_type"], "edge");
    EXPECT_EQ(rep["companion_row"], (Json{"-1", "0", "0"}));
    // first vertex +++ : only the last coordinate is pushed off its face
    EXPECT_EQ(rep["vertices"][0]["vertex"], "+++");
    EXPECT_EQ(rep["vertices"][0]["unstable_directions"], (Json{3}));
    EXPECT_EQ(rep["connections"][0]["flipped"], (Json{3}));
    EXPECT_TRUE(rep["stability"]["product_criterion"].get<bool>());
}

TEST(JsonReports, CycloDiagnostics) {
    const auto d = cyclo_diagnostics(parse_generator("+++---"));
    EXPECT_EQ(d["minimal_annihilator_text"], "x^3 + 1");
    EXPECT_EQ(d["degree"], 3);
}
