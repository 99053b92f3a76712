#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hopcycle/stability.hpp"
#include "oracles.hpp"

using namespace hopcycle;

namespace {

ModelParams tanh_params(double lambda, double c0 = 0.6, int q = 9) {
    ModelParams p;
    p.lambda = lambda;
    p.c0 = c0;
    p.regularization = RegularizationSpec::arctanh_taylor(q);
    return p;
}

std::vector<std::vector<double>> companion_doubles(const std::vector<double>& a) {
    const std::size_t n = a.size();
    std::vector<std::vector<double>> J(n, std::vector<double>(n, 0.0));
    for (std::size_t k = 0; k + 1 < n; ++k) J[k][k + 1] = 1.0;
    J[n - 1] = a;
    return J;
}

} // namespace

TEST(VertexEigenvalues, MatchFiniteDifferenceJacobian) {
    std::mt19937 rng(101);
    std::uniform_real_distribution<double> lam(0.5, 12.0), c0d(0.0, 0.95);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 1 + rng() % 8;
        std::vector<double> a(n);
        for (auto& v : a) v = static_cast<int>(rng() % 5) - 2;
        std::vector<int> signs(n);
        for (auto& s : signs) s = rng() % 2 ? 1 : -1;
        const int q = 1 + 2 * static_cast<int>(rng() % 6);
        const auto params = tanh_params(lam(rng), c0d(rng), q);
        const auto J = companion_doubles(a);
        const oracle::Vec x(signs.begin(), signs.end());
        const auto jac = oracle::jacobian(
            [&](const oracle::Vec& v) { return oracle::tanh_field(v, J, params.lambda, params.c0, q); }, x);
        const auto sigma = vertex_eigenvalues(BinaryPattern(signs), a, params);
        for (std::size_t k = 0; k < n; ++k) {
            ASSERT_NEAR(sigma[k], jac[k][k], 1e-5 * (1 + std::abs(sigma[k])));
            for (std::size_t m = 0; m < n; ++m) {
                if (m == k) continue;
                ASSERT_NEAR(jac[k][m], 0.0, 1e-6);
            }
        }
    }
}

TEST(CondSignes, WindowMatchesPredicate) {
    const double f1 = f_arctanh_taylor(1.0, 9);
    const auto [lo, hi] = cond_signes_window(0.6, 9);
    EXPECT_DOUBLE_EQ(lo, f1);
    EXPECT_NEAR(hi, f1 / 0.2, 1e-12);
    for (double lambda = 0.5; lambda < 20; lambda += 0.37)
        EXPECT_EQ(cond_signes(tanh_params(lambda)), lambda > lo && lambda < hi) << lambda;
    EXPECT_TRUE(std::isinf(cond_signes_window(0.4, 9).second));
}

TEST(CondSignes, SwitchCountMatchesUnstableCount) {
    std::mt19937 rng(103);
    std::uniform_real_distribution<double> c0d(0.0, 0.95);
    int checked = 0;
    while (checked < 500) {
        const double c0 = c0d(rng);
        const auto [lo, hi] = cond_signes_window(c0, 9);
        const double top = std::isinf(hi) ? lo * 5 : hi;
        const double lambda = lo + (top - lo) * std::uniform_real_distribution<double>(0.01, 0.99)(rng);
        const auto params = tanh_params(lambda, c0);
        ASSERT_TRUE(cond_signes(params));
        const std::size_t n = 2 + rng() % 7;
        std::vector<double> a(n);
        for (auto& v : a) v = static_cast<int>(rng() % 3) - 1;
        std::vector<int> signs(n);
        for (auto& s : signs) s = rng() % 2 ? 1 : -1;
        const auto va = analyze_vertex(BinaryPattern(signs), a, params);
        // interior coordinates: unstable exactly at sign changes
        for (std::size_t k = 0; k + 1 < n; ++k)
            ASSERT_EQ(va.eigenvalues[k] > 0, signs[k] != signs[k + 1]);
        ASSERT_TRUE(va.switch_count_consistent());
        ASSERT_NO_THROW(unstable_directions(BinaryPattern(signs), a, params));
        ++checked;
    }
}

TEST(EdgeConditions, EquivalentToCondSignesForEdgeRow) {
    std::mt19937 rng(107);
    std::uniform_real_distribution<double> lam(0.1, 30.0), c0d(0.0, 0.999);
    for (int trial = 0; trial < 1000; ++trial) {
        const int q = 1 + 2 * static_cast<int>(rng() % 8);
        const auto params = tanh_params(lam(rng), c0d(rng), q);
        const std::size_t n = 2 + rng() % 10;
        std::vector<double> a(n, 0.0);
        a[0] = -1;
        ASSERT_EQ(edge_cycle_conditions(a, params).both(), cond_signes(params));
    }
}

TEST(EdgeConditions, GeneralRowFormula) {
    const auto params = tanh_params(3.4);
    const double f1 = f_at_one(params);
    const std::vector<double> a{1, -1, 0, 1};
    const auto ec = edge_cycle_conditions(a, params);
    EXPECT_EQ(ec.lower, 3.4 * (0.6 + 0.4 * 1) < f1);
    EXPECT_EQ(ec.upper, f1 < 3.4 * (0.6 + 0.4 * (-1 + 1 - 0 + 1)));
    EXPECT_TRUE(is_edge_companion_row(RationalVector{-1, 0, 0}));
    EXPECT_FALSE(is_edge_companion_row(RationalVector{-1, 0, 1}));
    EXPECT_FALSE(is_edge_companion_row(RationalVector{1, 0, 0}));
}

TEST(CompanionImage, SignOfLastEntry) {
    const BinaryPattern xi(std::vector<int>{1, -1, -1});
    EXPECT_EQ(companion_image(xi, {-1, 0, 0}), BinaryPattern(std::vector<int>{-1, -1, -1}));
    EXPECT_EQ(companion_image(xi, {0, 1, -1}), BinaryPattern(std::vector<int>{-1, -1, 1})); // zero reads as +
    EXPECT_THROW(companion_image_last(xi, {1, 1}), InvalidDimension);
}

TEST(EdgeStability, SixVertexCycleProducts) {
    const auto params = tanh_params(8.0);
    const auto rep = predict_cycle(parse_generator("+++---"), 3, params);
    ASSERT_EQ(rep.cycle_type, CycleType::edge);
    ASSERT_TRUE(rep.stability);
    // recompute the products from the eigenvalue formula
    const double f1 = f_arctanh_taylor(1.0, 9);
    const double same = 2 * (f1 - 8.0), flip = 2 * (f1 - 8.0 * 0.2);
    // every vertex of the cycle has one switch: one expanding rate 'flip' and
    // an incoming contracting rate 'same'
    EXPECT_NEAR(rep.stability->contracting_product, std::pow(-same, 6), 1e-6 * std::pow(-same, 6));
    EXPECT_NEAR(rep.stability->expanding_product, std::pow(flip, 6), 1e-9 * std::pow(flip, 6));
    EXPECT_TRUE(rep.stability->product_criterion);
    EXPECT_EQ(rep.stability->verdict, StabilityVerdict::stable);
    EXPECT_NEAR(rep.stability->corollary_bound, 0.6 / f1, 1e-15);
    EXPECT_FALSE(rep.stability->corollary_inequality);
}

TEST(EdgeStability, RejectsNonEdgeInput) {
    const auto params = tanh_params(3.4);
    const std::vector<double> a{-1, -1, -1};
    std::vector<VertexAnalysis> cyc;
    for (auto s : {"+--", "--+", "-++", "++-"}) cyc.push_back(analyze_vertex(BinaryPattern(parse_sign_string(s)), a, params));
    cyc[1] = analyze_vertex(BinaryPattern(parse_sign_string("+++")), a, params);
    EXPECT_THROW(edge_cycle_stability(params, cyc), PreconditionError);
    EXPECT_THROW(edge_cycle_stability(params, {cyc[0]}), PreconditionError);
}

TEST(Prediction, KnownCycles) {
    struct Case {
        const char* eta;
        std::size_t n;
        double lambda;
        CycleType type;
    };
    const Case cases[] = {
        {"+++---", 3, 8.0, CycleType::edge},
        {"++--", 3, 8.0, CycleType::non_edge},
        {"-++", 3, 2.0, CycleType::none},
        {"++---+", 4, 3.4, CycleType::non_edge},
        {"+++----+", 4, 3.4, CycleType::edge},
        {"++-+", 2, 3.4, CycleType::none},  // not admissible
        {"+++---", 3, 1.0, CycleType::none}, // below the gain window
        {"+-", 1, 3.4, CycleType::none},     // single neuron
    };
    for (const auto& c : cases) {
        const auto rep = predict_cycle(parse_generator(c.eta), c.n, tanh_params(c.lambda));
        EXPECT_EQ(rep.cycle_type, c.type) << c.eta << " n=" << c.n;
        if (rep.admissible && !rep.degenerate) {
            EXPECT_EQ(rep.vertices.size(), rep.connections.size());
        }
    }
}

TEST(Prediction, ReportFields) {
    const auto rep = predict_cycle(parse_generator("++--"), 3, tanh_params(8.0));
    EXPECT_EQ(rep.rank_sigma, 2u);
    EXPECT_EQ(rep.dim_w, 2u);
    EXPECT_TRUE(rep.admissible);
    ASSERT_TRUE(rep.companion_rule);
    EXPECT_EQ(*rep.companion_rule, CompanionRule::all_minus_one);
    EXPECT_EQ(rep.vertices.size(), 4u);
    EXPECT_TRUE(rep.eigenvalue_signs_consistent());
    // ++- -> +-- -> --+ -> -++ -> ++-
    ASSERT_EQ(rep.connections.size(), 4u);
    EXPECT_EQ(rep.connections[0].kind, ConnectionKind::edge);
    EXPECT_EQ(rep.connections[1].kind, ConnectionKind::face);
    EXPECT_EQ(rep.connections[1].flipped, (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(rep.connections[2].kind, ConnectionKind::edge);
    EXPECT_EQ(rep.connections[3].kind, ConnectionKind::face);
    EXPECT_EQ(classify_connection({1, 2}), ConnectionKind::blocked);
    EXPECT_EQ(classify_connection({}), ConnectionKind::stay);

    const auto bad = predict_cycle(parse_generator("++-+"), 2, tanh_params(3.4));
    EXPECT_FALSE(bad.admissible);
    EXPECT_FALSE(bad.companion_row);
    EXPECT_FALSE(bad.notes.empty());
}

TEST(Prediction, EigenvalueSignsMatchSwitchesUnderGainWindow) {
    std::mt19937 rng(109);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t p = 2 + rng() % 10;
        std::vector<int> e(p);
        for (auto& v : e) v = rng() % 2 ? 1 : -1;
        const GeneratorVector eta(e);
        const std::size_t n = 1 + rng() % p;
        const auto rep = predict_cycle(eta, n, tanh_params(3.4));
        if (rep.admissible) {
            ASSERT_TRUE(rep.eigenvalue_signs_consistent()) << to_sign_string(eta) << " n=" << n;
        }
    }
}

TEST(Prediction, RequiresTanhRegularization) {
    ModelParams p;
    p.regularization = RegularizationSpec::logit_taylor(9);
    EXPECT_THROW(predict_cycle(parse_generator("+++---"), 3, p), InvalidArgument);
}
