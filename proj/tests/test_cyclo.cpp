#include <gtest/gtest.h>

#include <random>

#include "hopcycle/cyclo.hpp"
#include "oracles.hpp"

using namespace hopcycle;

namespace {

using oracle::euler_phi;
using oracle::geometric;

GeneratorVector random_generator(std::mt19937& rng, std::size_t p) {
    std::vector<int> e(p);
    for (auto& v : e) v = rng() % 2 ? 1 : -1;
    return GeneratorVector(e);
}

} // namespace

TEST(Poly, ArithmeticAndDivision) {
    const RationalPoly a{-1, 0, 0, 1}; // x^3 - 1
    const RationalPoly b{-1, 1};       // x - 1
    const auto [q, r] = poly_divmod(a, b);
    EXPECT_EQ(q, (RationalPoly{1, 1, 1}));
    EXPECT_TRUE(r.is_zero());
    EXPECT_EQ(poly_gcd(RationalPoly{-1, 0, 1}, RationalPoly{1, 2, 1}), (RationalPoly{1, 1}));
    EXPECT_EQ(to_string(RationalPoly{1, -1, 0, 2}), "2x^3 - x + 1");
    EXPECT_THROW(poly_divmod(a, RationalPoly{}), InvalidArgument);
}

TEST(Cyclotomic, KnownCoefficientLists) {
    EXPECT_EQ(cyclotomic_polynomial(1), (RationalPoly{-1, 1}));
    EXPECT_EQ(cyclotomic_polynomial(2), (RationalPoly{1, 1}));
    EXPECT_EQ(cyclotomic_polynomial(4), (RationalPoly{1, 0, 1}));
    EXPECT_EQ(cyclotomic_polynomial(6), (RationalPoly{1, -1, 1}));
    EXPECT_EQ(cyclotomic_polynomial(12), (RationalPoly{1, 0, -1, 0, 1}));
    EXPECT_EQ(cyclotomic_polynomial(15), (RationalPoly{1, -1, 0, 1, -1, 1, 0, -1, 1}));
    // first cyclotomic polynomial with a coefficient other than 0, +1, -1
    EXPECT_EQ(cyclotomic_polynomial(105).coeff(7), Rational(-2));
}

TEST(Cyclotomic, PrimePowersAreGeometricSums) {
    for (std::size_t q : {2u, 3u, 5u, 7u})
        for (std::size_t j = 0, qj = 1; qj * q <= 60; ++j, qj *= q)
            EXPECT_EQ(cyclotomic_polynomial(qj * q), geometric(q, qj)) << q << "^" << j + 1;
}

TEST(Cyclotomic, ProductOfTwoPrimes) {
    for (std::size_t a : {2u, 3u, 5u, 7u})
        for (std::size_t b : {3u, 5u, 7u, 11u}) {
            if (a >= b || a * b > 60) continue;
            const auto [phi, rem] = poly_divmod(geometric(a * b, 1), geometric(a, 1) * geometric(b, 1));
            ASSERT_TRUE(rem.is_zero());
            EXPECT_EQ(cyclotomic_polynomial(a * b), phi) << a * b;
        }
}

TEST(Cyclotomic, FactorizationUpToSixty) {
    for (std::size_t m = 1; m <= 60; ++m) {
        const auto fac = cyclotomic_factorization(m);
        EXPECT_EQ(fac.product(), RationalPoly::x_pow_minus_one(m));
        std::size_t degree_sum = 0;
        for (const auto& f : fac.factors) {
            EXPECT_EQ(static_cast<std::size_t>(f.poly.degree()), euler_phi(f.index));
            EXPECT_TRUE(f.poly.is_monic());
            degree_sum += static_cast<std::size_t>(f.poly.degree());
        }
        EXPECT_EQ(degree_sum, m);
        // pairwise coprime, so the factorization is squarefree
        for (std::size_t i = 0; i < fac.factors.size(); ++i)
            for (std::size_t j = i + 1; j < fac.factors.size(); ++j)
                EXPECT_EQ(poly_gcd(fac.factors[i].poly, fac.factors[j].poly).degree(), 0);
    }
}

TEST(PolyAtShift, KernelDimensionIsGcdDegree) {
    std::mt19937 rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t p = 2 + rng() % 14;
        std::vector<Rational> c(1 + rng() % (p + 3));
        for (auto& v : c) v = static_cast<int>(rng() % 5) - 2;
        const RationalPoly f(c);
        if (f.is_zero()) continue;
        const auto g = poly_gcd(f, RationalPoly::x_pow_minus_one(p));
        EXPECT_EQ(kernel_of_poly(f, p).size(), static_cast<std::size_t>(g.degree()));
    }
}

TEST(PolyAtShift, ApplyMatchesMatrixProduct) {
    std::mt19937 rng(43);
    for (int trial = 0; trial < 50; ++trial) {
        const auto eta = random_generator(rng, 2 + rng() % 9);
        const RationalPoly f{static_cast<long long>(rng() % 3), -1, 2};
        const auto M = eval_poly_at_P(f, eta.period());
        RationalMatrix row(1, eta.period());
        for (std::size_t i = 0; i < eta.period(); ++i) row(0, i) = eta[i];
        const auto prod = row * M;
        const auto direct = apply_poly(f, eta.entries());
        for (std::size_t i = 0; i < eta.period(); ++i) ASSERT_EQ(prod(0, i), direct[i]);
    }
}

TEST(PolyAtShift, ShiftMatrixMatchesCyclicShift) {
    const auto eta = parse_generator("++-+--");
    const auto shifted = apply_poly(RationalPoly::monomial(1), eta.entries());
    const auto expected = cyclic_shift(eta, 1);
    for (std::size_t i = 0; i < eta.period(); ++i) EXPECT_EQ(shifted[i], expected[i]);
}

TEST(Annihilator, DegreeEqualsShiftSpanDimensionExhaustive) {
    for (std::size_t p = 2; p <= 12; ++p) {
        for (std::size_t mask = 0; mask < (std::size_t{1} << (p - 1)); ++mask) {
            // first entry fixed to +, which covers eta up to sign
            std::vector<int> e(p, 1);
            for (std::size_t i = 1; i < p; ++i) e[i] = (mask >> (i - 1)) & 1 ? -1 : 1;
            const GeneratorVector eta(e);
            const auto cert = annihilator_certificate(eta);
            ASSERT_EQ(cert.degree, shift_span_dimension(eta)) << to_sign_string(eta);
            ASSERT_TRUE(annihilates(cert.annihilator, eta));
            ASSERT_TRUE(divides(cert.annihilator, RationalPoly::x_pow_minus_one(p)));
        }
    }
}

TEST(Annihilator, CertificateIndices) {
    // eta = (v, -v) is killed by x^{p/2} + 1
    auto cert = annihilator_certificate(parse_generator("+++---"));
    EXPECT_EQ(cert.cyclotomic_indices, (std::vector<std::size_t>{2, 6}));
    EXPECT_EQ(cert.degree, 3u);
    cert = annihilator_certificate(parse_generator("++--"));
    EXPECT_EQ(cert.cyclotomic_indices, (std::vector<std::size_t>{4}));
    EXPECT_THROW(minimal_annihilator(std::vector<int>{0, 0}), InvalidArgument);
}

TEST(Annihilator, AdmissibilityFromDegree) {
    std::mt19937 rng(47);
    for (int trial = 0; trial < 200; ++trial) {
        const auto eta = random_generator(rng, 2 + rng() % 12);
        const std::size_t n = 1 + rng() % eta.period();
        EXPECT_EQ(is_admissible(eta, n), n >= annihilator_certificate(eta).degree);
    }
}

TEST(ResidueConditions, ClassSums) {
    const auto eta = parse_generator("+-+-+-");
    EXPECT_EQ(residue_class_sums(eta, 2), (std::vector<long long>{3, -3}));
    EXPECT_FALSE(check_cond1(eta, 2));
    EXPECT_TRUE(check_cond1(eta, 3)); // classes {+,-}, {-,+}, {+,-}
    EXPECT_THROW(check_cond1(eta, 4), InvalidArgument);
    EXPECT_THROW(check_cond1(eta, 5), InvalidArgument);
}

TEST(ResidueConditions, EqualSumsIffKilledByCofactor) {
    // equal class sums mod q  <=>  eta (1 + P^q + ... + P^{p-q}) is constant
    std::mt19937 rng(53);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t p = 2 + rng() % 14;
        const auto eta = random_generator(rng, p);
        for (std::size_t q = 2; q <= p; ++q) {
            if (p % q != 0 || !detail::is_prime(q)) continue;
            const auto img = apply_poly(geometric(p / q, q), eta.entries());
            bool constant = true;
            for (const auto& v : img) constant = constant && v == img.front();
            EXPECT_EQ(check_cond1(eta, q), constant);
        }
    }
}

TEST(BlockMembership, RepeatedBlocks) {
    EXPECT_TRUE(check_block_membership(parse_generator("+++--+++--+++--"), 5));
    EXPECT_FALSE(check_block_membership(parse_generator("+++--+++--+++--"), 3));
    EXPECT_TRUE(check_block_membership(parse_generator("+-+-"), 2));
    EXPECT_THROW(check_block_membership(parse_generator("+-+-"), 3), InvalidArgument);
    std::mt19937 rng(59);
    for (int trial = 0; trial < 100; ++trial) {
        const auto eta = random_generator(rng, 2 + rng() % 12);
        for (std::size_t k = 1; k <= eta.period(); ++k) {
            if (eta.period() % k) continue;
            const auto img = apply_poly(RationalPoly::monomial(k) - RationalPoly{1}, eta.entries());
            bool zero = true;
            for (const auto& v : img) zero = zero && v == 0;
            EXPECT_EQ(check_block_membership(eta, k), zero);
        }
    }
}
