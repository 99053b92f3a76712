#pragma once

// Polynomials over Q acting on R^p through the cyclic shift P, and the
// cyclotomic machinery that classifies the P-invariant subspaces.
//
// Kernels use the row-vector convention of the generator: eta lies in
// ker f(P) when eta * f(P) == 0. For divisors of x^p - 1 the row and column
// kernels coincide, since cyclotomic factors are self-reciprocal.

#include <cstddef>
#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "patterns.hpp"
#include "ratlinalg.hpp"
#include "rational.hpp"

namespace hopcycle {

class RationalPoly {
public:
    RationalPoly() = default;
    /// Coefficients lowest degree first.
    explicit RationalPoly(std::vector<Rational> coeffs) : c_(std::move(coeffs)) { trim(); }
    RationalPoly(std::initializer_list<long long> coeffs) {
        for (auto v : coeffs) c_.emplace_back(v);
        trim();
    }

    static RationalPoly monomial(std::size_t degree, Rational coeff = 1) {
        std::vector<Rational> c(degree + 1);
        c[degree] = std::move(coeff);
        return RationalPoly(std::move(c));
    }
    /// x^m - 1
    static RationalPoly x_pow_minus_one(std::size_t m) {
        auto p = monomial(m);
        p.c_[0] -= 1;
        p.trim();
        return p;
    }

    bool is_zero() const noexcept { return c_.empty(); }
    /// Degree; -1 for the zero polynomial.
    long degree() const noexcept { return static_cast<long>(c_.size()) - 1; }
    const std::vector<Rational>& coefficients() const noexcept { return c_; }
    Rational coeff(std::size_t k) const { return k < c_.size() ? c_[k] : Rational(0); }
    const Rational& leading() const {
        if (c_.empty()) throw InvalidArgument("leading coefficient of the zero polynomial");
        return c_.back();
    }
    bool is_monic() const { return !c_.empty() && c_.back() == 1; }

    RationalPoly monic() const {
        if (is_zero()) return *this;
        auto out = *this;
        const Rational inv = 1 / c_.back();
        for (auto& x : out.c_) x *= inv;
        return out;
    }

    friend RationalPoly operator+(const RationalPoly& a, const RationalPoly& b) {
        std::vector<Rational> c(std::max(a.c_.size(), b.c_.size()));
        for (std::size_t k = 0; k < c.size(); ++k) c[k] = a.coeff(k) + b.coeff(k);
        return RationalPoly(std::move(c));
    }
    friend RationalPoly operator-(const RationalPoly& a, const RationalPoly& b) {
        std::vector<Rational> c(std::max(a.c_.size(), b.c_.size()));
        for (std::size_t k = 0; k < c.size(); ++k) c[k] = a.coeff(k) - b.coeff(k);
        return RationalPoly(std::move(c));
    }
    friend RationalPoly operator*(const RationalPoly& a, const RationalPoly& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<Rational> c(a.c_.size() + b.c_.size() - 1);
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
        return RationalPoly(std::move(c));
    }
    friend bool operator==(const RationalPoly&, const RationalPoly&) = default;

private:
    void trim() {
        while (!c_.empty() && c_.back() == 0) c_.pop_back();
    }
    std::vector<Rational> c_;
};

inline RationalPoly poly_mul(const RationalPoly& a, const RationalPoly& b) { return a * b; }

/// Quotient and remainder with deg(remainder) < deg(divisor).
inline std::pair<RationalPoly, RationalPoly> poly_divmod(const RationalPoly& a, const RationalPoly& b) {
    if (b.is_zero()) throw InvalidArgument("polynomial division by zero");
    if (a.degree() < b.degree()) return {RationalPoly{}, a};
    std::vector<Rational> rem = a.coefficients();
    const auto db = static_cast<std::size_t>(b.degree());
    std::vector<Rational> quot(rem.size() - db);
    const Rational inv_lead = 1 / b.leading();
    for (std::size_t k = rem.size(); k-- > db;) {
        const Rational q = rem[k] * inv_lead;
        quot[k - db] = q;
        if (q == 0) continue;
        for (std::size_t j = 0; j <= db; ++j) rem[k - db + j] -= q * b.coefficients()[j];
    }
    rem.resize(db);
    return {RationalPoly(std::move(quot)), RationalPoly(std::move(rem))};
}

/// Monic gcd by the Euclidean algorithm. gcd(0, 0) is rejected.
inline RationalPoly poly_gcd(RationalPoly a, RationalPoly b) {
    if (a.is_zero() && b.is_zero()) throw InvalidArgument("gcd of two zero polynomials");
    while (!b.is_zero()) {
        auto r = poly_divmod(a, b).second;
        a = std::move(b);
        b = std::move(r);
    }
    return a.monic();
}

inline bool divides(const RationalPoly& d, const RationalPoly& f) { return poly_divmod(f, d).second.is_zero(); }

/// Human-readable, highest degree first: "x^3 + 1", "x^2 - x + 1", "-1/2x".
inline std::string to_string(const RationalPoly& f) {
    if (f.is_zero()) return "0";
    std::string out;
    for (long k = f.degree(); k >= 0; --k) {
        const Rational c = f.coeff(static_cast<std::size_t>(k));
        if (c == 0) continue;
        const bool neg = c < 0;
        const Rational mag = neg ? Rational(-c) : c;
        if (out.empty()) out += neg ? "-" : "";
        else out += neg ? " - " : " + ";
        const bool unit = mag == 1;
        if (!unit || k == 0) out += to_string(mag);
        if (k >= 1) out += "x";
        if (k >= 2) out += "^" + std::to_string(k);
    }
    return out;
}

namespace detail {
inline std::vector<std::size_t> divisors(std::size_t m) {
    std::vector<std::size_t> d;
    for (std::size_t k = 1; k <= m; ++k)
        if (m % k == 0) d.push_back(k);
    return d;
}
} // namespace detail

/// Phi_d = (x^d - 1) / prod_{e | d, e < d} Phi_e, memoized process-wide.
inline RationalPoly cyclotomic_polynomial(std::size_t d) {
    if (d == 0) throw InvalidArgument("cyclotomic_polynomial: index must be >= 1");
    static std::mutex mu;
    static std::map<std::size_t, RationalPoly> cache;
    {
        std::lock_guard lock(mu);
        if (auto it = cache.find(d); it != cache.end()) return it->second;
    }
    RationalPoly f = RationalPoly::x_pow_minus_one(d);
    for (auto e : detail::divisors(d)) {
        if (e == d) continue;
        auto [q, r] = poly_divmod(f, cyclotomic_polynomial(e));
        if (!r.is_zero()) throw Error("cyclotomic_polynomial: inexact division (internal)");
        f = std::move(q);
    }
    std::lock_guard lock(mu);
    cache.emplace(d, f);
    return f;
}

struct CyclotomicFactor {
    std::size_t index; ///< d, with the factor equal to Phi_d
    RationalPoly poly;
    int multiplicity = 1;
};

/// Irreducible factors of x^m - 1 over Q.
struct FactorizationResult {
    std::size_t modulus = 0;
    std::vector<CyclotomicFactor> factors;

    RationalPoly product() const {
        RationalPoly prod{1};
        for (const auto& f : factors)
            for (int k = 0; k < f.multiplicity; ++k) prod = prod * f.poly;
        return prod;
    }
};

inline FactorizationResult cyclotomic_factorization(std::size_t m) {
    if (m < 1) throw InvalidArgument("cyclotomic_factorization: m must be >= 1");
    FactorizationResult res{m, {}};
    for (auto d : detail::divisors(m)) res.factors.push_back({d, cyclotomic_polynomial(d), 1});
    if (res.product() != RationalPoly::x_pow_minus_one(m))
        throw Error("cyclotomic_factorization: product check failed (internal)");
    return res;
}

/// The p x p matrix f(P).
inline RationalMatrix eval_poly_at_P(const RationalPoly& f, std::size_t p) {
    RationalMatrix out(p, p);
    if (f.is_zero()) return out;
    // P^k has ones at (i, j) with i == j + k (mod p).
    for (std::size_t k = 0; k <= static_cast<std::size_t>(f.degree()); ++k) {
        const Rational c = f.coeff(k);
        if (c == 0) continue;
        for (std::size_t j = 0; j < p; ++j) out((j + k) % p, j) += c;
    }
    return out;
}

/// eta * f(P) as an exact row vector.
inline RationalVector apply_poly(const RationalPoly& f, const std::vector<int>& eta) {
    const std::size_t p = eta.size();
    RationalVector out(p);
    for (long k = 0; k <= f.degree(); ++k) {
        const Rational c = f.coeff(static_cast<std::size_t>(k));
        if (c == 0) continue;
        for (std::size_t i = 0; i < p; ++i) out[i] += c * eta[(i + static_cast<std::size_t>(k)) % p];
    }
    return out;
}

inline bool annihilates(const RationalPoly& f, const GeneratorVector& eta) {
    for (const auto& v : apply_poly(f, eta.entries()))
        if (v != 0) return false;
    return true;
}

/// Basis of {eta : eta f(P) = 0}.
inline std::vector<RationalVector> kernel_of_poly(const RationalPoly& f, std::size_t p) {
    return kernel_basis(eval_poly_at_P(f, p).transpose());
}

/// Monic generator of {f : eta f(P) = 0}, found by removing from x^p - 1 every
/// cyclotomic factor whose removal still annihilates eta.
inline RationalPoly minimal_annihilator(const std::vector<int>& eta) {
    bool nonzero = false;
    for (int v : eta) nonzero = nonzero || v != 0;
    if (!nonzero || eta.empty()) throw InvalidArgument("minimal_annihilator: zero vector");
    const std::size_t p = eta.size();
    RationalPoly f = RationalPoly::x_pow_minus_one(p);
    for (const auto& factor : cyclotomic_factorization(p).factors) {
        auto reduced = poly_divmod(f, factor.poly).first;
        bool ok = true;
        for (const auto& v : apply_poly(reduced, eta)) ok = ok && v == 0;
        if (ok) f = std::move(reduced);
    }
    return f;
}
inline RationalPoly minimal_annihilator(const GeneratorVector& eta) { return minimal_annihilator(eta.entries()); }

/// Which Phi_d make up the minimal annihilator of eta; a consecutive cycle of
/// n rows is admissible exactly when n >= its degree.
struct AnnihilatorCertificate {
    RationalPoly annihilator;
    std::vector<std::size_t> cyclotomic_indices;
    std::size_t degree = 0;
};

inline AnnihilatorCertificate annihilator_certificate(const GeneratorVector& eta) {
    AnnihilatorCertificate cert{minimal_annihilator(eta), {}, 0};
    cert.degree = static_cast<std::size_t>(cert.annihilator.degree());
    for (const auto& factor : cyclotomic_factorization(eta.period()).factors)
        if (divides(factor.poly, cert.annihilator)) cert.cyclotomic_indices.push_back(factor.index);
    return cert;
}

namespace detail {
inline bool is_prime(std::size_t n) {
    if (n < 2) return false;
    for (std::size_t k = 2; k * k <= n; ++k)
        if (n % k == 0) return false;
    return true;
}
} // namespace detail

/// Residue-class sums of eta over indices i = r (mod prime_divisor).
inline std::vector<long long> residue_class_sums(const GeneratorVector& eta, std::size_t prime_divisor) {
    std::vector<long long> sums(prime_divisor, 0);
    for (std::size_t i = 0; i < eta.period(); ++i) sums[i % prime_divisor] += eta[i];
    return sums;
}

/// All residue-class sums mod a prime divisor of p are equal.
inline bool check_cond1(const GeneratorVector& eta, std::size_t prime_divisor) {
    if (!detail::is_prime(prime_divisor)) throw InvalidArgument("check_cond1: " + std::to_string(prime_divisor) + " is not prime");
    if (eta.period() % prime_divisor != 0)
        throw InvalidArgument("check_cond1: " + std::to_string(prime_divisor) + " does not divide p");
    const auto sums = residue_class_sums(eta, prime_divisor);
    for (auto s : sums)
        if (s != sums.front()) return false;
    return true;
}

/// eta is p/k repetitions of its first k entries, i.e. eta in ker(P^k - I).
inline bool check_block_membership(const GeneratorVector& eta, std::size_t k) {
    if (k == 0 || eta.period() % k != 0)
        throw InvalidArgument("check_block_membership: " + std::to_string(k) + " does not divide p");
    for (std::size_t i = k; i < eta.period(); ++i)
        if (eta[i] != eta[i - k]) return false;
    return true;
}

} // namespace hopcycle
