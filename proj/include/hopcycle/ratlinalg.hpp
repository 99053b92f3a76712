#pragma once

// Exact linear algebra over the rationals: rank, kernels, Moore-Penrose
// pseudo-inverse and the learning-rule solve J * Sigma = Sigma * P.

#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "patterns.hpp"
#include "rational.hpp"

namespace hopcycle {

using RationalVector = std::vector<Rational>;

class RationalMatrix {
public:
    RationalMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {
        if (rows == 0 || cols == 0) throw InvalidDimension("RationalMatrix: dimensions must be >= 1");
    }

    static RationalMatrix identity(std::size_t n) {
        RationalMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }

    template <class T>
    static RationalMatrix from_rows(const std::vector<std::vector<T>>& rows) {
        if (rows.empty() || rows.front().empty()) throw InvalidDimension("RationalMatrix: empty rows");
        RationalMatrix m(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_) throw InvalidDimension("RationalMatrix: ragged rows");
            for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = Rational(rows[i][j]);
        }
        return m;
    }

    static RationalMatrix from_cycle(const CycleMatrix& sigma) { return from_rows(sigma.rows()); }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    Rational& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Rational& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    RationalVector row(std::size_t i) const {
        return {data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_)};
    }

    RationalMatrix transpose() const {
        RationalMatrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    bool is_zero() const {
        for (const auto& x : data_)
            if (x != 0) return false;
        return true;
    }

    std::vector<std::vector<double>> to_doubles() const {
        std::vector<std::vector<double>> out(rows_, std::vector<double>(cols_));
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) out[i][j] = to_double((*this)(i, j));
        return out;
    }

    friend RationalMatrix operator*(const RationalMatrix& a, const RationalMatrix& b) {
        if (a.cols_ != b.rows_) throw InvalidDimension("RationalMatrix: product dimension mismatch");
        RationalMatrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const auto& aik = a(i, k);
                if (aik == 0) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }
    friend RationalMatrix operator-(const RationalMatrix& a, const RationalMatrix& b) {
        a.require_same_shape(b);
        RationalMatrix c = a;
        for (std::size_t k = 0; k < c.data_.size(); ++k) c.data_[k] -= b.data_[k];
        return c;
    }
    friend RationalMatrix operator+(const RationalMatrix& a, const RationalMatrix& b) {
        a.require_same_shape(b);
        RationalMatrix c = a;
        for (std::size_t k = 0; k < c.data_.size(); ++k) c.data_[k] += b.data_[k];
        return c;
    }
    friend RationalMatrix operator*(const Rational& s, const RationalMatrix& a) {
        RationalMatrix c = a;
        for (auto& x : c.data_) x *= s;
        return c;
    }
    friend bool operator==(const RationalMatrix& a, const RationalMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    void require_same_shape(const RationalMatrix& b) const {
        if (rows_ != b.rows_ || cols_ != b.cols_) throw InvalidDimension("RationalMatrix: shape mismatch");
    }

    std::size_t rows_;
    std::size_t cols_;
    std::vector<Rational> data_;
};

/// Rank via fraction-free (Bareiss) elimination on an integer-scaled copy.
inline std::size_t rank(const RationalMatrix& m) {
    const std::size_t R = m.rows(), C = m.cols();
    std::vector<std::vector<BigInt>> a(R, std::vector<BigInt>(C));
    for (std::size_t i = 0; i < R; ++i) {
        BigInt l = 1;
        for (std::size_t j = 0; j < C; ++j) l = boost::multiprecision::lcm(l, denominator_of(m(i, j)));
        for (std::size_t j = 0; j < C; ++j) a[i][j] = numerator_of(m(i, j)) * (l / denominator_of(m(i, j)));
    }
    BigInt prev = 1;
    std::size_t r = 0;
    for (std::size_t col = 0; col < C && r < R; ++col) {
        std::size_t piv = r;
        while (piv < R && a[piv][col] == 0) ++piv;
        if (piv == R) continue;
        std::swap(a[piv], a[r]);
        for (std::size_t i = r + 1; i < R; ++i) {
            for (std::size_t j = col + 1; j < C; ++j) a[i][j] = (a[r][col] * a[i][j] - a[i][col] * a[r][j]) / prev;
            a[i][col] = 0;
        }
        prev = a[r][col];
        ++r;
    }
    return r;
}

struct RowEchelon {
    RationalMatrix reduced;
    std::vector<std::size_t> pivot_cols;
};

/// Reduced row echelon form by Gauss-Jordan over the rationals.
inline RowEchelon rref(RationalMatrix m) {
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t col = 0; col < m.cols() && r < m.rows(); ++col) {
        std::size_t piv = r;
        while (piv < m.rows() && m(piv, col) == 0) ++piv;
        if (piv == m.rows()) continue;
        if (piv != r)
            for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(piv, j), m(r, j));
        const Rational inv = 1 / m(r, col);
        for (std::size_t j = col; j < m.cols(); ++j) m(r, j) *= inv;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (i == r || m(i, col) == 0) continue;
            const Rational f = m(i, col);
            for (std::size_t j = col; j < m.cols(); ++j) m(i, j) -= f * m(r, j);
        }
        pivots.push_back(col);
        ++r;
    }
    return {std::move(m), std::move(pivots)};
}

/// Basis of the right null space {v : M v = 0}; size = cols - rank.
inline std::vector<RationalVector> kernel_basis(const RationalMatrix& m) {
    const auto ech = rref(m);
    std::vector<bool> is_pivot(m.cols(), false);
    for (auto c : ech.pivot_cols) is_pivot[c] = true;
    std::vector<RationalVector> basis;
    for (std::size_t free = 0; free < m.cols(); ++free) {
        if (is_pivot[free]) continue;
        RationalVector v(m.cols());
        v[free] = 1;
        for (std::size_t k = 0; k < ech.pivot_cols.size(); ++k) v[ech.pivot_cols[k]] = -ech.reduced(k, free);
        basis.push_back(std::move(v));
    }
    return basis;
}

inline RationalMatrix inverse(const RationalMatrix& m) {
    if (m.rows() != m.cols()) throw InvalidDimension("inverse: matrix must be square");
    const std::size_t n = m.rows();
    RationalMatrix aug(n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug(i, j) = m(i, j);
        aug(i, n + i) = 1;
    }
    const auto ech = rref(aug);
    if (ech.pivot_cols.size() < n || ech.pivot_cols[n - 1] != n - 1) throw InvalidArgument("inverse: matrix is singular");
    RationalMatrix inv(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) inv(i, j) = ech.reduced(i, n + j);
    return inv;
}

/// Moore-Penrose pseudo-inverse via the rank factorization M = C F:
/// M+ = F^T (F F^T)^-1 (C^T C)^-1 C^T.
inline RationalMatrix pseudo_inverse(const RationalMatrix& m) {
    const auto ech = rref(m);
    const std::size_t r = ech.pivot_cols.size();
    if (r == 0) return RationalMatrix(m.cols(), m.rows());
    RationalMatrix c(m.rows(), r);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t k = 0; k < r; ++k) c(i, k) = m(i, ech.pivot_cols[k]);
    RationalMatrix f(r, m.cols());
    for (std::size_t k = 0; k < r; ++k)
        for (std::size_t j = 0; j < m.cols(); ++j) f(k, j) = ech.reduced(k, j);
    const auto ft = f.transpose();
    const auto ct = c.transpose();
    return ft * inverse(f * ft) * inverse(ct * c) * ct;
}

/// p x p matrix P with (eta P) = eta shifted left once: P(i, j) = 1 iff i == j + 1 (mod p).
inline RationalMatrix shift_matrix(std::size_t p) {
    RationalMatrix P(p, p);
    for (std::size_t j = 0; j < p; ++j) P((j + 1) % p, j) = 1;
    return P;
}

/// All p cyclic shifts of eta as rows; its rank is dim W_eta.
inline RationalMatrix shift_span_matrix(const GeneratorVector& eta) {
    std::vector<std::vector<int>> rows;
    for (std::size_t j = 0; j < eta.period(); ++j) rows.push_back(cyclic_shift(eta, static_cast<long long>(j)).entries());
    return RationalMatrix::from_rows(rows);
}

inline std::size_t shift_span_dimension(const GeneratorVector& eta) { return rank(shift_span_matrix(eta)); }

/// A simple consecutive cycle is admissible iff dim W_eta == rank(Sigma).
inline bool is_admissible(const GeneratorVector& eta, std::size_t n) {
    const auto sigma = build_consecutive_sigma(eta, n);
    return shift_span_dimension(eta) == rank(RationalMatrix::from_cycle(sigma));
}

enum class CouplingForm { general, companion };

/// The learned coupling J (the c1 part of c0*I + c1*J).
struct CouplingMatrix {
    RationalMatrix J;
    CouplingForm form = CouplingForm::general;
    std::optional<RationalVector> companion_row;

    std::size_t size() const noexcept { return J.rows(); }
    std::vector<std::vector<double>> to_doubles() const { return J.to_doubles(); }
};

/// Superdiagonal ones, last row = a.
inline RationalMatrix companion_matrix(const RationalVector& a) {
    const std::size_t n = a.size();
    if (n == 0) throw InvalidDimension("companion_matrix: empty row");
    RationalMatrix J(n, n);
    for (std::size_t i = 0; i + 1 < n; ++i) J(i, i + 1) = 1;
    for (std::size_t j = 0; j < n; ++j) J(n - 1, j) = a[j];
    return J;
}

inline bool is_companion_form(const RationalMatrix& J) {
    if (J.rows() != J.cols()) return false;
    const std::size_t n = J.rows();
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (J(i, j) != (j == i + 1 ? 1 : 0)) return false;
    return true;
}

enum class CompanionRule {
    unique,             ///< Sigma has full row rank
    all_minus_one,      ///< n = p - 1 and eta sums to zero: psi = 1 + x + ... + x^(p-1)
    free_variables_zero ///< rank deficient: free unknowns set to zero
};

inline const char* to_string(CompanionRule r) {
    switch (r) {
    case CompanionRule::unique: return "unique";
    case CompanionRule::all_minus_one: return "all_minus_one";
    case CompanionRule::free_variables_zero: return "free_variables_zero";
    }
    return "?";
}

struct CompanionSolution {
    RationalVector row; ///< (a_0, ..., a_{n-1})
    CompanionRule rule = CompanionRule::unique;
    bool unique() const noexcept { return rule == CompanionRule::unique; }
};

/// Solves eta P^n = a_0 eta + a_1 eta P + ... + a_{n-1} eta P^{n-1} exactly.
inline CompanionSolution companion_solution(const GeneratorVector& eta, std::size_t n) {
    const auto sigma = build_consecutive_sigma(eta, n);
    const auto target = cyclic_shift(eta, static_cast<long long>(n));
    const std::size_t p = eta.period();
    // Augmented system Sigma^T a = (eta P^n)^T.
    RationalMatrix aug(p, n + 1);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug(i, j) = sigma.at(j, i);
        aug(i, n) = target[i];
    }
    const auto ech = rref(aug);
    if (!ech.pivot_cols.empty() && ech.pivot_cols.back() == n)
        throw NotAdmissible("eta P^" + std::to_string(n) + " is not in the span of the first " + std::to_string(n) +
                            " shifts of eta (rank(Sigma) != dim W_eta)");

    CompanionSolution sol;
    sol.row.assign(n, Rational(0));
    if (ech.pivot_cols.size() == n) {
        for (std::size_t k = 0; k < n; ++k) sol.row[ech.pivot_cols[k]] = ech.reduced(k, n);
        sol.rule = CompanionRule::unique;
        return sol;
    }
    const bool sums_to_zero = std::accumulate(eta.entries().begin(), eta.entries().end(), 0) == 0;
    if (n + 1 == p && sums_to_zero) {
        sol.row.assign(n, Rational(-1));
        sol.rule = CompanionRule::all_minus_one;
        return sol;
    }
    for (std::size_t k = 0; k < ech.pivot_cols.size(); ++k) sol.row[ech.pivot_cols[k]] = ech.reduced(k, n);
    sol.rule = CompanionRule::free_variables_zero;
    return sol;
}

inline RationalVector companion_row(const GeneratorVector& eta, std::size_t n) { return companion_solution(eta, n).row; }

/// J * Sigma - Sigma * P.
inline RationalMatrix learning_residual(const RationalMatrix& J, const CycleMatrix& sigma) {
    const auto S = RationalMatrix::from_cycle(sigma);
    return J * S - S * shift_matrix(sigma.period());
}

/// J = Sigma P Sigma+, the minimum-norm solution. Throws NotAdmissible when
/// J Sigma = Sigma P is inconsistent.
inline CouplingMatrix pseudo_inverse_solution(const CycleMatrix& sigma) {
    const auto S = RationalMatrix::from_cycle(sigma);
    CouplingMatrix out{S * shift_matrix(sigma.period()) * pseudo_inverse(S), CouplingForm::general, std::nullopt};
    if (!learning_residual(out.J, sigma).is_zero())
        throw NotAdmissible("J Sigma = Sigma P has no solution (rank(Sigma) = " + std::to_string(rank(S)) + ")");
    if (is_companion_form(out.J)) {
        out.form = CouplingForm::companion;
        out.companion_row = out.J.row(out.J.rows() - 1);
    }
    return out;
}

/// Learning-rule solve. Consecutive cycles get the companion-form solution;
/// a Sigma without generator gets Sigma P Sigma+. Both satisfy J Sigma = Sigma P
/// exactly, and coincide when Sigma has full row rank.
inline CouplingMatrix solve_learning(const CycleMatrix& sigma) {
    if (!sigma.generator()) return pseudo_inverse_solution(sigma);
    const auto& eta = *sigma.generator();
    const auto n = sigma.neurons();
    if (!is_admissible(eta, n))
        throw NotAdmissible("cycle not admissible: rank(Sigma) = " +
                            std::to_string(rank(RationalMatrix::from_cycle(sigma))) +
                            " but dim W_eta = " + std::to_string(shift_span_dimension(eta)));
    auto sol = companion_solution(eta, n);
    CouplingMatrix out{companion_matrix(sol.row), CouplingForm::companion, sol.row};
    if (!learning_residual(out.J, sigma).is_zero())
        throw NotAdmissible("companion solution leaves a nonzero residual in J Sigma = Sigma P");
    return out;
}

} // namespace hopcycle
