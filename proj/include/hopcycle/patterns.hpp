#pragma once

// Binary pattern algebra: sign vectors, cyclic shifts and consecutive cycle
// matrices built from a generator row.
//
// Shift convention: shifting by one maps (x1, ..., xp) to (x2, ..., xp, x1),
// i.e. the row-vector product eta * P. Every other header relies on it.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace hopcycle {

namespace detail {
inline void require_signs(const std::vector<int>& v, const char* what) {
    for (int s : v)
        if (s != 1 && s != -1) throw InvalidArgument(std::string(what) + ": entries must be +1 or -1");
}
} // namespace detail

/// A vector of neuron states, each exactly +1 or -1.
class BinaryPattern {
public:
    explicit BinaryPattern(std::vector<int> entries) : entries_(std::move(entries)) {
        if (entries_.empty()) throw InvalidDimension("BinaryPattern: length must be >= 1");
        detail::require_signs(entries_, "BinaryPattern");
    }

    std::size_t size() const noexcept { return entries_.size(); }
    int operator[](std::size_t i) const { return entries_[i]; }
    const std::vector<int>& entries() const noexcept { return entries_; }

    BinaryPattern operator-() const {
        auto e = entries_;
        for (auto& s : e) s = -s;
        return BinaryPattern(std::move(e));
    }

    friend bool operator==(const BinaryPattern&, const BinaryPattern&) = default;
    friend auto operator<=>(const BinaryPattern&, const BinaryPattern&) = default;

private:
    std::vector<int> entries_;
};

/// The information string eta whose cyclic shifts generate a cycle. Period p >= 2.
class GeneratorVector {
public:
    explicit GeneratorVector(std::vector<int> entries) : entries_(std::move(entries)) {
        if (entries_.size() < 2) throw InvalidDimension("GeneratorVector: period must be >= 2");
        detail::require_signs(entries_, "GeneratorVector");
    }

    std::size_t period() const noexcept { return entries_.size(); }
    int operator[](std::size_t i) const { return entries_[i]; }
    const std::vector<int>& entries() const noexcept { return entries_; }

    GeneratorVector operator-() const {
        auto e = entries_;
        for (auto& s : e) s = -s;
        return GeneratorVector(std::move(e));
    }

    friend bool operator==(const GeneratorVector&, const GeneratorVector&) = default;
    friend auto operator<=>(const GeneratorVector&, const GeneratorVector&) = default;

private:
    std::vector<int> entries_;
};

/// Parses the compact CLI form, e.g. "+++---". '1' and '0'-free; only '+' and '-'.
inline std::vector<int> parse_sign_string(std::string_view s) {
    std::vector<int> out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '+') out.push_back(1);
        else if (c == '-') out.push_back(-1);
        else throw InvalidArgument("sign string may contain only '+' and '-', got '" + std::string(s) + "'");
    }
    return out;
}

inline std::string to_sign_string(const std::vector<int>& v) {
    std::string s;
    s.reserve(v.size());
    for (int x : v) s.push_back(x > 0 ? '+' : '-');
    return s;
}
inline std::string to_sign_string(const BinaryPattern& p) { return to_sign_string(p.entries()); }
inline std::string to_sign_string(const GeneratorVector& g) { return to_sign_string(g.entries()); }

inline GeneratorVector parse_generator(std::string_view s) { return GeneratorVector(parse_sign_string(s)); }

/// output[i] = eta[(i + k) mod p]; k may be negative.
inline GeneratorVector cyclic_shift(const GeneratorVector& eta, long long k) {
    const auto p = static_cast<long long>(eta.period());
    const long long r = ((k % p) + p) % p;
    std::vector<int> out(eta.period());
    for (long long i = 0; i < p; ++i) out[static_cast<std::size_t>(i)] = eta[static_cast<std::size_t>((i + r) % p)];
    return GeneratorVector(std::move(out));
}

/// An n x p matrix of signs whose columns are the patterns of a cycle.
class CycleMatrix {
public:
    /// rows[j] is the j-th neuron's sign sequence over the p patterns.
    explicit CycleMatrix(std::vector<std::vector<int>> rows, std::optional<GeneratorVector> generator = std::nullopt)
        : generator_(std::move(generator)) {
        if (rows.empty() || rows.front().empty()) throw InvalidDimension("CycleMatrix: empty matrix");
        n_ = rows.size();
        p_ = rows.front().size();
        if (p_ < n_) throw InvalidDimension("CycleMatrix: requires p >= n");
        entries_.reserve(n_ * p_);
        for (const auto& r : rows) {
            if (r.size() != p_) throw InvalidDimension("CycleMatrix: ragged rows");
            detail::require_signs(r, "CycleMatrix");
            entries_.insert(entries_.end(), r.begin(), r.end());
        }
        if (generator_) {
            if (generator_->period() != p_) throw InvalidDimension("CycleMatrix: generator period mismatch");
            for (std::size_t j = 0; j < n_; ++j) {
                auto shifted = cyclic_shift(*generator_, static_cast<long long>(j));
                for (std::size_t c = 0; c < p_; ++c)
                    if (at(j, c) != shifted[c]) throw InvalidArgument("CycleMatrix: rows are not consecutive shifts of the generator");
            }
        }
    }

    std::size_t neurons() const noexcept { return n_; }
    std::size_t period() const noexcept { return p_; }
    int at(std::size_t row, std::size_t col) const { return entries_[row * p_ + col]; }
    const std::optional<GeneratorVector>& generator() const noexcept { return generator_; }

    std::vector<int> row(std::size_t j) const {
        return {entries_.begin() + static_cast<std::ptrdiff_t>(j * p_),
                entries_.begin() + static_cast<std::ptrdiff_t>((j + 1) * p_)};
    }
    BinaryPattern column(std::size_t c) const {
        std::vector<int> v(n_);
        for (std::size_t j = 0; j < n_; ++j) v[j] = at(j, c);
        return BinaryPattern(std::move(v));
    }
    std::vector<BinaryPattern> columns() const {
        std::vector<BinaryPattern> out;
        out.reserve(p_);
        for (std::size_t c = 0; c < p_; ++c) out.push_back(column(c));
        return out;
    }
    std::vector<std::vector<int>> rows() const {
        std::vector<std::vector<int>> out;
        for (std::size_t j = 0; j < n_; ++j) out.push_back(row(j));
        return out;
    }

    CycleMatrix operator-() const {
        auto r = rows();
        for (auto& row : r)
            for (auto& s : row) s = -s;
        std::optional<GeneratorVector> g;
        if (generator_) g = -*generator_;
        return CycleMatrix(std::move(r), std::move(g));
    }

    friend bool operator==(const CycleMatrix& a, const CycleMatrix& b) {
        return a.n_ == b.n_ && a.p_ == b.p_ && a.entries_ == b.entries_;
    }

private:
    std::size_t n_ = 0;
    std::size_t p_ = 0;
    std::vector<int> entries_;
    std::optional<GeneratorVector> generator_;
};

/// Row j (0-based) is eta shifted left j times.
inline CycleMatrix build_consecutive_sigma(const GeneratorVector& eta, std::size_t n) {
    if (n < 1 || n > eta.period())
        throw InvalidDimension("build_consecutive_sigma: need 1 <= n <= p (n=" + std::to_string(n) +
                               ", p=" + std::to_string(eta.period()) + ")");
    std::vector<std::vector<int>> rows;
    rows.reserve(n);
    for (std::size_t j = 0; j < n; ++j) rows.push_back(cyclic_shift(eta, static_cast<long long>(j)).entries());
    return CycleMatrix(std::move(rows), eta);
}

/// Number of k with x_k * x_{k+1} == -1. The wrap-around pair is not counted.
inline std::size_t count_switches(const std::vector<int>& x) {
    std::size_t count = 0;
    for (std::size_t k = 0; k + 1 < x.size(); ++k)
        if (x[k] * x[k + 1] < 0) ++count;
    return count;
}
inline std::size_t count_switches(const BinaryPattern& x) { return count_switches(x.entries()); }

/// Two consecutive sign changes, i.e. some k with x_k != x_{k+1} != x_{k+2}.
inline bool has_consecutive_switches(const std::vector<int>& x) {
    for (std::size_t k = 0; k + 2 < x.size(); ++k)
        if (x[k] * x[k + 1] < 0 && x[k + 1] * x[k + 2] < 0) return true;
    return false;
}

/// Per-column and per-row flags. Prediction uses the column reading.
struct AdjacentSwitchScan {
    std::vector<bool> columns;
    std::vector<bool> rows;
    bool any_column() const { return std::find(columns.begin(), columns.end(), true) != columns.end(); }
    bool any_row() const { return std::find(rows.begin(), rows.end(), true) != rows.end(); }
};

inline AdjacentSwitchScan scan_adjacent_switches(const CycleMatrix& sigma) {
    AdjacentSwitchScan scan;
    for (std::size_t c = 0; c < sigma.period(); ++c)
        scan.columns.push_back(has_consecutive_switches(sigma.column(c).entries()));
    for (std::size_t r = 0; r < sigma.neurons(); ++r) scan.rows.push_back(has_consecutive_switches(sigma.row(r)));
    return scan;
}

/// True iff some column of sigma changes sign twice in a row.
inline bool has_adjacent_switches(const CycleMatrix& sigma) { return scan_adjacent_switches(sigma).any_column(); }

/// eta = (v, -v): p even and eta[i + p/2] == -eta[i].
inline bool is_antisymmetric(const GeneratorVector& eta) {
    const auto p = eta.period();
    if (p % 2 != 0) return false;
    for (std::size_t i = 0; i < p / 2; ++i)
        if (eta[i + p / 2] != -eta[i]) return false;
    return true;
}

/// Column sequence of sigma cut down to its minimal cyclic period. A vertex
/// repeats only after a full period, so this is the vertex cycle the dynamics
/// can realize.
inline std::vector<BinaryPattern> pattern_cycle(const CycleMatrix& sigma) {
    auto cols = sigma.columns();
    const auto p = cols.size();
    for (std::size_t L = 1; L <= p; ++L) {
        if (p % L != 0) continue;
        bool periodic = true;
        for (std::size_t c = 0; c < p && periodic; ++c) periodic = cols[c] == cols[(c + L) % p];
        if (periodic) {
            cols.erase(cols.begin() + static_cast<std::ptrdiff_t>(L), cols.end());
            return cols;
        }
    }
    return cols;
}

} // namespace hopcycle
