#pragma once

// Closed-form eigenvalues at the vertex equilibria of the tanh-form network
// with companion coupling, the sign window, and the edge / non-edge cycle
// predicates.

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cyclo.hpp"
#include "dynamics.hpp"
#include "patterns.hpp"
#include "ratlinalg.hpp"

namespace hopcycle {

namespace detail {
inline void require_tanh(const ModelParams& params) {
    params.validate();
    if (params.regularization.kind != RegularizationKind::arctanh_taylor)
        throw InvalidArgument("stability analysis needs the arctanh_taylor regularization (tanh formulation)");
}
inline std::vector<double> row_to_doubles(const RationalVector& a) {
    std::vector<double> out;
    out.reserve(a.size());
    for (const auto& r : a) out.push_back(to_double(r));
    return out;
}
} // namespace detail

/// f_q(1) for the active regularization.
inline double f_at_one(const ModelParams& params) {
    detail::require_tanh(params);
    return f_arctanh_taylor(1.0, params.regularization.q);
}

/// (J xi)_n = a_0 x_1 + ... + a_{n-1} x_n.
inline double companion_image_last(const BinaryPattern& xi, const std::vector<double>& a) {
    if (a.size() != xi.size()) throw InvalidDimension("companion row and vertex differ in length");
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * xi[j];
    return s;
}

inline std::vector<double> vertex_eigenvalues(const BinaryPattern& xi, const std::vector<double>& a, const ModelParams& params) {
    const double f1 = f_at_one(params);
    const std::size_t n = xi.size();
    const double image_n = companion_image_last(xi, a);
    std::vector<double> sigma(n);
    for (std::size_t k = 0; k + 1 < n; ++k)
        sigma[k] = 2.0 * (f1 - params.lambda * (params.c0 + params.c1() * xi[k] * xi[k + 1]));
    sigma[n - 1] = 2.0 * (f1 - params.lambda * (params.c0 + params.c1() * xi[n - 1] * image_n));
    return sigma;
}
inline std::vector<double> vertex_eigenvalues(const BinaryPattern& xi, const RationalVector& a, const ModelParams& params) {
    return vertex_eigenvalues(xi, detail::row_to_doubles(a), params);
}

/// lambda (c0 - c1) < f_q(1) < lambda
inline bool cond_signes(const ModelParams& params) {
    const double f1 = f_at_one(params);
    return params.lambda * (params.c0 - params.c1()) < f1 && f1 < params.lambda;
}

/// Open gain window (lo, hi) in which cond_signes holds. For c0 <= 1/2 the
/// upper end is infinite.
inline std::pair<double, double> cond_signes_window(double c0, int q) {
    const double f1 = f_arctanh_taylor(1.0, q);
    const double d = 2.0 * c0 - 1.0;
    return {f1, d > 0 ? f1 / d : std::numeric_limits<double>::infinity()};
}

struct EdgeConditions {
    bool lower = false;
    bool upper = false;
    bool both() const noexcept { return lower && upper; }
};

/// lower: lambda (c0 + c1 (a_0 + ... + a_{n-1})) < f_q(1)
/// upper: f_q(1) < lambda (c0 + c1 (-a_0 - ... - a_{n-2} + a_{n-1}))
inline EdgeConditions edge_cycle_conditions(const std::vector<double>& a, const ModelParams& params) {
    if (a.empty()) throw InvalidDimension("edge_cycle_conditions: empty companion row");
    const double f1 = f_at_one(params);
    double all_plus = 0.0, alternate = a.back();
    for (std::size_t j = 0; j < a.size(); ++j) all_plus += a[j];
    for (std::size_t j = 0; j + 1 < a.size(); ++j) alternate -= a[j];
    return {params.lambda * (params.c0 + params.c1() * all_plus) < f1,
            f1 < params.lambda * (params.c0 + params.c1() * alternate)};
}
inline EdgeConditions edge_cycle_conditions(const RationalVector& a, const ModelParams& params) {
    return edge_cycle_conditions(detail::row_to_doubles(a), params);
}

/// True iff a = (-1, 0, ..., 0).
inline bool is_edge_companion_row(const RationalVector& a) {
    if (a.empty() || a[0] != -1) return false;
    return std::all_of(a.begin() + 1, a.end(), [](const Rational& r) { return is_zero(r); });
}

struct VertexAnalysis {
    BinaryPattern vertex;
    std::vector<double> eigenvalues;
    std::vector<std::size_t> unstable_indices; ///< 0-based k with sigma_k > 0
    BinaryPattern image;                       ///< sign of J xi
    std::size_t switches = 0;
    /// |unstable| is switches or switches + 1
    bool switch_count_consistent() const noexcept {
        return unstable_indices.size() == switches || unstable_indices.size() == switches + 1;
    }
};

inline std::vector<std::size_t> positive_indices(const std::vector<double>& sigma) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < sigma.size(); ++k)
        if (sigma[k] > 0) out.push_back(k);
    return out;
}

/// Sign of J xi for the companion matrix: (x_2, ..., x_n, sign(a . xi)).
/// A zero image coordinate is reported as +1.
inline BinaryPattern companion_image(const BinaryPattern& xi, const std::vector<double>& a) {
    std::vector<int> v(xi.size());
    for (std::size_t k = 0; k + 1 < xi.size(); ++k) v[k] = xi[k + 1];
    v.back() = companion_image_last(xi, a) < 0 ? -1 : 1;
    return BinaryPattern(std::move(v));
}

inline VertexAnalysis analyze_vertex(const BinaryPattern& xi, const std::vector<double>& a, const ModelParams& params) {
    auto sigma = vertex_eigenvalues(xi, a, params);
    auto unstable = positive_indices(sigma);
    return {xi, std::move(sigma), std::move(unstable), companion_image(xi, a), count_switches(xi)};
}

inline std::vector<std::size_t> unstable_directions(const BinaryPattern& xi, const std::vector<double>& a, const ModelParams& params) {
    auto va = analyze_vertex(xi, a, params);
    if (cond_signes(params) && !va.switch_count_consistent())
        throw Error("unstable_directions: " + std::to_string(va.unstable_indices.size()) +
                    " unstable directions at a vertex with " + std::to_string(va.switches) + " switches");
    return va.unstable_indices;
}
inline std::vector<std::size_t> unstable_directions(const BinaryPattern& xi, const RationalVector& a, const ModelParams& params) {
    return unstable_directions(xi, detail::row_to_doubles(a), params);
}

enum class StabilityVerdict { stable, not_stable };
inline const char* to_string(StabilityVerdict v) { return v == StabilityVerdict::stable ? "stable" : "not_stable"; }

struct StabilityReport {
    double contracting_product = 0.0; ///< product of |sigma^-| over the cycle
    double expanding_product = 0.0;   ///< product of sigma^+ over the cycle
    double product_ratio = 0.0;       ///< contracting / expanding
    bool product_criterion = false;   ///< contracting > expanding
    double corollary_bound = 0.0;     ///< c0 / f_q(1)
    bool corollary_inequality = false;///< lambda < c0 / f_q(1)
    StabilityVerdict verdict = StabilityVerdict::not_stable;
};

/// Product criterion over an edge cycle given in visiting order. At each
/// vertex the expanding rate is its single positive eigenvalue and the
/// contracting rate is the eigenvalue along the coordinate flipped on the
/// incoming edge.
inline StabilityReport edge_cycle_stability(const ModelParams& params, const std::vector<VertexAnalysis>& cycle) {
    const std::size_t L = cycle.size();
    if (L < 2) throw PreconditionError("edge_cycle_stability: cycle needs at least two vertices");
    StabilityReport rep;
    rep.contracting_product = 1.0;
    rep.expanding_product = 1.0;
    for (std::size_t i = 0; i < L; ++i) {
        const auto& prev = cycle[(i + L - 1) % L].vertex;
        const auto& cur = cycle[i];
        if (prev.size() != cur.vertex.size() || cur.eigenvalues.size() != cur.vertex.size())
            throw InvalidDimension("edge_cycle_stability: inconsistent vertex dimensions");
        std::optional<std::size_t> flipped;
        for (std::size_t k = 0; k < prev.size(); ++k) {
            if (prev[k] == cur.vertex[k]) continue;
            if (flipped) throw PreconditionError("edge_cycle_stability: consecutive vertices differ in more than one coordinate");
            flipped = k;
        }
        if (!flipped) throw PreconditionError("edge_cycle_stability: repeated vertex");
        const auto positive = positive_indices(cur.eigenvalues);
        if (positive.size() != 1)
            throw PreconditionError("edge_cycle_stability: every vertex needs exactly one expanding direction");
        const double contracting = cur.eigenvalues[*flipped];
        if (!(contracting < 0)) throw PreconditionError("edge_cycle_stability: incoming direction is not contracting");
        rep.contracting_product *= -contracting;
        rep.expanding_product *= cur.eigenvalues[positive.front()];
    }
    rep.product_ratio = rep.contracting_product / rep.expanding_product;
    rep.product_criterion = rep.contracting_product > rep.expanding_product;
    rep.corollary_bound = params.c0 / f_at_one(params);
    rep.corollary_inequality = params.lambda < rep.corollary_bound;
    rep.verdict = rep.product_criterion ? StabilityVerdict::stable : StabilityVerdict::not_stable;
    return rep;
}

enum class CycleType { edge, non_edge, none };
inline const char* to_string(CycleType t) {
    switch (t) {
    case CycleType::edge: return "edge";
    case CycleType::non_edge: return "non_edge";
    case CycleType::none: return "none";
    }
    return "?";
}

enum class ConnectionKind {
    edge,    ///< one coordinate flips
    face,    ///< several pairwise non-adjacent coordinates flip
    blocked, ///< two flipped coordinates are adjacent: no saddle-sink connection
    stay     ///< source equals target
};
inline const char* to_string(ConnectionKind k) {
    switch (k) {
    case ConnectionKind::edge: return "edge";
    case ConnectionKind::face: return "face";
    case ConnectionKind::blocked: return "blocked";
    case ConnectionKind::stay: return "stay";
    }
    return "?";
}

struct Connection {
    std::size_t from = 0; ///< index into the vertex cycle
    std::size_t to = 0;
    std::vector<std::size_t> flipped; ///< 0-based coordinates
    ConnectionKind kind = ConnectionKind::stay;
    bool matches_unstable = false; ///< flipped set equals the unstable set at the source
};

inline ConnectionKind classify_connection(const std::vector<std::size_t>& flipped) {
    if (flipped.empty()) return ConnectionKind::stay;
    for (std::size_t i = 0; i + 1 < flipped.size(); ++i)
        if (flipped[i + 1] == flipped[i] + 1) return ConnectionKind::blocked;
    return flipped.size() == 1 ? ConnectionKind::edge : ConnectionKind::face;
}

struct PredictionReport {
    PredictionReport(GeneratorVector generator, std::size_t neurons, ModelParams model)
        : eta(std::move(generator)), n(neurons), params(std::move(model)) {}

    GeneratorVector eta;
    std::size_t n = 0;
    ModelParams params;
    std::size_t rank_sigma = 0;
    std::size_t dim_w = 0;
    bool admissible = false;
    std::optional<RationalVector> companion_row;
    std::optional<CompanionRule> companion_rule;
    bool cond_signes = false;
    bool adjacent_switches = false;
    bool degenerate = false; ///< n = 1 or constant generator: the cycle is a single vertex
    std::vector<VertexAnalysis> vertices; ///< one per vertex of the minimal pattern cycle
    std::vector<Connection> connections;
    std::optional<EdgeConditions> edge_conditions;
    std::optional<StabilityReport> stability;
    CycleType cycle_type = CycleType::none;
    std::vector<std::string> notes;

    bool eigenvalue_signs_consistent() const {
        return std::all_of(vertices.begin(), vertices.end(), [](const VertexAnalysis& v) { return v.switch_count_consistent(); });
    }
};

/// Admissibility, companion row, sign window, switch scan, per-vertex
/// eigenvalues and connection typing. Failures are verdicts, not errors.
inline PredictionReport predict_cycle(const GeneratorVector& eta, std::size_t n, const ModelParams& params) {
    detail::require_tanh(params);
    const auto sigma = build_consecutive_sigma(eta, n);
    PredictionReport rep(eta, n, params);
    rep.rank_sigma = rank(RationalMatrix::from_cycle(sigma));
    rep.dim_w = shift_span_dimension(eta);
    rep.admissible = rep.rank_sigma == rep.dim_w;
    rep.cond_signes = cond_signes(params);
    rep.adjacent_switches = has_adjacent_switches(sigma);

    const auto cycle = pattern_cycle(sigma);
    rep.degenerate = n == 1 || cycle.size() == 1;
    if (!rep.admissible) {
        rep.notes.push_back("rank(Sigma) = " + std::to_string(rep.rank_sigma) + " differs from dim W_eta = " + std::to_string(rep.dim_w));
        return rep;
    }
    const auto sol = companion_solution(eta, n);
    rep.companion_row = sol.row;
    rep.companion_rule = sol.rule;
    const auto a = detail::row_to_doubles(sol.row);

    for (const auto& xi : cycle) rep.vertices.push_back(analyze_vertex(xi, a, params));
    const std::size_t L = cycle.size();
    bool all_edges = L > 1, any_blocked = false;
    for (std::size_t i = 0; i < L; ++i) {
        Connection c;
        c.from = i;
        c.to = (i + 1) % L;
        for (std::size_t k = 0; k < n; ++k)
            if (cycle[i][k] != cycle[c.to][k]) c.flipped.push_back(k);
        c.kind = classify_connection(c.flipped);
        c.matches_unstable = c.flipped == rep.vertices[i].unstable_indices;
        all_edges = all_edges && c.kind == ConnectionKind::edge;
        any_blocked = any_blocked || c.kind == ConnectionKind::blocked;
        rep.connections.push_back(std::move(c));
    }

    if (rep.degenerate) {
        rep.notes.push_back("degenerate cycle: a single vertex");
        return rep;
    }
    if (!rep.cond_signes) rep.notes.push_back("gain outside the cond_signes window");
    if (rep.adjacent_switches) rep.notes.push_back("Sigma has adjacent switches");
    if (any_blocked) rep.notes.push_back("a connection flips two adjacent coordinates");
    if (!rep.cond_signes || rep.adjacent_switches || any_blocked) return rep;

    rep.cycle_type = CycleType::non_edge;
    if (is_edge_companion_row(sol.row)) {
        rep.edge_conditions = edge_cycle_conditions(a, params);
        if (rep.edge_conditions->both() && all_edges) {
            rep.cycle_type = CycleType::edge;
            rep.stability = edge_cycle_stability(params, rep.vertices);
        }
    }
    if (rep.cycle_type == CycleType::non_edge) rep.notes.push_back("non-edge stability is left to simulation");
    return rep;
}

} // namespace hopcycle
