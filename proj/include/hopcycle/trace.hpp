#pragma once

// Trajectory post-processing: visited sign patterns with dwell times,
// comparison against a pattern cycle, and regime classification.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "dynamics.hpp"
#include "patterns.hpp"

namespace hopcycle {

enum class Asymptotics { heteroclinic_like, periodic, equilibrium, undetermined };

inline const char* to_string(Asymptotics a) {
    switch (a) {
    case Asymptotics::heteroclinic_like: return "heteroclinic_like";
    case Asymptotics::periodic: return "periodic";
    case Asymptotics::equilibrium: return "equilibrium";
    case Asymptotics::undetermined: return "undetermined";
    }
    return "?";
}

struct Visit {
    BinaryPattern pattern;
    double first_time = 0.0; ///< first committed sample
    double last_time = 0.0;  ///< last committed sample
    double dwell = 0.0;      ///< accumulated committed time
};

struct CycleMatch {
    std::size_t offset = 0;  ///< cycle index of the first visit in the compared window
    std::size_t compared = 0;///< visits compared
};

enum class MatchStatus { match, mismatch, undetermined };

inline const char* to_string(MatchStatus m) {
    switch (m) {
    case MatchStatus::match: return "match";
    case MatchStatus::mismatch: return "mismatch";
    case MatchStatus::undetermined: return "undetermined";
    }
    return "?";
}

struct MatchResult {
    MatchStatus status = MatchStatus::undetermined;
    std::optional<CycleMatch> match;
    std::string reason;
    bool matched() const noexcept { return status == MatchStatus::match; }
};

struct TraceDiagnostics {
    std::optional<double> dwell_ratio;     ///< last same-vertex dwell ratio
    std::optional<double> period_estimate; ///< time between the last two passes through one vertex
    std::optional<std::size_t> visit_period;///< visits per recurrence
    double tail_max_speed = 0.0;
    double final_vertex_distance = 0.0;    ///< sup-norm distance of the final state to the nearest vertex
};

struct TraceResult {
    double threshold = 0.5;
    std::vector<Visit> visits;
    bool final_visit_open = false; ///< the run ended while committed to the last visit
    Asymptotics asymptotics = Asymptotics::undetermined;
    TraceDiagnostics diagnostics;
    std::optional<MatchResult> matched_cycle;

    std::vector<BinaryPattern> visited() const {
        std::vector<BinaryPattern> out;
        out.reserve(visits.size());
        for (const auto& v : visits) out.push_back(v.pattern);
        return out;
    }
    std::vector<double> dwell_times() const {
        std::vector<double> out;
        out.reserve(visits.size());
        for (const auto& v : visits) out.push_back(v.dwell);
        return out;
    }
    /// Visits whose exit was observed.
    std::size_t closed_visits() const noexcept { return visits.size() - (final_visit_open && !visits.empty() ? 1 : 0); }
};

/// Pattern committed at x, if any. Tanh form: every |x_i| >= threshold.
/// Logistic form: every |x_i - 1/2| >= threshold / 2, sign read against 1/2.
inline std::optional<BinaryPattern> committed_pattern(const State& x, Formulation formulation, double threshold) {
    std::vector<int> s(x.size());
    const double centre = formulation == Formulation::tanh_cube ? 0.0 : 0.5;
    const double margin = formulation == Formulation::tanh_cube ? threshold : threshold / 2.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - centre;
        if (!(std::abs(d) >= margin)) return std::nullopt;
        s[i] = d > 0 ? 1 : -1;
    }
    return BinaryPattern(std::move(s));
}

/// Visits in order. Consecutive commitments to the same pattern merge into one
/// visit even across an uncommitted gap; each committed sample contributes the
/// time to the next sample.
inline TraceResult sign_sequence(const Trajectory& traj, double threshold = 0.5) {
    if (!(threshold > 0 && threshold < 1)) throw InvalidArgument("sign_sequence: threshold must lie in (0, 1)");
    TraceResult out;
    out.threshold = threshold;
    const std::size_t N = traj.size();
    bool last_committed = false;
    for (std::size_t k = 0; k < N; ++k) {
        auto pat = committed_pattern(traj.states[k], traj.spec.formulation, threshold);
        last_committed = pat.has_value();
        if (!pat) continue;
        const double t = traj.times[k];
        const double dt = k + 1 < N ? traj.times[k + 1] - t : 0.0;
        if (out.visits.empty() || out.visits.back().pattern != *pat) {
            out.visits.push_back({std::move(*pat), t, t, dt});
        } else {
            out.visits.back().last_time = t;
            out.visits.back().dwell += dt;
        }
    }
    out.final_visit_open = last_committed;
    return out;
}

/// Compares the last `periods` cycle lengths of visits (at least one full
/// cycle) against every rotation of `cycle`.
inline MatchResult matches_cycle(const TraceResult& trace, const std::vector<BinaryPattern>& cycle, std::size_t periods = 2) {
    MatchResult res;
    const std::size_t L = cycle.size();
    if (L == 0) throw InvalidArgument("matches_cycle: empty cycle");
    if (periods == 0) periods = 1;
    const auto& V = trace.visits;
    if (!V.empty() && V.front().pattern.size() != cycle.front().size())
        throw InvalidDimension("matches_cycle: trace and cycle dimensions differ");
    if (V.size() < L || (L == 1 && V.size() < 2)) {
        if (trace.asymptotics == Asymptotics::equilibrium) {
            res.status = MatchStatus::mismatch;
            res.reason = "run settled after " + std::to_string(V.size()) + " visits";
        } else {
            res.status = MatchStatus::undetermined;
            res.reason = "only " + std::to_string(V.size()) + " visits for a cycle of length " + std::to_string(L);
        }
        return res;
    }
    const std::size_t m = std::min(V.size(), periods * L);
    const std::size_t start = V.size() - m;
    for (std::size_t o = 0; o < L; ++o) {
        if (cycle[o] != V[start].pattern) continue;
        bool ok = true;
        for (std::size_t i = 0; i < m && ok; ++i) ok = V[start + i].pattern == cycle[(o + i) % L];
        if (ok) {
            res.status = MatchStatus::match;
            res.match = CycleMatch{o, m};
            return res;
        }
    }
    res.status = MatchStatus::mismatch;
    res.reason = "last " + std::to_string(m) + " visits are not a rotation of the cycle";
    return res;
}

inline MatchResult matches_cycle(const TraceResult& trace, const CycleMatrix& sigma, std::size_t periods = 2) {
    return matches_cycle(trace, pattern_cycle(sigma), periods);
}

struct ClassifierOptions {
    double gamma = 0.05;           ///< dwell-growth margin
    std::size_t window = 4;        ///< closed visits examined
    double stationary_tol = 1e-8;  ///< max |dx/dt| for a settled tail
    double tail_fraction = 0.05;   ///< share of the run treated as the tail
    double period_rel_tol = 0.1;   ///< allowed relative change of the period estimate
    double face_band = 1e-3;       ///< distance to a face below which escape is measured in face coordinates
};

/// max_j |dx_j/dt| over coordinates away from the faces. A coordinate within
/// `face_band` of a face contributes |drive_j| (its speed in face-adapted
/// coordinates) when the drive points away from that face and nothing when it
/// presses into it. A saddle dwell therefore never reads as settled, and a sink
/// held at the face floor does.
inline double settling_speed(const State& x, const SystemSpec& spec, double face_band) {
    State d;
    drive(x, spec, d);
    const double lo = spec.lower(), hi = spec.upper();
    double speed = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const bool near_lo = x[j] - lo < face_band, near_hi = hi - x[j] < face_band;
        double v = std::abs(face_factor(x[j], spec.formulation) * d[j]);
        if (near_lo || near_hi) {
            const bool escaping = (near_lo && d[j] > 0) || (near_hi && d[j] < 0);
            v = escaping ? std::abs(d[j]) : 0.0;
        }
        speed = std::max(speed, v);
    }
    return speed;
}

namespace detail {
/// Smallest L such that the last `span` visits repeat with period L.
inline std::optional<std::size_t> visit_period(const std::vector<Visit>& v, std::size_t closed, std::size_t window) {
    for (std::size_t L = 1; L + window <= closed && L <= closed / 2; ++L) {
        const std::size_t span = std::min(closed, std::max(2 * L, L + window));
        bool ok = true;
        for (std::size_t i = closed - span + L; i < closed && ok; ++i) ok = v[i].pattern == v[i - L].pattern;
        if (ok) return L;
    }
    return std::nullopt;
}
} // namespace detail

/// equilibrium: max |dx/dt| over the tail below stationary_tol.
/// heteroclinic_like: for the last `window` closed visits, the dwell at a vertex
/// exceeds the dwell at the same vertex one recurrence earlier by a factor
/// >= 1 + gamma. periodic: those ratios lie within [1 - gamma, 1 + gamma] and
/// the recurrence time is stable. Otherwise undetermined. A numerical verdict:
/// a heteroclinic cycle and a very long periodic orbit look the same in
/// floating point over a finite run.
inline Asymptotics classify_asymptotics(TraceResult& trace, const Trajectory& traj, const ClassifierOptions& opt = {}) {
    auto& diag = trace.diagnostics;
    trace.asymptotics = Asymptotics::undetermined;
    if (traj.size() == 0) return trace.asymptotics;

    const auto& xf = traj.final_state();
    const double lo = traj.spec.lower(), hi = traj.spec.upper();
    diag.final_vertex_distance = 0.0;
    for (double v : xf) diag.final_vertex_distance = std::max(diag.final_vertex_distance, std::min(v - lo, hi - v));

    const double t_final = traj.times.back();
    const double t_tail = t_final * (1.0 - opt.tail_fraction);
    diag.tail_max_speed = 0.0;
    for (std::size_t k = traj.size(); k-- > 0;) {
        if (traj.times[k] < t_tail && k + 1 < traj.size()) break;
        diag.tail_max_speed = std::max(diag.tail_max_speed, settling_speed(traj.states[k], traj.spec, opt.face_band));
    }
    if (diag.tail_max_speed < opt.stationary_tol) {
        trace.asymptotics = Asymptotics::equilibrium;
        return trace.asymptotics;
    }

    const auto& V = trace.visits;
    const std::size_t closed = trace.closed_visits();
    const auto L = detail::visit_period(V, closed, opt.window);
    diag.visit_period = L;
    if (!L || closed < *L + opt.window) return trace.asymptotics;

    std::vector<double> ratios;
    for (std::size_t i = closed - opt.window; i < closed; ++i) ratios.push_back(V[i].dwell / V[i - *L].dwell);
    diag.dwell_ratio = ratios.back();
    diag.period_estimate = V[closed - 1].first_time - V[closed - 1 - *L].first_time;

    const bool growing = std::all_of(ratios.begin(), ratios.end(), [&](double r) { return r >= 1.0 + opt.gamma; });
    if (growing) {
        trace.asymptotics = Asymptotics::heteroclinic_like;
        return trace.asymptotics;
    }
    const bool steady = std::all_of(ratios.begin(), ratios.end(), [&](double r) { return std::abs(r - 1.0) <= opt.gamma; });
    if (steady && closed >= 2 * *L + 1) {
        const double earlier = V[closed - 1 - *L].first_time - V[closed - 1 - 2 * *L].first_time;
        if (std::abs(*diag.period_estimate - earlier) <= opt.period_rel_tol * earlier)
            trace.asymptotics = Asymptotics::periodic;
    }
    return trace.asymptotics;
}

/// sign_sequence followed by classify_asymptotics.
inline TraceResult analyze_trajectory(const Trajectory& traj, double threshold = 0.5, const ClassifierOptions& opt = {}) {
    auto trace = sign_sequence(traj, threshold);
    classify_asymptotics(trace, traj, opt);
    return trace;
}

/// Runs body(i) for i in [0, count) on `workers` threads.
inline void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& body) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, count); ++w)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < count;) body(i);
        });
    for (auto& t : pool) t.join();
}

struct SweepRow {
    double value = 0.0;
    Asymptotics regime = Asymptotics::undetermined;
    std::optional<double> dwell_ratio;
    std::optional<double> period_estimate;
    std::optional<std::string> error; ///< integration failure for this cell
};

struct RegimeBoundary {
    double lower = 0.0, upper = 0.0;
    Asymptotics below = Asymptotics::undetermined, above = Asymptotics::undetermined;
};

struct SweepTable {
    std::string parameter;
    std::vector<SweepRow> rows; ///< sorted by value
    std::vector<RegimeBoundary> boundaries;
};

struct SweepSettings {
    State x0;
    IntegratorSettings integrator;
    double threshold = 0.5;
    ClassifierOptions classifier;
    std::size_t workers = 1;
};

/// Integrates and classifies one cell per grid value. `apply` writes the value
/// into a copy of the template system.
inline SweepTable sweep_parameter(const SystemSpec& base, std::string parameter, std::vector<double> grid,
                                  const std::function<void(SystemSpec&, double)>& apply, const SweepSettings& settings) {
    if (grid.empty()) throw InvalidArgument("sweep: empty grid");
    std::sort(grid.begin(), grid.end());
    SweepTable table{std::move(parameter), std::vector<SweepRow>(grid.size()), {}};
    parallel_for(grid.size(), settings.workers, [&](std::size_t i) {
        SweepRow& row = table.rows[i];
        row.value = grid[i];
        try {
            SystemSpec spec = base;
            apply(spec, grid[i]);
            const auto traj = integrate(spec, settings.x0, settings.integrator);
            const auto trace = analyze_trajectory(traj, settings.threshold, settings.classifier);
            row.regime = trace.asymptotics;
            row.dwell_ratio = trace.diagnostics.dwell_ratio;
            row.period_estimate = trace.diagnostics.period_estimate;
        } catch (const Error& e) {
            row.error = e.what();
        }
    });
    for (std::size_t i = 0; i + 1 < table.rows.size(); ++i) {
        const auto& a = table.rows[i];
        const auto& b = table.rows[i + 1];
        if (a.error || b.error || a.regime == b.regime) continue;
        table.boundaries.push_back({a.value, b.value, a.regime, b.regime});
    }
    return table;
}

inline SweepTable sweep_epsilon(const SystemSpec& base, std::vector<double> grid, const SweepSettings& settings) {
    if (base.params.regularization.kind != RegularizationKind::logit_epsilon)
        throw InvalidArgument("sweep_epsilon: template must use the logit_epsilon regularization");
    return sweep_parameter(base, "epsilon", std::move(grid),
                           [](SystemSpec& s, double e) { s.params.regularization = RegularizationSpec::logit_epsilon(e); }, settings);
}

inline SweepTable sweep_lambda(const SystemSpec& base, std::vector<double> grid, const SweepSettings& settings) {
    return sweep_parameter(base, "lambda", std::move(grid), [](SystemSpec& s, double l) { s.params.lambda = l; }, settings);
}

/// Header "<parameter>,regime,dwell_ratio,period_estimate"; failed cells
/// carry regime "error".
inline void write_sweep_csv(std::ostream& os, const SweepTable& table) {
    os << table.parameter << ",regime,dwell_ratio,period_estimate\n";
    os.precision(10);
    for (const auto& r : table.rows) {
        os << r.value << ',' << (r.error ? "error" : to_string(r.regime)) << ',';
        if (r.dwell_ratio) os << *r.dwell_ratio;
        os << ',';
        if (r.period_estimate) os << *r.period_estimate;
        os << '\n';
    }
}

} // namespace hopcycle
