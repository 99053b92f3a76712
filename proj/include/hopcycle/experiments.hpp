#pragma once

// The learn -> classify -> simulate -> compare pipeline and the golden-case
// runner built on it.

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "io.hpp"

namespace hopcycle {

/// Dwell at each closed visit is at least the dwell at the same vertex one
/// recurrence earlier, up to `tol`. Visits before `skip` are transients.
inline bool dwell_non_decreasing(const TraceResult& trace, std::size_t period, std::size_t skip, double tol) {
    const std::size_t closed = trace.closed_visits();
    for (std::size_t k = skip + period; k < closed; ++k)
        if (trace.visits[k].dwell < trace.visits[k - period].dwell - tol) return false;
    return true;
}

struct VerifyResult {
    std::optional<PredictionReport> prediction;
    std::optional<CouplingMatrix> coupling;
    TraceResult trace;
    std::optional<MatchResult> match;
    std::optional<bool> agreement; ///< unset when the match is undetermined or no prediction exists
    State x0;
    Trajectory trajectory;
};

/// Integrates, retrying with doubled t_end while the match against `cycle` is
/// undetermined and the step budget allows.
inline std::pair<Trajectory, TraceResult> simulate_until_determined(const SystemSpec& spec, const State& x0, IntegratorSettings is,
                                                                    double threshold, const std::vector<BinaryPattern>* cycle,
                                                                    std::size_t periods, double step_budget = 1e7) {
    for (;;) {
        auto traj = integrate(spec, x0, is);
        auto trace = analyze_trajectory(traj, threshold);
        if (!cycle) return {std::move(traj), std::move(trace)};
        trace.matched_cycle = matches_cycle(trace, *cycle, periods);
        const bool enough = trace.matched_cycle->status != MatchStatus::undetermined &&
                            trace.visits.size() >= periods * cycle->size();
        if (enough || trace.matched_cycle->status == MatchStatus::mismatch || 2.0 * is.t_end / is.dt > step_budget)
            return {std::move(traj), std::move(trace)};
        is.t_end *= 2.0;
    }
}

inline VerifyResult run_verify(const RunConfig& cfg, std::size_t periods = 2) {
    const auto sys = resolve_system(cfg);
    VerifyResult out{std::nullopt, sys.coupling, {}, std::nullopt, std::nullopt, resolve_x0(cfg, sys), {}};
    if (cfg.formulation == Formulation::tanh_cube && cfg.eta && cfg.n && !cfg.coupling)
        out.prediction = predict_cycle(cfg.generator(), *cfg.n, sys.spec.params);
    std::optional<std::vector<BinaryPattern>> cycle;
    if (sys.sigma) cycle = pattern_cycle(*sys.sigma);
    auto [traj, trace] = simulate_until_determined(sys.spec, out.x0, cfg.integrator, cfg.threshold, cycle ? &*cycle : nullptr,
                                                   periods, static_cast<double>(cfg.integrator.t_end / cfg.integrator.dt));
    out.trajectory = std::move(traj);
    out.trace = std::move(trace);
    out.match = out.trace.matched_cycle;
    if (out.prediction && out.match && out.match->status != MatchStatus::undetermined)
        out.agreement = out.match->matched() == (out.prediction->cycle_type != CycleType::none);
    return out;
}

inline Json to_json(const VerifyResult& v) {
    Json o;
    o["prediction"] = v.prediction ? to_json(*v.prediction) : Json(nullptr);
    o["coupling"] = v.coupling ? to_json(*v.coupling) : Json(nullptr);
    o["x0"] = v.x0;
    o["trace"] = to_json(v.trace);
    o["clip_count"] = v.trajectory.clip_count;
    o["t_end"] = v.trajectory.times.empty() ? 0.0 : v.trajectory.times.back();
    o["agreement"] = v.agreement ? Json(*v.agreement) : Json(nullptr);
    return o;
}

// ---------------------------------------------------------------------------
// Golden cases

struct GoldenExpectation {
    std::optional<RationalMatrix> J;
    std::optional<RationalVector> companion_row;
    std::optional<CycleType> cycle_type;
    std::optional<bool> corollary_inequality;
    std::optional<bool> product_criterion;
    std::optional<std::vector<std::vector<int>>> trace_matches;     ///< Sigma rows whose columns the trace must follow
    std::optional<std::vector<std::vector<int>>> trace_not_matches; ///< Sigma rows the trace must not follow
    std::optional<Asymptotics> regime;
    std::optional<State> final_state;
    double final_tolerance = 1e-3;
    std::optional<std::vector<int>> antiphase; ///< 1-based coordinates whose signs stay opposite at every visit
    bool monotone_dwell = false;
    std::size_t periods = 2;
};

struct GoldenCase {
    std::string name;
    std::string figure; ///< figure or example the case reproduces
    std::string note;
    RunConfig config;
    GoldenExpectation expected;
};

struct GoldenResult {
    std::string name;
    bool passed = true;
    std::vector<std::string> diffs;
    Json details;
};

namespace detail {
inline std::vector<std::vector<int>> parse_sign_rows(const Json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a list of sign strings");
    std::vector<std::vector<int>> rows;
    for (const auto& r : j) {
        if (!r.is_string()) throw ConfigError(where + ": rows must be sign strings");
        try {
            rows.push_back(parse_sign_string(r.get<std::string>()));
        } catch (const Error& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
    return rows;
}

inline RationalVector parse_rational_row(const Json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + ": expected an array");
    RationalVector v;
    for (const auto& e : j) {
        if (e.is_string()) v.push_back(parse_rational(e.get<std::string>()));
        else if (e.is_number_integer()) v.push_back(Rational(e.get<long long>()));
        else throw ConfigError(where + ": entries must be integers or rational strings");
    }
    return v;
}

inline Asymptotics parse_asymptotics(const std::string& s) {
    for (auto a : {Asymptotics::heteroclinic_like, Asymptotics::periodic, Asymptotics::equilibrium, Asymptotics::undetermined})
        if (s == to_string(a)) return a;
    throw ConfigError("regime: unknown value '" + s + "'");
}

inline CycleType parse_cycle_type(const std::string& s) {
    for (auto t : {CycleType::edge, CycleType::non_edge, CycleType::none})
        if (s == to_string(t)) return t;
    throw ConfigError("cycle_type: unknown value '" + s + "'");
}
} // namespace detail

inline GoldenCase parse_golden(const Json& j) {
    if (!j.is_object()) throw ConfigError("golden: expected an object");
    detail::reject_unknown(j, {"name", "figure", "note", "config", "expected"}, "golden.");
    GoldenCase g;
    g.name = detail::field<std::string>(j, "name", "golden.");
    if (j.contains("figure")) g.figure = detail::field<std::string>(j, "figure", "golden.");
    if (j.contains("note")) g.note = detail::field<std::string>(j, "note", "golden.");
    if (!j.contains("config")) throw ConfigError("golden.config: required");
    g.config = parse_run_config(j["config"]);
    if (!j.contains("expected")) return g;
    const auto& e = j["expected"];
    const std::string w = "golden.expected.";
    detail::reject_unknown(e, {"J", "companion_row", "cycle_type", "corollary_inequality", "product_criterion", "trace_matches",
                               "trace_not_matches", "regime", "final_state", "final_tolerance", "antiphase", "monotone_dwell",
                               "periods"}, w);
    auto& x = g.expected;
    if (e.contains("J")) {
        std::vector<RationalVector> rows;
        for (const auto& r : e["J"]) rows.push_back(detail::parse_rational_row(r, w + "J"));
        x.J = RationalMatrix::from_rows(rows);
    }
    if (e.contains("companion_row")) x.companion_row = detail::parse_rational_row(e["companion_row"], w + "companion_row");
    if (e.contains("cycle_type")) x.cycle_type = detail::parse_cycle_type(detail::field<std::string>(e, "cycle_type", w));
    if (e.contains("corollary_inequality")) x.corollary_inequality = detail::field<bool>(e, "corollary_inequality", w);
    if (e.contains("product_criterion")) x.product_criterion = detail::field<bool>(e, "product_criterion", w);
    if (e.contains("trace_matches")) x.trace_matches = detail::parse_sign_rows(e["trace_matches"], w + "trace_matches");
    if (e.contains("trace_not_matches")) x.trace_not_matches = detail::parse_sign_rows(e["trace_not_matches"], w + "trace_not_matches");
    if (e.contains("regime")) x.regime = detail::parse_asymptotics(detail::field<std::string>(e, "regime", w));
    if (e.contains("final_state")) x.final_state = detail::field<State>(e, "final_state", w);
    if (e.contains("final_tolerance")) x.final_tolerance = detail::field<double>(e, "final_tolerance", w);
    if (e.contains("antiphase")) x.antiphase = detail::field<std::vector<int>>(e, "antiphase", w);
    if (e.contains("monotone_dwell")) x.monotone_dwell = detail::field<bool>(e, "monotone_dwell", w);
    if (e.contains("periods")) x.periods = detail::field<std::size_t>(e, "periods", w);
    return g;
}

inline GoldenCase load_golden(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("golden: cannot open " + path.string());
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_golden(j);
}

/// Sorted by file name.
inline std::vector<std::filesystem::path> golden_files(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json") out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

inline GoldenResult run_golden(const GoldenCase& g) {
    GoldenResult res{g.name, true, {}, Json::object()};
    auto fail = [&](std::string msg) {
        res.passed = false;
        res.diffs.push_back(std::move(msg));
    };
    const auto& x = g.expected;
    try {
        const auto sys = resolve_system(g.config);
        if (x.J || x.companion_row) {
            if (!sys.coupling) {
                fail("expected a learned J but the config gives an explicit coupling");
            } else {
                res.details["coupling"] = to_json(*sys.coupling);
                if (x.J && !(sys.coupling->J == *x.J)) fail("J differs from the expected matrix");
                if (x.companion_row && sys.coupling->companion_row != x.companion_row) fail("companion row differs");
                if (!learning_residual(sys.coupling->J, *sys.sigma).is_zero()) fail("nonzero residual in J Sigma = Sigma P");
            }
        }
        if (x.cycle_type || x.corollary_inequality || x.product_criterion) {
            const auto rep = predict_cycle(g.config.generator(), g.config.neurons(), sys.spec.params);
            res.details["prediction"] = to_json(rep);
            if (x.cycle_type && rep.cycle_type != *x.cycle_type)
                fail(std::string("cycle_type ") + to_string(rep.cycle_type) + ", expected " + to_string(*x.cycle_type));
            if (x.corollary_inequality || x.product_criterion) {
                if (!rep.stability) fail("no stability record");
                else {
                    if (x.corollary_inequality && rep.stability->corollary_inequality != *x.corollary_inequality) fail("corollary_inequality differs");
                    if (x.product_criterion && rep.stability->product_criterion != *x.product_criterion) fail("product_criterion differs");
                }
            }
        }
        const bool simulate = x.trace_matches || x.trace_not_matches || x.regime || x.final_state || x.antiphase || x.monotone_dwell;
        if (simulate) {
            const auto x0 = resolve_x0(g.config, sys);
            std::optional<std::vector<BinaryPattern>> cycle;
            if (x.trace_matches) cycle = pattern_cycle(CycleMatrix(*x.trace_matches));
            auto [traj, trace] = simulate_until_determined(sys.spec, x0, g.config.integrator, g.config.threshold,
                                                           cycle ? &*cycle : nullptr, x.periods);
            res.details["trace"] = to_json(trace);
            res.details["t_end"] = traj.times.back();
            if (x.trace_matches) {
                const auto m = matches_cycle(trace, *cycle, x.periods);
                if (!m.matched()) fail(std::string("trace does not follow the expected cycle: ") + to_string(m.status) + " " + m.reason);
                else if (trace.visits.size() < x.periods * cycle->size())
                    fail("fewer than " + std::to_string(x.periods) + " periods observed");
            }
            if (x.trace_not_matches) {
                const auto m = matches_cycle(trace, CycleMatrix(*x.trace_not_matches), x.periods);
                if (m.status != MatchStatus::mismatch) fail(std::string("trace unexpectedly ") + to_string(m.status) + " against the excluded cycle");
            }
            if (x.regime && trace.asymptotics != *x.regime)
                fail(std::string("regime ") + to_string(trace.asymptotics) + ", expected " + to_string(*x.regime));
            if (x.final_state) {
                const auto& xf = traj.final_state();
                double d = 0.0;
                for (std::size_t i = 0; i < xf.size() && i < x.final_state->size(); ++i) d = std::max(d, std::abs(xf[i] - (*x.final_state)[i]));
                if (xf.size() != x.final_state->size() || !(d < x.final_tolerance))
                    fail("final state is " + std::to_string(d) + " from the expected state");
            }
            if (x.antiphase) {
                auto first_violation = [&]() -> std::optional<std::string> {
                    for (const auto& v : trace.visits)
                        for (std::size_t a = 0; a + 1 < x.antiphase->size(); ++a) {
                            const auto i = static_cast<std::size_t>((*x.antiphase)[a] - 1);
                            const auto j = static_cast<std::size_t>((*x.antiphase)[a + 1] - 1);
                            if (i >= v.pattern.size() || j >= v.pattern.size() || v.pattern[i] != -v.pattern[j])
                                return "coordinates " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                                       " not opposite at visit " + to_sign_string(v.pattern);
                        }
                    return std::nullopt;
                };
                if (auto msg = first_violation()) fail(*msg);
            }
            if (x.monotone_dwell) {
                const double resolution = 2.0 * g.config.integrator.dt * static_cast<double>(g.config.integrator.stride);
                const std::size_t period = cycle ? cycle->size() : trace.diagnostics.visit_period.value_or(1);
                if (trace.closed_visits() < 1 + period + 4) fail("too few visits to judge dwell growth");
                else if (!dwell_non_decreasing(trace, period, 1, resolution)) fail("dwell times decrease");
            }
        }
    } catch (const Error& e) {
        fail(std::string("error: ") + e.what());
    }
    return res;
}

inline std::vector<GoldenResult> run_goldens(const std::vector<GoldenCase>& cases, std::size_t workers = 1) {
    std::vector<GoldenResult> out(cases.size());
    parallel_for(cases.size(), workers, [&](std::size_t i) { out[i] = run_golden(cases[i]); });
    return out;
}

} // namespace hopcycle
