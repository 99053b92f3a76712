#pragma once

// JSON rendering of results and the run configuration shared by the CLI and
// the golden suite. Rationals are written as "num/den" strings, polynomials as
// coefficient arrays (constant term first).

#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cyclo.hpp"
#include "stability.hpp"
#include "trace.hpp"

namespace hopcycle {

using Json = nlohmann::ordered_json;

inline Json to_json(const Rational& r) { return to_string(r); }

inline Json to_json(const RationalVector& v) {
    Json a = Json::array();
    for (const auto& r : v) a.push_back(to_string(r));
    return a;
}

inline Json to_json(const RationalMatrix& m) {
    Json a = Json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) a.push_back(to_json(m.row(i)));
    return a;
}

inline Json to_json(const RationalPoly& f) { return to_json(f.coefficients()); }

inline Json signs_json(const std::vector<int>& v) { return to_sign_string(v); }
inline Json signs_json(const BinaryPattern& v) { return to_sign_string(v); }

inline Json to_json(const CycleMatrix& s) {
    Json rows = Json::array();
    for (std::size_t j = 0; j < s.neurons(); ++j) rows.push_back(to_sign_string(s.row(j)));
    return rows;
}

inline Json to_json(const CouplingMatrix& J) {
    Json o;
    o["form"] = J.form == CouplingForm::companion ? "companion" : "general";
    if (J.companion_row) o["companion_row"] = to_json(*J.companion_row);
    o["J"] = to_json(J.J);
    return o;
}

inline Json to_json(const StabilityReport& s) {
    return Json{{"contracting_product", s.contracting_product},
                {"expanding_product", s.expanding_product},
                {"product_criterion_value", s.product_ratio},
                {"product_criterion", s.product_criterion},
                {"corollary_bound", s.corollary_bound},
                {"corollary_inequality", s.corollary_inequality},
                {"verdict", to_string(s.verdict)}};
}

inline Json to_json(const VertexAnalysis& v) {
    Json o;
    o["vertex"] = signs_json(v.vertex);
    o["eigenvalues"] = v.eigenvalues;
    Json u = Json::array();
    for (auto k : v.unstable_indices) u.push_back(k + 1);
    o["unstable_directions"] = u;
    o["image"] = signs_json(v.image);
    o["switches"] = v.switches;
    return o;
}

inline Json to_json(const PredictionReport& r) {
    Json o;
    o["eta"] = to_sign_string(r.eta);
    o["n"] = r.n;
    o["lambda"] = r.params.lambda;
    o["c0"] = r.params.c0;
    o["q"] = r.params.regularization.q;
    o["rank_sigma"] = r.rank_sigma;
    o["dim_w"] = r.dim_w;
    o["admissible"] = r.admissible;
    o["companion_row"] = r.companion_row ? to_json(*r.companion_row) : Json(nullptr);
    o["companion_rule"] = r.companion_rule ? Json(to_string(*r.companion_rule)) : Json(nullptr);
    o["cond_signes"] = r.cond_signes;
    o["adjacent_switches"] = r.adjacent_switches;
    o["degenerate"] = r.degenerate;
    o["cycle_type"] = to_string(r.cycle_type);
    if (r.edge_conditions) o["edge_conditions"] = {{"lower", r.edge_conditions->lower}, {"upper", r.edge_conditions->upper}};
    else o["edge_conditions"] = nullptr;
    o["stability"] = r.stability ? to_json(*r.stability) : Json(nullptr);
    Json vs = Json::array();
    for (const auto& v : r.vertices) vs.push_back(to_json(v));
    o["vertices"] = vs;
    Json cs = Json::array();
    for (const auto& c : r.connections) {
        Json f = Json::array();
        for (auto k : c.flipped) f.push_back(k + 1);
        cs.push_back({{"from", c.from}, {"to", c.to}, {"flipped", f}, {"kind", to_string(c.kind)}, {"matches_unstable", c.matches_unstable}});
    }
    o["connections"] = cs;
    o["notes"] = r.notes;
    return o;
}

inline Json cyclo_diagnostics(const GeneratorVector& eta) {
    const auto cert = annihilator_certificate(eta);
    return {{"minimal_annihilator", to_json(cert.annihilator)},
            {"minimal_annihilator_text", to_string(cert.annihilator)},
            {"cyclotomic_indices", cert.cyclotomic_indices},
            {"degree", cert.degree}};
}

inline Json to_json(const MatchResult& m) {
    Json o{{"status", to_string(m.status)}};
    if (m.match) o["offset"] = m.match->offset, o["compared"] = m.match->compared;
    if (!m.reason.empty()) o["reason"] = m.reason;
    return o;
}

inline Json to_json(const TraceResult& t) {
    Json o;
    o["threshold"] = t.threshold;
    Json visits = Json::array();
    for (const auto& v : t.visits)
        visits.push_back({{"pattern", signs_json(v.pattern)}, {"first_time", v.first_time}, {"dwell", v.dwell}});
    o["visits"] = visits;
    o["final_visit_open"] = t.final_visit_open;
    o["asymptotics"] = to_string(t.asymptotics);
    o["asymptotics_note"] = "numerical verdict: a heteroclinic approach and a long-period orbit are indistinguishable over a finite run";
    const auto& d = t.diagnostics;
    o["diagnostics"] = {{"dwell_ratio", d.dwell_ratio ? Json(*d.dwell_ratio) : Json(nullptr)},
                        {"period_estimate", d.period_estimate ? Json(*d.period_estimate) : Json(nullptr)},
                        {"visit_period", d.visit_period ? Json(*d.visit_period) : Json(nullptr)},
                        {"tail_max_speed", d.tail_max_speed},
                        {"final_vertex_distance", d.final_vertex_distance}};
    if (t.matched_cycle) o["matched_cycle"] = to_json(*t.matched_cycle);
    return o;
}

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
    std::optional<std::string> eta;
    std::optional<std::size_t> n;
    Formulation formulation = Formulation::tanh_cube;
    double lambda = 8.0;
    double c0 = 0.6;
    double input_I = 0.0;
    std::optional<RegularizationKind> regularization; ///< default follows the formulation
    int q = 9;
    double eps = 0.12;
    std::optional<std::vector<std::vector<double>>> coupling; ///< explicit J instead of learning
    IntegratorSettings integrator;
    std::string x0 = "near-vertex"; ///< near-vertex, near-vertex:<pattern>, random:<seed>, or a list of numbers
    std::optional<State> x0_values;
    double threshold = 0.5;
    std::optional<std::string> out;

    RegularizationSpec regularization_spec() const {
        auto kind = regularization.value_or(formulation == Formulation::tanh_cube ? RegularizationKind::arctanh_taylor
                                                                                  : RegularizationKind::logit_epsilon);
        switch (kind) {
        case RegularizationKind::arctanh_taylor: return RegularizationSpec::arctanh_taylor(q);
        case RegularizationKind::logit_taylor: return RegularizationSpec::logit_taylor(q);
        case RegularizationKind::logit_epsilon: return RegularizationSpec::logit_epsilon(eps);
        }
        throw ConfigError("unknown regularization");
    }

    ModelParams model_params() const {
        ModelParams p{lambda, c0, input_I, regularization_spec()};
        p.validate();
        return p;
    }

    GeneratorVector generator() const {
        if (!eta) throw ConfigError("eta: required");
        try {
            return parse_generator(*eta);
        } catch (const Error& e) {
            throw ConfigError(std::string("eta: ") + e.what());
        }
    }

    std::size_t neurons() const {
        if (!n) throw ConfigError("n: required");
        return *n;
    }
};

inline Formulation parse_formulation(const std::string& s) {
    if (s == "tanh") return Formulation::tanh_cube;
    if (s == "logistic") return Formulation::logistic_cube;
    throw ConfigError("formulation: expected tanh or logistic, got '" + s + "'");
}

inline RegularizationKind parse_regularization(const std::string& s) {
    if (s == "arctanh_taylor") return RegularizationKind::arctanh_taylor;
    if (s == "logit_taylor") return RegularizationKind::logit_taylor;
    if (s == "logit_epsilon") return RegularizationKind::logit_epsilon;
    throw ConfigError("regularization: expected arctanh_taylor, logit_taylor or logit_epsilon, got '" + s + "'");
}

namespace detail {
inline void reject_unknown(const Json& obj, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [key, value] : obj.items())
        if (!known.count(key)) throw ConfigError(where + key + ": unknown field");
}

template <class T>
T field(const Json& obj, const char* key, const std::string& where) {
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(where + key + ": wrong type");
    }
}

inline std::vector<std::vector<double>> parse_matrix(const Json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty array of rows");
    std::vector<std::vector<double>> out;
    for (const auto& row : j) {
        if (!row.is_array()) throw ConfigError(where + ": rows must be arrays");
        std::vector<double> r;
        for (const auto& v : row) {
            if (v.is_number()) r.push_back(v.get<double>());
            else if (v.is_string()) {
                try {
                    r.push_back(to_double(parse_rational(v.get<std::string>())));
                } catch (const Error& e) {
                    throw ConfigError(where + ": " + e.what());
                }
            } else throw ConfigError(where + ": entries must be numbers or rational strings");
        }
        out.push_back(std::move(r));
    }
    return out;
}
} // namespace detail

/// Fields present in `j` override those already in `base`. Unknown fields are rejected.
inline RunConfig parse_run_config(const Json& j, RunConfig cfg = {}) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    detail::reject_unknown(j, {"eta", "n", "formulation", "lambda", "c0", "I", "regularization", "q", "eps", "coupling",
                               "integrator", "x0", "threshold", "out"}, "");
    const std::string w;
    if (j.contains("eta")) cfg.eta = detail::field<std::string>(j, "eta", w);
    if (j.contains("n")) {
        const auto v = detail::field<long long>(j, "n", w);
        if (v < 1) throw ConfigError("n: must be >= 1");
        cfg.n = static_cast<std::size_t>(v);
    }
    if (j.contains("formulation")) cfg.formulation = parse_formulation(detail::field<std::string>(j, "formulation", w));
    if (j.contains("lambda")) cfg.lambda = detail::field<double>(j, "lambda", w);
    if (j.contains("c0")) cfg.c0 = detail::field<double>(j, "c0", w);
    if (j.contains("I")) cfg.input_I = detail::field<double>(j, "I", w);
    if (j.contains("regularization")) cfg.regularization = parse_regularization(detail::field<std::string>(j, "regularization", w));
    if (j.contains("q")) cfg.q = detail::field<int>(j, "q", w);
    if (j.contains("eps")) cfg.eps = detail::field<double>(j, "eps", w);
    if (j.contains("coupling")) cfg.coupling = detail::parse_matrix(j["coupling"], "coupling");
    if (j.contains("integrator")) {
        const auto& ij = j["integrator"];
        if (!ij.is_object()) throw ConfigError("integrator: expected an object");
        detail::reject_unknown(ij, {"dt", "t_end", "stride", "face_floor"}, "integrator.");
        const std::string iw = "integrator.";
        if (ij.contains("dt")) cfg.integrator.dt = detail::field<double>(ij, "dt", iw);
        if (ij.contains("t_end")) cfg.integrator.t_end = detail::field<double>(ij, "t_end", iw);
        if (ij.contains("stride")) cfg.integrator.stride = detail::field<std::size_t>(ij, "stride", iw);
        if (ij.contains("face_floor")) cfg.integrator.face_floor = detail::field<double>(ij, "face_floor", iw);
    }
    if (j.contains("x0")) {
        const auto& x = j["x0"];
        if (x.is_string()) {
            cfg.x0 = x.get<std::string>();
            cfg.x0_values.reset();
        } else if (x.is_array()) {
            State v;
            for (const auto& e : x) {
                if (!e.is_number()) throw ConfigError("x0: entries must be numbers");
                v.push_back(e.get<double>());
            }
            cfg.x0 = "explicit";
            cfg.x0_values = std::move(v);
        } else {
            throw ConfigError("x0: expected a policy string or a list of numbers");
        }
    }
    if (j.contains("threshold")) cfg.threshold = detail::field<double>(j, "threshold", w);
    if (j.contains("out")) cfg.out = detail::field<std::string>(j, "out", w);
    return cfg;
}

/// Parses a config file; syntax errors report line and column.
inline RunConfig load_run_config(const std::string& path, RunConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') ++line, col = 1;
            else ++col;
        }
        throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
    }
    return parse_run_config(j, std::move(base));
}

inline Json to_json(const RunConfig& c) {
    Json o;
    if (c.eta) o["eta"] = *c.eta;
    if (c.n) o["n"] = *c.n;
    o["formulation"] = to_string(c.formulation);
    o["lambda"] = c.lambda;
    o["c0"] = c.c0;
    o["I"] = c.input_I;
    o["regularization"] = to_string(c.regularization_spec().kind);
    o["q"] = c.q;
    o["eps"] = c.eps;
    if (c.coupling) o["coupling"] = *c.coupling;
    Json integ{{"dt", c.integrator.dt}, {"t_end", c.integrator.t_end}, {"stride", c.integrator.stride}};
    if (c.integrator.face_floor) integ["face_floor"] = *c.integrator.face_floor;
    o["integrator"] = integ;
    if (c.x0_values) o["x0"] = *c.x0_values;
    else o["x0"] = c.x0;
    o["threshold"] = c.threshold;
    if (c.out) o["out"] = *c.out;
    return o;
}

/// The system a config describes. Without an explicit coupling the tanh form
/// learns J from (eta, n).
struct ResolvedSystem {
    SystemSpec spec;
    std::optional<CycleMatrix> sigma;
    std::optional<CouplingMatrix> coupling;
};

inline ResolvedSystem resolve_system(const RunConfig& cfg) {
    ResolvedSystem out{{cfg.formulation, {}, cfg.model_params()}, std::nullopt, std::nullopt};
    if (cfg.eta && cfg.n) out.sigma = build_consecutive_sigma(cfg.generator(), *cfg.n);
    if (cfg.coupling) {
        out.spec.J = *cfg.coupling;
    } else {
        if (!out.sigma) throw ConfigError("coupling: give an explicit matrix or both eta and n");
        out.coupling = solve_learning(*out.sigma);
        out.spec.J = out.coupling->to_doubles();
    }
    try {
        out.spec.validate();
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return out;
}

/// Initial state from the x0 policy. "near-vertex" alone uses the first
/// column of Sigma.
inline State resolve_x0(const RunConfig& cfg, const ResolvedSystem& sys) {
    const std::size_t n = sys.spec.n();
    if (cfg.x0_values) {
        if (cfg.x0_values->size() != n) throw ConfigError("x0: expected " + std::to_string(n) + " values");
        return *cfg.x0_values;
    }
    const std::string& p = cfg.x0;
    if (p == "near-vertex") {
        if (!sys.sigma) throw ConfigError("x0: near-vertex without a pattern needs eta and n");
        return near_vertex(sys.sigma->column(0).entries(), cfg.formulation);
    }
    if (p.rfind("near-vertex:", 0) == 0) {
        std::vector<int> signs;
        try {
            signs = parse_sign_string(p.substr(12));
        } catch (const Error& e) {
            throw ConfigError(std::string("x0: ") + e.what());
        }
        if (signs.size() != n) throw ConfigError("x0: pattern length differs from the network size");
        return near_vertex(signs, cfg.formulation);
    }
    if (p.rfind("random:", 0) == 0) {
        unsigned long long seed = 0;
        try {
            seed = std::stoull(p.substr(7));
        } catch (const std::exception&) {
            throw ConfigError("x0: bad seed in '" + p + "'");
        }
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(sys.spec.lower(), sys.spec.upper());
        State x(n);
        for (auto& v : x) {
            do v = u(rng);
            while (v == sys.spec.lower());
        }
        return x;
    }
    throw ConfigError("x0: unknown policy '" + p + "'");
}

} // namespace hopcycle
