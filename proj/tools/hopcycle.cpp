// Command-line front end: learn, classify, simulate, verify, enumerate,
// sweep and golden.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hopcycle/hopcycle.hpp"

#ifndef HOPCYCLE_GOLDEN_DIR
#define HOPCYCLE_GOLDEN_DIR "goldens"
#endif

using namespace hopcycle;

namespace {

enum Exit { ok = 0, failure = 1, config_error = 2, not_admissible = 3, integration_failure = 4 };

struct Flags {
    std::string eta, formulation, regularization, x0, out, config;
    long long n = 0;
    double lambda = 0, c0 = 0, eps = 0, input_I = 0, dt = 0, t_end = 0, threshold = 0, face_floor = 0;
    int q = 0;
    std::size_t stride = 1, workers = 1;
    bool text = false;
};

struct Registered {
    CLI::App* app;
    std::vector<std::pair<CLI::Option*, std::string>> keyed; ///< option -> config key
    CLI::Option *dt = nullptr, *t_end = nullptr, *stride = nullptr, *face_floor = nullptr, *config = nullptr;
};

Registered add_model_flags(CLI::App* app, Flags& f) {
    Registered r{app, {}};
    r.keyed.emplace_back(app->add_option("--eta", f.eta, "generator sign string, e.g. +++---"), "eta");
    r.keyed.emplace_back(app->add_option("--n", f.n, "number of neurons"), "n");
    r.keyed.emplace_back(app->add_option("--lambda", f.lambda, "gain"), "lambda");
    r.keyed.emplace_back(app->add_option("--c0", f.c0, "self-coupling share, 0 <= c0 < 1"), "c0");
    r.keyed.emplace_back(app->add_option("--q", f.q, "Taylor truncation degree"), "q");
    r.keyed.emplace_back(app->add_option("--eps", f.eps, "logit shift"), "eps");
    r.keyed.emplace_back(app->add_option("--I", f.input_I, "constant input (logistic form)"), "I");
    r.keyed.emplace_back(app->add_option("--formulation", f.formulation, "tanh or logistic")
                             ->check(CLI::IsMember({"tanh", "logistic"})), "formulation");
    r.keyed.emplace_back(app->add_option("--regularization", f.regularization, "arctanh_taylor, logit_taylor or logit_epsilon"),
                         "regularization");
    r.keyed.emplace_back(app->add_option("--x0", f.x0, "near-vertex, near-vertex:<pattern> or random:<seed>"), "x0");
    r.keyed.emplace_back(app->add_option("--threshold", f.threshold, "commitment threshold"), "threshold");
    r.keyed.emplace_back(app->add_option("--out", f.out, "output file (default stdout)"), "out");
    r.dt = app->add_option("--dt", f.dt, "RK4 step");
    r.t_end = app->add_option("--t-end", f.t_end, "integration horizon");
    r.stride = app->add_option("--stride", f.stride, "keep every k-th step");
    r.face_floor = app->add_option("--face-floor", f.face_floor, "minimum distance kept from the cube faces");
    r.config = app->add_option("--config", f.config, "JSON run config; its fields override flags");
    app->add_option("--workers", f.workers, "worker threads for enumerate, sweep and golden");
    app->add_flag("--text", f.text, "human-readable output instead of JSON");
    return r;
}

/// Flags the user set, as a config object; the config file then overrides them.
RunConfig build_config(const Registered& r, const Flags& f) {
    Json j = Json::object();
    for (const auto& [opt, key] : r.keyed) {
        if (opt->count() == 0) continue;
        if (key == "eta") j[key] = f.eta;
        else if (key == "n") j[key] = f.n;
        else if (key == "lambda") j[key] = f.lambda;
        else if (key == "c0") j[key] = f.c0;
        else if (key == "q") j[key] = f.q;
        else if (key == "eps") j[key] = f.eps;
        else if (key == "I") j[key] = f.input_I;
        else if (key == "formulation") j[key] = f.formulation;
        else if (key == "regularization") j[key] = f.regularization;
        else if (key == "x0") j[key] = f.x0;
        else if (key == "threshold") j[key] = f.threshold;
        else if (key == "out") j[key] = f.out;
    }
    Json integ = Json::object();
    if (r.dt->count()) integ["dt"] = f.dt;
    if (r.t_end->count()) integ["t_end"] = f.t_end;
    if (r.stride->count()) integ["stride"] = f.stride;
    if (r.face_floor->count()) integ["face_floor"] = f.face_floor;
    if (!integ.empty()) j["integrator"] = integ;
    auto cfg = parse_run_config(j);
    if (r.config->count()) cfg = load_run_config(f.config, cfg);
    return cfg;
}

/// Writes to cfg.out when set, else stdout.
void emit(const std::optional<std::string>& out, const std::string& text) {
    if (out) {
        std::ofstream f(*out);
        if (!f) throw ConfigError("out: cannot write '" + *out + "'");
        f << text;
    } else {
        std::cout << text;
    }
}

std::string render_matrix(const RationalMatrix& m) {
    std::vector<std::vector<std::string>> cells(m.rows());
    std::size_t width = 1;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) {
            cells[i].push_back(to_string(m(i, j)));
            width = std::max(width, cells[i].back().size());
        }
    std::ostringstream os;
    for (const auto& row : cells) {
        os << "  [";
        for (std::size_t j = 0; j < row.size(); ++j) os << (j ? " " : "") << std::setw(static_cast<int>(width)) << row[j];
        os << "]\n";
    }
    return os.str();
}

std::string render_prediction(const PredictionReport& r) {
    std::ostringstream os;
    os << "eta " << to_sign_string(r.eta) << ", n = " << r.n << ", lambda = " << r.params.lambda << ", c0 = " << r.params.c0
       << ", q = " << r.params.regularization.q << "\n";
    os << "admissible: " << (r.admissible ? "yes" : "no") << " (rank Sigma = " << r.rank_sigma << ", dim W = " << r.dim_w << ")\n";
    if (r.companion_row) {
        os << "companion row:";
        for (const auto& a : *r.companion_row) os << ' ' << to_string(a);
        os << " (" << to_string(*r.companion_rule) << ")\n";
    }
    os << "cond_signes: " << (r.cond_signes ? "holds" : "fails") << ", adjacent switches: " << (r.adjacent_switches ? "yes" : "no") << "\n";
    for (const auto& v : r.vertices) {
        os << "  " << to_sign_string(v.vertex) << "  sigma =";
        for (double s : v.eigenvalues) os << ' ' << std::setprecision(6) << s;
        os << "\n";
    }
    for (const auto& c : r.connections) {
        os << "  " << c.from << " -> " << c.to << "  " << to_string(c.kind) << " (flips";
        for (auto k : c.flipped) os << " x" << k + 1;
        os << ")\n";
    }
    os << "cycle type: " << to_string(r.cycle_type) << "\n";
    if (r.stability)
        os << "product criterion: " << r.stability->product_ratio << (r.stability->product_criterion ? " > 1, stable" : " <= 1, not stable")
           << "; corollary inequality lambda < " << r.stability->corollary_bound << ": " << (r.stability->corollary_inequality ? "true" : "false") << "\n";
    for (const auto& note : r.notes) os << "note: " << note << "\n";
    return os.str();
}

int cmd_learn(const RunConfig& cfg, bool text) {
    const auto eta = cfg.generator();
    const auto sigma = build_consecutive_sigma(eta, cfg.neurons());
    const auto J = solve_learning(sigma);
    const auto sol = companion_solution(eta, cfg.neurons());
    Json o;
    o["eta"] = to_sign_string(eta);
    o["n"] = cfg.neurons();
    o["sigma"] = to_json(sigma);
    o["rank_sigma"] = rank(RationalMatrix::from_cycle(sigma));
    o["dim_w"] = shift_span_dimension(eta);
    o["companion_rule"] = to_string(sol.rule);
    o["coupling"] = to_json(J);
    o["residual_zero"] = learning_residual(J.J, sigma).is_zero();
    if (text) {
        std::ostringstream os;
        os << "J for eta " << to_sign_string(eta) << ", n = " << cfg.neurons() << " (" << to_string(sol.rule) << "):\n" << render_matrix(J.J);
        emit(cfg.out, os.str());
    } else {
        emit(cfg.out, o.dump(2) + "\n");
    }
    return ok;
}

int cmd_classify(const RunConfig& cfg, bool text) {
    const auto eta = cfg.generator();
    const auto rep = predict_cycle(eta, cfg.neurons(), cfg.model_params());
    if (text) {
        emit(cfg.out, render_prediction(rep));
        return ok;
    }
    auto o = to_json(rep);
    o["cyclotomic"] = cyclo_diagnostics(eta);
    emit(cfg.out, o.dump(2) + "\n");
    return ok;
}

int cmd_simulate(const RunConfig& cfg) {
    const auto sys = resolve_system(cfg);
    const auto traj = integrate(sys.spec, resolve_x0(cfg, sys), cfg.integrator);
    std::ostringstream os;
    write_trajectory_csv(os, traj);
    emit(cfg.out, os.str());
    if (traj.clip_count) std::cerr << "clip events: " << traj.clip_count << "\n";
    return ok;
}

int cmd_verify(const RunConfig& cfg, bool text) {
    const auto v = run_verify(cfg);
    if (text) {
        std::ostringstream os;
        if (v.prediction) os << render_prediction(*v.prediction);
        os << "visits:";
        for (const auto& vis : v.trace.visits) os << ' ' << to_sign_string(vis.pattern);
        os << "\nasymptotics: " << to_string(v.trace.asymptotics) << " (numerical verdict)\n";
        if (v.match) os << "trace vs Sigma: " << to_string(v.match->status) << "\n";
        os << "agreement: " << (v.agreement ? (*v.agreement ? "true" : "false") : "undetermined") << "\n";
        emit(cfg.out, os.str());
    } else {
        emit(cfg.out, to_json(v).dump(2) + "\n");
    }
    return ok;
}

int cmd_enumerate(const RunConfig& cfg, std::size_t p, std::optional<std::size_t> n, std::size_t workers) {
    const auto rows = enumerate_cycles(p, n, cfg.model_params(), workers);
    std::ostringstream os;
    os << "eta,n,rank_sigma,dim_w,admissible,adjacent_switches,companion_row,cycle_type\n";
    for (const auto& r : rows) {
        os << r.eta << ',' << r.n << ',' << r.rank_sigma << ',' << r.dim_w << ',' << (r.admissible ? "true" : "false") << ','
           << (r.adjacent_switches ? "true" : "false") << ',';
        if (r.companion_row)
            for (std::size_t i = 0; i < r.companion_row->size(); ++i) os << (i ? " " : "") << to_string((*r.companion_row)[i]);
        os << ',' << to_string(r.cycle_type) << '\n';
    }
    emit(cfg.out, os.str());
    return ok;
}

int cmd_sweep(const RunConfig& cfg, const std::string& param, const std::vector<double>& grid, std::size_t workers) {
    const auto sys = resolve_system(cfg);
    SweepSettings s{resolve_x0(cfg, sys), cfg.integrator, cfg.threshold, {}, workers};
    SweepTable table = param == "eps" ? sweep_epsilon(sys.spec, grid, s) : sweep_lambda(sys.spec, grid, s);
    std::ostringstream os;
    write_sweep_csv(os, table);
    emit(cfg.out, os.str());
    for (const auto& b : table.boundaries)
        std::cerr << "boundary " << to_string(b.below) << " -> " << to_string(b.above) << " in [" << b.lower << ", " << b.upper << "]\n";
    for (const auto& r : table.rows)
        if (r.error) std::cerr << "cell " << r.value << " failed: " << *r.error << "\n";
    return ok;
}

int cmd_golden(const std::string& dir, const std::string& only, std::size_t workers, bool json) {
    std::vector<GoldenCase> cases;
    for (const auto& path : golden_files(dir)) {
        auto g = load_golden(path);
        if (only.empty() || g.name == only) cases.push_back(std::move(g));
    }
    if (cases.empty()) throw ConfigError("golden: no cases in '" + dir + "'" + (only.empty() ? "" : " named '" + only + "'"));
    const auto results = run_goldens(cases, workers);
    bool all = true;
    Json arr = Json::array();
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        all = all && r.passed;
        if (json) {
            arr.push_back({{"name", r.name}, {"figure", cases[i].figure}, {"passed", r.passed}, {"diffs", r.diffs}, {"details", r.details}});
            continue;
        }
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
        if (!cases[i].figure.empty()) std::cout << "  (" << cases[i].figure << ")";
        std::cout << "\n";
        for (const auto& d : r.diffs) std::cout << "     " << d << "\n";
    }
    if (json) std::cout << arr.dump(2) << "\n";
    return all ? ok : failure;
}

void report_error(const char* kind, const std::string& message, int code) {
    Json e{{"error", kind}, {"message", message}, {"exit_code", code}};
    std::cerr << e.dump() << std::endl;
}

std::vector<double> parse_grid(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("grid: bad value '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError("grid: empty");
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hopfield heteroclinic cycle toolkit"};
    app.require_subcommand(1);
    Flags f;

    auto learn = add_model_flags(app.add_subcommand("learn", "coupling matrix J solving J Sigma = Sigma P"), f);
    auto classify = add_model_flags(app.add_subcommand("classify", "predict the heteroclinic cycle type"), f);
    auto simulate = add_model_flags(app.add_subcommand("simulate", "integrate and write a trajectory CSV"), f);
    auto verify = add_model_flags(app.add_subcommand("verify", "prediction, simulation and their agreement"), f);
    auto enumerate = add_model_flags(app.add_subcommand("enumerate", "all generators of period p up to rotation and sign"), f);
    auto sweep = add_model_flags(app.add_subcommand("sweep", "regime table over an eps or lambda grid"), f);
    auto golden = app.add_subcommand("golden", "run the golden reproduction cases");

    std::size_t p = 0;
    enumerate.app->add_option("--p", p, "period")->required();
    std::string param = "eps", grid_text;
    sweep.app->add_option("--param", param, "eps or lambda")->check(CLI::IsMember({"eps", "lambda"}));
    sweep.app->add_option("--grid", grid_text, "comma-separated values")->required();
    std::string golden_dir = HOPCYCLE_GOLDEN_DIR, golden_case;
    bool golden_json = false;
    golden->add_option("--dir", golden_dir, "directory of case files");
    golden->add_option("--case", golden_case, "run only this case");
    golden->add_option("--workers", f.workers, "worker threads");
    golden->add_flag("--json", golden_json, "JSON report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error("usage", e.what(), config_error);
        return config_error;
    }

    try {
        if (*golden) return cmd_golden(golden_dir, golden_case, f.workers, golden_json);
        for (const auto* r : {&learn, &classify, &simulate, &verify, &enumerate, &sweep}) {
            if (!r->app->parsed()) continue;
            const auto cfg = build_config(*r, f);
            if (r == &learn) return cmd_learn(cfg, f.text);
            if (r == &classify) return cmd_classify(cfg, f.text);
            if (r == &simulate) return cmd_simulate(cfg);
            if (r == &verify) return cmd_verify(cfg, f.text);
            if (r == &enumerate) return cmd_enumerate(cfg, p, cfg.n, f.workers);
            if (r == &sweep) return cmd_sweep(cfg, param, parse_grid(grid_text), f.workers);
        }
    } catch (const NotAdmissible& e) {
        report_error("not_admissible", e.what(), not_admissible);
        return not_admissible;
    } catch (const IntegrationFailure& e) {
        report_error("integration_failure", e.what(), integration_failure);
        return integration_failure;
    } catch (const ConfigError& e) {
        report_error("config", e.what(), config_error);
        return config_error;
    } catch (const InvalidArgument& e) {
        report_error("config", e.what(), config_error);
        return config_error;
    } catch (const InvalidDimension& e) {
        report_error("config", e.what(), config_error);
        return config_error;
    } catch (const DomainError& e) {
        report_error("config", e.what(), config_error);
        return config_error;
    } catch (const std::exception& e) {
        report_error("internal", e.what(), failure);
        return failure;
    }
    return failure;
}
