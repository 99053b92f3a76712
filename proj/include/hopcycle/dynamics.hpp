#pragma once

// Firing-rate right-hand sides, regularized inverse firing functions,
// fixed-point solves and a fixed-step RK4 integrator on the state cube.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "error.hpp"
#include "ratlinalg.hpp"

namespace hopcycle {

using State = std::vector<double>;

enum class RegularizationKind { arctanh_taylor, logit_taylor, logit_epsilon };

inline const char* to_string(RegularizationKind k) {
    switch (k) {
    case RegularizationKind::arctanh_taylor: return "arctanh_taylor";
    case RegularizationKind::logit_taylor: return "logit_taylor";
    case RegularizationKind::logit_epsilon: return "logit_epsilon";
    }
    return "?";
}

struct RegularizationSpec {
    RegularizationKind kind = RegularizationKind::arctanh_taylor;
    int q = 9;          ///< truncation degree for the Taylor kinds
    double eps = 0.12;  ///< shift for logit_epsilon

    static RegularizationSpec arctanh_taylor(int q) {
        if (q < 1 || q % 2 == 0) throw InvalidArgument("arctanh_taylor: q must be odd and >= 1");
        return {RegularizationKind::arctanh_taylor, q, 0.0};
    }
    static RegularizationSpec logit_taylor(int q) {
        if (q < 1) throw InvalidArgument("logit_taylor: q must be >= 1");
        return {RegularizationKind::logit_taylor, q, 0.0};
    }
    static RegularizationSpec logit_epsilon(double eps) {
        if (!(eps > 0)) throw InvalidArgument("logit_epsilon: eps must be > 0");
        return {RegularizationKind::logit_epsilon, 0, eps};
    }
};

/// x + x^3/3 + ... + x^q/q
inline double f_arctanh_taylor(double x, int q) {
    if (q < 1 || q % 2 == 0) throw InvalidArgument("f_arctanh_taylor: q must be odd and >= 1");
    const double x2 = x * x;
    double term = x, sum = 0.0;
    for (int k = 1; k <= q; k += 2) {
        sum += term / k;
        term *= x2;
    }
    return sum;
}

/// ln((x + eps) / (1 + eps - x)), defined on (-eps, 1 + eps).
inline double f_logit_epsilon(double x, double eps) {
    if (!(eps > 0)) throw InvalidArgument("f_logit_epsilon: eps must be > 0");
    if (!(x > -eps && x < 1.0 + eps))
        throw DomainError("f_logit_epsilon: x = " + std::to_string(x) + " outside (-eps, 1+eps)");
    return std::log((x + eps) / (1.0 + eps - x));
}

/// Degree-q Taylor polynomial of ln(x / (1 - x)) about 1/2. The k-th
/// derivative of the logit at 1/2 is 2^(k+1) (k-1)! for odd k and 0 for even
/// k, so the coefficient of (x - 1/2)^k is 2^(k+1) / k.
inline double f_logit_taylor(double x, int q) {
    if (q < 1) throw InvalidArgument("f_logit_taylor: q must be >= 1");
    const double h = x - 0.5;
    const double h2 = h * h;
    double power = h, scale = 4.0, sum = 0.0;
    for (int k = 1; k <= q; k += 2) {
        sum += scale * power / k;
        power *= h2;
        scale *= 4.0;
    }
    return sum;
}

inline double f_regularized(double x, const RegularizationSpec& reg) {
    switch (reg.kind) {
    case RegularizationKind::arctanh_taylor: return f_arctanh_taylor(x, reg.q);
    case RegularizationKind::logit_taylor: return f_logit_taylor(x, reg.q);
    case RegularizationKind::logit_epsilon: return f_logit_epsilon(x, reg.eps);
    }
    return 0.0;
}

/// Gain, self-coupling split c0 + c1 = 1, constant input and regularization.
struct ModelParams {
    double lambda = 8.0;
    double c0 = 0.6;
    double input_I = 0.0;
    RegularizationSpec regularization = RegularizationSpec::arctanh_taylor(9);

    double c1() const noexcept { return 1.0 - c0; }

    void validate() const {
        if (!(lambda > 0)) throw InvalidArgument("ModelParams: lambda must be > 0");
        if (!(c0 >= 0.0 && c0 < 1.0)) throw InvalidArgument("ModelParams: c0 must satisfy 0 <= c0 < 1");
    }
};

enum class Formulation {
    tanh_cube,     ///< state space [-1, 1]^n
    logistic_cube  ///< state space [0, 1]^n
};

inline const char* to_string(Formulation f) { return f == Formulation::tanh_cube ? "tanh" : "logistic"; }

struct SystemSpec {
    Formulation formulation = Formulation::tanh_cube;
    std::vector<std::vector<double>> J;
    ModelParams params;

    std::size_t n() const noexcept { return J.size(); }
    double lower() const noexcept { return formulation == Formulation::tanh_cube ? -1.0 : 0.0; }
    double upper() const noexcept { return 1.0; }

    void validate() const {
        if (J.empty()) throw InvalidDimension("SystemSpec: empty coupling matrix");
        for (const auto& row : J)
            if (row.size() != J.size()) throw InvalidDimension("SystemSpec: J must be square");
        params.validate();
        const auto kind = params.regularization.kind;
        if (formulation == Formulation::tanh_cube && kind != RegularizationKind::arctanh_taylor)
            throw InvalidArgument("tanh formulation requires the arctanh_taylor regularization");
        if (formulation == Formulation::logistic_cube && kind == RegularizationKind::arctanh_taylor)
            throw InvalidArgument("logistic formulation requires logit_taylor or logit_epsilon");
    }
};

inline SystemSpec make_tanh_system(const CouplingMatrix& J, ModelParams params) {
    SystemSpec s{Formulation::tanh_cube, J.to_doubles(), params};
    s.validate();
    return s;
}

namespace detail {
inline void require_dim(const State& x, const SystemSpec& spec) {
    if (x.size() != spec.n())
        throw InvalidDimension("state has dimension " + std::to_string(x.size()) + ", system has " + std::to_string(spec.n()));
}
inline double row_dot(const std::vector<double>& row, const State& x) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += row[j] * x[j];
    return s;
}
} // namespace detail

/// Bracketed factor of the vector field: dx_j/dt = g(x_j) * drive_j(x) with
/// g(x) = 1 - x^2 (tanh form) or x (1 - x) (logistic form).
inline void drive(const State& x, const SystemSpec& spec, State& out) {
    detail::require_dim(x, spec);
    const auto& p = spec.params;
    out.resize(x.size());
    if (spec.formulation == Formulation::tanh_cube) {
        const double lc0 = p.lambda * p.c0, lc1 = p.lambda * p.c1();
        for (std::size_t j = 0; j < x.size(); ++j)
            out[j] = lc0 * x[j] + lc1 * detail::row_dot(spec.J[j], x) - f_arctanh_taylor(x[j], p.regularization.q);
    } else {
        for (std::size_t i = 0; i < x.size(); ++i)
            out[i] = -p.lambda * f_regularized(x[i], p.regularization) - detail::row_dot(spec.J[i], x) + p.input_I;
    }
}

inline double face_factor(double x, Formulation f) noexcept { return f == Formulation::tanh_cube ? 1.0 - x * x : x * (1.0 - x); }

/// (1 - x_j^2) (lambda c0 x_j + lambda c1 (J x)_j - f_q(x_j))
inline void rhs_tanh(const State& x, const SystemSpec& spec, State& out) {
    if (spec.formulation != Formulation::tanh_cube) throw InvalidArgument("rhs_tanh: wrong formulation");
    drive(x, spec, out);
    for (std::size_t j = 0; j < x.size(); ++j) out[j] *= face_factor(x[j], spec.formulation);
}
inline State rhs_tanh(const State& x, const SystemSpec& spec) {
    State out;
    rhs_tanh(x, spec, out);
    return out;
}

/// x_i (1 - x_i) (-lambda f(x_i) - (J x)_i + I). J is used as given (unit diagonal included).
inline void rhs_logistic(const State& x, const SystemSpec& spec, State& out) {
    if (spec.formulation != Formulation::logistic_cube) throw InvalidArgument("rhs_logistic: wrong formulation");
    drive(x, spec, out);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] *= face_factor(x[i], spec.formulation);
}
inline State rhs_logistic(const State& x, const SystemSpec& spec) {
    State out;
    rhs_logistic(x, spec, out);
    return out;
}

inline void rhs(const State& x, const SystemSpec& spec, State& out) {
    if (spec.formulation == Formulation::tanh_cube) rhs_tanh(x, spec, out);
    else rhs_logistic(x, spec, out);
}
inline State rhs(const State& x, const SystemSpec& spec) {
    State out;
    rhs(x, spec, out);
    return out;
}

/// Positive root of lambda c0 beta = artanh(beta); none unless lambda c0 > 1.
inline std::optional<double> solve_beta_lambda(double lambda, double c0) {
    const double k = lambda * c0;
    if (!(k > 1.0)) return std::nullopt;
    // artanh(b)/b - k increases from 1 - k < 0 at b -> 0 to +inf at b -> 1.
    auto g = [k](double b) { return std::atanh(b) / b - k; };
    double lo = 0.0, hi = std::nextafter(1.0, 0.0);
    if (g(hi) <= 0) return hi;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < 0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Root in (0, 1) of -lambda f(rho) - rho + I = 0; none without a sign change.
inline std::optional<double> solve_rho(double lambda, double input_I, const RegularizationSpec& reg) {
    if (reg.kind == RegularizationKind::arctanh_taylor) throw InvalidArgument("solve_rho: needs a logistic-form regularization");
    auto h = [&](double r) { return -lambda * f_regularized(r, reg) - r + input_I; };
    double lo = 0.0, hi = 1.0;
    double hlo = h(lo), hhi = h(hi);
    if (hlo == 0) return lo;
    if (hhi == 0) return hi;
    if ((hlo > 0) == (hhi > 0)) return std::nullopt;
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double hm = h(mid);
        if (hm == 0) return mid;
        if ((hm > 0) == (hlo > 0)) {
            lo = mid;
            hlo = hm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

struct IntegratorSettings {
    double dt = 0.01;
    double t_end = 100.0;
    std::size_t stride = 1; ///< keep every stride-th step (the final step is always kept)
    /// Minimum distance kept from the faces of the cube for coordinates that
    /// do not start on a face. None selects the per-formulation default.
    std::optional<double> face_floor;

    double effective_face_floor(Formulation f) const {
        if (face_floor) return *face_floor;
        return f == Formulation::tanh_cube ? 1e-8 : 0.0;
    }
};

struct ClipEvent {
    double time;
    std::size_t coordinate;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    SystemSpec spec;
    IntegratorSettings settings;
    State x0;
    std::size_t clip_count = 0;
    std::vector<ClipEvent> clip_log; ///< first max_logged_clips events

    static constexpr std::size_t max_logged_clips = 1000;

    std::size_t size() const noexcept { return times.size(); }
    const State& final_state() const { return states.back(); }
};

/// Face-adapted coordinate: y = artanh(x) (tanh form) or y = logit(x)
/// (logistic form). In y the system reads dy_j/dt = drive_j(x(y)), so the
/// faces sit at infinity and near-face coordinates do not underflow.
inline double to_face_coordinate(double x, Formulation f) {
    return f == Formulation::tanh_cube ? std::atanh(x) : std::log(x) - std::log1p(-x);
}
inline double from_face_coordinate(double y, Formulation f) {
    return f == Formulation::tanh_cube ? std::tanh(y) : 1.0 / (1.0 + std::exp(-y));
}

/// Classical RK4 in face-adapted coordinates. Coordinates that start exactly
/// on a face stay there (faces are invariant). All others are clipped to stay
/// at least face_floor away from the faces; a zero floor disables clipping.
inline Trajectory integrate(const SystemSpec& spec, const State& x0, const IntegratorSettings& settings) {
    spec.validate();
    detail::require_dim(x0, spec);
    if (!(settings.dt > 0)) throw InvalidArgument("integrate: dt must be > 0");
    if (!(settings.t_end >= 0)) throw InvalidArgument("integrate: t_end must be >= 0");
    if (settings.stride == 0) throw InvalidArgument("integrate: stride must be >= 1");

    const auto form = spec.formulation;
    const double lo = spec.lower(), hi = spec.upper();
    const double floor = settings.effective_face_floor(form);
    if (!(floor >= 0 && floor < 0.5 * (hi - lo))) throw InvalidArgument("integrate: face_floor out of range");
    const std::size_t n = spec.n();
    for (double v : x0)
        if (!(v >= lo && v <= hi)) throw InvalidArgument("integrate: x0 outside the state cube");

    const double y_max = floor > 0 ? to_face_coordinate(hi - floor, form) : std::numeric_limits<double>::infinity();
    const double y_min = floor > 0 ? to_face_coordinate(lo + floor, form) : -std::numeric_limits<double>::infinity();

    std::vector<bool> on_face(n);
    State y(n), x = x0;
    for (std::size_t j = 0; j < n; ++j) {
        on_face[j] = x0[j] == lo || x0[j] == hi;
        y[j] = on_face[j] ? 0.0 : std::clamp(to_face_coordinate(x0[j], form), y_min, y_max);
        if (!on_face[j]) x[j] = from_face_coordinate(y[j], form);
    }

    Trajectory traj{{}, {}, spec, settings, x0, 0, {}};
    const auto steps = static_cast<std::size_t>(std::llround(std::ceil(settings.t_end / settings.dt - 1e-9)));
    traj.times.reserve(steps / settings.stride + 2);
    traj.states.reserve(steps / settings.stride + 2);
    traj.times.push_back(0.0);
    traj.states.push_back(x);

    State k1, k2, k3, k4, ytmp(n), xtmp = x;
    auto eval = [&](const State& ys, State& k) {
        for (std::size_t j = 0; j < n; ++j)
            if (!on_face[j]) xtmp[j] = from_face_coordinate(ys[j], form);
        drive(xtmp, spec, k);
        for (std::size_t j = 0; j < n; ++j)
            if (on_face[j]) k[j] = 0.0;
    };
    const double dt = settings.dt;
    double t = 0.0;
    for (std::size_t step = 1; step <= steps; ++step) {
        eval(y, k1);
        for (std::size_t j = 0; j < n; ++j) ytmp[j] = y[j] + 0.5 * dt * k1[j];
        eval(ytmp, k2);
        for (std::size_t j = 0; j < n; ++j) ytmp[j] = y[j] + 0.5 * dt * k2[j];
        eval(ytmp, k3);
        for (std::size_t j = 0; j < n; ++j) ytmp[j] = y[j] + dt * k3[j];
        eval(ytmp, k4);
        const double t_next = static_cast<double>(step) * dt;
        for (std::size_t j = 0; j < n; ++j) {
            if (on_face[j]) continue;
            double v = y[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            if (!std::isfinite(v)) throw IntegrationFailure("non-finite state at t = " + std::to_string(t_next), t);
            if (v > y_max || v < y_min) {
                v = std::clamp(v, y_min, y_max);
                ++traj.clip_count;
                if (traj.clip_log.size() < Trajectory::max_logged_clips) traj.clip_log.push_back({t_next, j});
            }
            y[j] = v;
            x[j] = from_face_coordinate(v, form);
        }
        t = t_next;
        if (step % settings.stride == 0 || step == steps) {
            traj.times.push_back(t);
            traj.states.push_back(x);
        }
    }
    return traj;
}

/// Vertex plus delta along the inward direction in every coordinate.
inline State near_vertex(const std::vector<int>& signs, Formulation formulation, double delta = 0.01) {
    State x(signs.size());
    for (std::size_t j = 0; j < signs.size(); ++j) {
        if (formulation == Formulation::tanh_cube) x[j] = signs[j] > 0 ? 1.0 - delta : -1.0 + delta;
        else x[j] = signs[j] > 0 ? 1.0 - delta : delta;
    }
    return x;
}

/// Header "t,x1,...,xn", one row per stored sample, every stride-th sample.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj, std::size_t stride = 1) {
    if (stride == 0) stride = 1;
    os << "t";
    for (std::size_t j = 0; j < traj.spec.n(); ++j) os << ",x" << (j + 1);
    os << '\n';
    os.precision(17);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (k % stride != 0 && k + 1 != traj.size()) continue;
        os << traj.times[k];
        for (double v : traj.states[k]) os << ',' << v;
        os << '\n';
    }
}

} // namespace hopcycle
