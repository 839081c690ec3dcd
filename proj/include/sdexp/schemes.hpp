#pragma once

// Single-step rules and the path driver.
//
// The semi-discrete step freezes both coefficient factors at the left
// endpoint and applies the exact solution of the resulting linear SDE:
//
//     y_{n+1} = y_n exp{ (a(y_n) - b^2(y_n)/2) delta + b(y_n) dW_n }
//
// which keeps positive states positive for every step size. The
// Euler-Maruyama and drift-tamed Euler rules are baselines without that
// guarantee; once such a path leaves the nonnegative domain the coefficient
// factors are evaluated at |y| (even extension) so the iteration stays
// defined.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "sdexp/errors.hpp"
#include "sdexp/model.hpp"
#include "sdexp/noise.hpp"

namespace sdexp {

enum class SchemeKind { SemiDiscrete, EulerMaruyama, TamedEuler };

inline const char* to_string(SchemeKind scheme) {
    switch (scheme) {
    case SchemeKind::SemiDiscrete:  return "sd";
    case SchemeKind::EulerMaruyama: return "em";
    case SchemeKind::TamedEuler:    return "tamed";
    }
    return "?";
}

struct GuardConfig {
    double explosion_threshold = 1e8;
    double absorption_floor = 1e-300;
    std::uint64_t record_every = 1;

    friend bool operator==(const GuardConfig&, const GuardConfig&) = default;

    void validate() const {
        if (!(explosion_threshold > absorption_floor))
            throw InvalidGuardError("explosion threshold must exceed absorption floor");
        if (record_every == 0)
            throw InvalidGuardError("record_every must be >= 1");
    }
};

enum class TerminationKind { Completed, Exploded, Absorbed };

inline const char* to_string(TerminationKind kind) {
    switch (kind) {
    case TerminationKind::Completed: return "Completed";
    case TerminationKind::Exploded:  return "Exploded";
    case TerminationKind::Absorbed:  return "Absorbed";
    }
    return "?";
}

struct Termination {
    TerminationKind kind = TerminationKind::Completed;
    double time = 0.0;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<double> states;
    Termination termination;
    SchemeKind scheme = SchemeKind::SemiDiscrete;
    double delta = 0.0;

    double final_time() const { return times.back(); }
    double final_state() const { return states.back(); }
};

// exp(x) overflows double just above this; larger exponents explode
// deterministically instead of relying on platform exp behavior.
inline constexpr double kExpOverflow = 709.0;

/// Semi-discrete exponential step. Maps 0 to 0 exactly and positive y to a
/// positive (possibly +inf) value; never returns a negative or NaN state.
inline double sd_step(const SdeModel& model, double y, double delta, double dw) {
    if (!(delta > 0))
        throw DomainError("sd_step requires delta > 0");
    if (y < 0)
        throw DomainError("sd_step requires y >= 0");
    if (y == 0)
        return 0.0;
    const double a = model.drift(y);
    const double b = model.diffusion(y);
    const double exponent = (a - 0.5 * b * b) * delta + b * dw;
    if (std::isnan(exponent) || exponent > kExpOverflow)
        return std::numeric_limits<double>::infinity();
    return y * std::exp(exponent);
}

namespace detail {

// inf - inf from overflowing coefficient products; the iterate has left
// every representable bounded set, so push it out along the drift.
inline double clamp_overflow(double value, double y) {
    if (std::isnan(value))
        return std::copysign(std::numeric_limits<double>::infinity(), y);
    return value;
}

} // namespace detail

/// Euler-Maruyama step; no positivity guarantee.
inline double em_step(const SdeModel& model, double y, double delta, double dw) {
    if (!(delta > 0))
        throw DomainError("em_step requires delta > 0");
    const double u = std::abs(y);
    const double a = model.drift(u);
    const double b = model.diffusion(u);
    return detail::clamp_overflow(y + y * a * delta + y * b * dw, y);
}

/// Drift-tamed Euler step: the drift increment y a(y) delta is divided by
/// 1 + delta |y a(y)|, which bounds its magnitude by 1 (it tends to the
/// sign of the drift when the product overflows). The diffusion term is
/// untamed, so positivity can still fail.
inline double tamed_em_step(const SdeModel& model, double y, double delta, double dw) {
    if (!(delta > 0))
        throw DomainError("tamed_em_step requires delta > 0");
    const double u = std::abs(y);
    const double a = model.drift(u);
    const double b = model.diffusion(u);
    const double m = y * a;
    const double q = delta * std::abs(m);
    const double drift_incr =
        std::isinf(q) ? std::copysign(1.0, m) : std::copysign(q / (1.0 + q), m);
    return detail::clamp_overflow(y + drift_incr + y * b * dw, y);
}

inline double step(const SdeModel& model, SchemeKind scheme, double y, double delta, double dw) {
    switch (scheme) {
    case SchemeKind::SemiDiscrete:  return sd_step(model, y, delta, dw);
    case SchemeKind::EulerMaruyama: return em_step(model, y, delta, dw);
    case SchemeKind::TamedEuler:    return tamed_em_step(model, y, delta, dw);
    }
    throw DomainError("unknown scheme");
}

namespace detail {

// Shared stepping loop. The observer is called once with the initial state
// and once after every step taken, with `recorded` marking the points a
// Trajectory would keep (stride hits, the final step, and the termination
// point). Consumes exactly one increment per step. Returns the termination.
template <typename Observer>
Termination drive_path(const SdeModel& model, SchemeKind scheme, double y0, double delta,
                       std::uint64_t n_steps, IncrementStream& stream,
                       const GuardConfig& guards, Observer&& observe) {
    guards.validate();
    if (y0 < 0)
        throw DomainError("simulate_path requires y0 >= 0");
    if (n_steps < 1)
        throw DomainError("simulate_path requires n_steps >= 1");
    if (!(delta > 0))
        throw DomainError("simulate_path requires delta > 0");

    observe(std::uint64_t{0}, 0.0, y0, true);
    double y = y0;
    const bool at_equilibrium = (y0 == 0.0);
    for (std::uint64_t k = 1; k <= n_steps; ++k) {
        const double dw = stream.next_increment(delta);
        y = step(model, scheme, y, delta, dw);
        const double t = static_cast<double>(k) * delta;
        if (!at_equilibrium) {
            if (std::abs(y) >= guards.explosion_threshold) {
                observe(k, t, y, true);
                return {TerminationKind::Exploded, t};
            }
            if (std::abs(y) <= guards.absorption_floor) {
                observe(k, t, y, true);
                return {TerminationKind::Absorbed, t};
            }
        }
        observe(k, t, y, k % guards.record_every == 0 || k == n_steps);
    }
    return {TerminationKind::Completed, static_cast<double>(n_steps) * delta};
}

} // namespace detail

/// Iterate the chosen step rule from y0, stopping early on explosion or
/// absorption. States are recorded every guards.record_every steps (plus the
/// initial, final, and termination points); guard checks run every step. A
/// start at y0 = 0 stays on the equilibrium and always completes.
inline Trajectory simulate_path(const SdeModel& model, SchemeKind scheme, double y0,
                                double delta, std::uint64_t n_steps, IncrementStream& stream,
                                const GuardConfig& guards = {}) {
    guards.validate();
    Trajectory traj;
    traj.scheme = scheme;
    traj.delta = delta;
    const std::uint64_t expected = n_steps / guards.record_every + 2;
    traj.times.reserve(expected);
    traj.states.reserve(expected);
    traj.termination = detail::drive_path(
        model, scheme, y0, delta, n_steps, stream, guards,
        [&traj](std::uint64_t, double t, double y, bool recorded) {
            if (recorded) {
                traj.times.push_back(t);
                traj.states.push_back(y);
            }
        });
    return traj;
}

} // namespace sdexp
