#pragma once

// Moment machinery and per-trajectory diagnostics.
//
// The p-th moment of the semi-discrete iterate factors as
// |y_{n+1}|^p = F(y_n) |y_n|^p xi_{n+1} with E xi_{n+1} = 1, where
// F(u) = exp{ (p b^2(u)/2) (2a(u)/b^2(u) - 1 + p) delta }. With p below
// 1 - beta the factor stays <= 1 for every delta, giving a supermartingale;
// the mirrored factor with the sign of the ratio flipped plays the same role
// for instability with p below gamma - 1.

#include <cmath>
#include <optional>

#include "sdexp/errors.hpp"
#include "sdexp/model.hpp"
#include "sdexp/schemes.hpp"

namespace sdexp {

enum class MomentDirection { Stability, Instability };

struct MomentFactorSpec {
    double p = 0.0;
    MomentDirection direction = MomentDirection::Stability;
};

namespace detail {

inline void check_moment_args(double p, double delta, double u) {
    if (!(u > 0))
        throw DomainError("moment factor requires u > 0");
    if (!(p > 0))
        throw DomainError("moment factor requires p > 0");
    if (!(delta > 0))
        throw DomainError("moment factor requires delta > 0");
}

} // namespace detail

/// Per-step p-th moment factor for the stability direction.
inline double moment_factor(const SdeModel& model, double p, double delta, double u) {
    detail::check_moment_args(p, delta, u);
    const double b = model.diffusion(u);
    const double b2 = b * b;
    if (b2 == 0)
        throw DegenerateDiffusionError(u);
    const double r = 2.0 * model.drift(u) / b2;
    return std::exp(0.5 * p * b2 * (r - 1.0 + p) * delta);
}

/// Mirrored factor for the instability direction (ratio enters negated).
inline double moment_factor_star(const SdeModel& model, double p, double delta, double u) {
    detail::check_moment_args(p, delta, u);
    const double b = model.diffusion(u);
    const double b2 = b * b;
    if (b2 == 0)
        throw DegenerateDiffusionError(u);
    const double r = 2.0 * model.drift(u) / b2;
    return std::exp(0.5 * p * b2 * (-r + 1.0 + p) * delta);
}

/// Pick a moment exponent from a definite verdict: the midpoint of the
/// admissible interval (0, 1-beta) or (0, gamma-1), the latter capped below
/// 1.
inline MomentFactorSpec select_p(const StabilityVerdict& verdict) {
    switch (verdict.kind) {
    case VerdictKind::AsStable:
        if (!verdict.beta)
            throw NoValidPError("stable verdict carries no beta");
        return {(1.0 - *verdict.beta) / 2.0, MomentDirection::Stability};
    case VerdictKind::AsUnstable:
        if (!verdict.gamma)
            throw NoValidPError("unstable verdict carries no gamma");
        return {std::min((*verdict.gamma - 1.0) / 2.0, 0.99), MomentDirection::Instability};
    case VerdictKind::Indeterminate:
        break;
    }
    throw NoValidPError("no admissible moment exponent for an indeterminate verdict");
}

/// Explosion time, if the path exploded.
inline std::optional<double> detect_explosion(const Trajectory& traj) {
    if (traj.termination.kind == TerminationKind::Exploded)
        return traj.termination.time;
    return std::nullopt;
}

/// Lyapunov-type decay statistic log(y_N)/t_N at the final recorded point of
/// a completed positive path; negative values indicate decay.
inline double decay_estimate(const Trajectory& traj) {
    if (traj.termination.kind != TerminationKind::Completed)
        throw UndefinedEstimateError("decay estimate requires a completed path");
    if (traj.states.size() < 2)
        throw UndefinedEstimateError("decay estimate requires at least two recorded points");
    for (double s : traj.states)
        if (!(s > 0))
            throw UndefinedEstimateError("decay estimate requires positive recorded states");
    return std::log(traj.final_state()) / traj.final_time();
}

/// Regression variant: least-squares slope of log(y) against t over the
/// second half of the recorded points.
inline double decay_estimate_regression(const Trajectory& traj) {
    if (traj.termination.kind != TerminationKind::Completed)
        throw UndefinedEstimateError("decay estimate requires a completed path");
    if (traj.states.size() < 2)
        throw UndefinedEstimateError("decay estimate requires at least two recorded points");
    const std::size_t begin = traj.states.size() / 2;
    const std::size_t n = traj.states.size() - begin;
    if (n < 2)
        throw UndefinedEstimateError("decay estimate requires at least two recorded points");
    double mean_t = 0.0, mean_v = 0.0;
    for (std::size_t i = begin; i < traj.states.size(); ++i) {
        if (!(traj.states[i] > 0))
            throw UndefinedEstimateError("decay estimate requires positive recorded states");
        mean_t += traj.times[i];
        mean_v += std::log(traj.states[i]);
    }
    mean_t /= static_cast<double>(n);
    mean_v /= static_cast<double>(n);
    double stt = 0.0, stv = 0.0;
    for (std::size_t i = begin; i < traj.states.size(); ++i) {
        const double dt = traj.times[i] - mean_t;
        stt += dt * dt;
        stv += dt * (std::log(traj.states[i]) - mean_v);
    }
    if (stt == 0)
        throw UndefinedEstimateError("decay estimate requires distinct times");
    return stv / stt;
}

/// Finite-horizon surrogate for convergence to the equilibrium: absorbed, or
/// completed with |final state| <= eps.
inline bool converged_to_zero(const Trajectory& traj, double eps = 1e-6) {
    if (!(eps > 0))
        throw DomainError("converged_to_zero requires eps > 0");
    switch (traj.termination.kind) {
    case TerminationKind::Absorbed:  return true;
    case TerminationKind::Exploded:  return false;
    case TerminationKind::Completed: return std::abs(traj.final_state()) <= eps;
    }
    return false;
}

} // namespace sdexp
