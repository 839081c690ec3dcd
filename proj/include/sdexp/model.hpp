#pragma once

// Scalar SDE models dx = x a(x) dt + x b(x) dW with nonnegative coefficient
// factors a, b and b(u) != 0 for u != 0. The drift/noise balance
// 2a(u)/b^2(u) decides the fate of the zero equilibrium: supremum beta < 1
// gives a.s. stability, liminf gamma > 1 (at u -> 0) gives a.s. instability.

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "sdexp/errors.hpp"
#include "sdexp/expression.hpp"

namespace sdexp {

class SdeModel {
public:
    using Coefficient = std::function<double(double)>;

    SdeModel(Coefficient drift_factor, Coefficient diffusion_factor, std::string label,
             std::optional<double> analytic_beta = {},
             std::optional<double> analytic_gamma = {})
        : drift_factor_(std::move(drift_factor)),
          diffusion_factor_(std::move(diffusion_factor)),
          label_(std::move(label)),
          analytic_beta_(analytic_beta),
          analytic_gamma_(analytic_gamma) {}

    /// a(u) for u >= 0; rejects negative u and negative/NaN coefficient values.
    double drift(double u) const {
        if (u < 0)
            throw DomainError("drift factor evaluated at negative u=" + std::to_string(u));
        const double value = drift_factor_(u);
        if (!(value >= 0))
            throw CoefficientNegativeError("drift", u, value);
        return value;
    }

    /// b(u) for u >= 0; same guards as drift().
    double diffusion(double u) const {
        if (u < 0)
            throw DomainError("diffusion factor evaluated at negative u=" + std::to_string(u));
        const double value = diffusion_factor_(u);
        if (!(value >= 0))
            throw CoefficientNegativeError("diffusion", u, value);
        return value;
    }

    const std::optional<double>& analytic_beta() const { return analytic_beta_; }
    const std::optional<double>& analytic_gamma() const { return analytic_gamma_; }
    const std::string& label() const { return label_; }

private:
    Coefficient drift_factor_;
    Coefficient diffusion_factor_;
    std::string label_;
    std::optional<double> analytic_beta_;
    std::optional<double> analytic_gamma_;
};

namespace detail {

// u^e with fast paths for the exponents that dominate Monte Carlo runs.
inline double pow_nonneg(double u, double e) {
    if (e == 1.0) return u;
    if (e == 2.0) return u * u;
    if (e == 3.0) return u * u * u;
    if (e == 0.5) return std::sqrt(u);
    return std::pow(u, e);
}

} // namespace detail

/// a(u) = u^drift_exp, b(u) = sigma u^diff_exp. When drift_exp == 2 diff_exp
/// and sigma > 0 the ratio 2a/b^2 is the constant 2/sigma^2, which is then
/// recorded as both the analytic supremum and the analytic liminf.
inline SdeModel make_power_model(double sigma, double drift_exp = 2.0, double diff_exp = 1.0) {
    if (!(sigma >= 0))
        throw DomainError("power model requires sigma >= 0");
    if (!(drift_exp > 0) || !(diff_exp > 0))
        throw DomainError("power model requires positive exponents");
    std::optional<double> beta, gamma;
    if (sigma > 0 && drift_exp == 2.0 * diff_exp)
        beta = gamma = 2.0 / (sigma * sigma);
    char label[96];
    std::snprintf(label, sizeof label, "power(sigma=%g drift_exp=%g diff_exp=%g)",
                  sigma, drift_exp, diff_exp);
    return SdeModel(
        [drift_exp](double u) { return detail::pow_nonneg(u, drift_exp); },
        [sigma, diff_exp](double u) { return sigma * detail::pow_nonneg(u, diff_exp); },
        label, beta, gamma);
}

/// Constant factors a == alpha, b == vol: geometric Brownian motion. The
/// ratio is the constant 2 alpha / vol^2 whenever vol > 0.
inline SdeModel make_constant_model(double alpha, double vol) {
    if (!(alpha >= 0) || !(vol >= 0))
        throw DomainError("constant model requires nonnegative coefficients");
    std::optional<double> r;
    if (vol > 0)
        r = 2.0 * alpha / (vol * vol);
    char label[64];
    std::snprintf(label, sizeof label, "constant(a=%g b=%g)", alpha, vol);
    return SdeModel(
        [alpha](double) { return alpha; },
        [vol](double) { return vol; },
        label, r, r);
}

/// Coefficients given as expressions in u; no analytic ratio bounds are
/// attached, so classification falls back to grid estimates.
inline SdeModel make_expression_model(const std::string& a_text, const std::string& b_text) {
    Expression a = Expression::parse(a_text);
    Expression b = Expression::parse(b_text);
    return SdeModel(
        [a](double u) { return a(u); },
        [b](double u) { return b(u); },
        "expr(a=\"" + a_text + "\" b=\"" + b_text + "\")");
}

/// 2 a(u) / b^2(u) at a single point u > 0.
inline double ratio(const SdeModel& model, double u) {
    if (!(u > 0))
        throw DomainError("ratio requires u > 0, got u=" + std::to_string(u));
    const double b = model.diffusion(u);
    if (b == 0)
        throw DegenerateDiffusionError(u);
    return 2.0 * model.drift(u) / (b * b);
}

enum class VerdictKind { AsStable, AsUnstable, Indeterminate };
enum class Evidence { Analytic, GridEstimate };

struct StabilityVerdict {
    VerdictKind kind = VerdictKind::Indeterminate;
    std::optional<double> beta;   // sup of the ratio (exact or grid estimate)
    std::optional<double> gamma;  // liminf of the ratio at 0 (exact or grid estimate)
    Evidence evidence = Evidence::Analytic;
};

inline const char* to_string(VerdictKind kind) {
    switch (kind) {
    case VerdictKind::AsStable:      return "AsStable";
    case VerdictKind::AsUnstable:    return "AsUnstable";
    case VerdictKind::Indeterminate: return "Indeterminate";
    }
    return "?";
}

inline const char* to_string(Evidence evidence) {
    return evidence == Evidence::Analytic ? "Analytic" : "GridEstimate";
}

struct ClassifyGrid {
    double beta_u_min = 1e-8;
    double beta_u_max = 1e8;
    int beta_points = 4096;
    double gamma_u_min = 1e-12; // finite stand-in for the open endpoint at 0
    double gamma_u_max = 1e-3;
    int gamma_points = 1024;
    double margin = 0.05;       // grid estimates must clear 1 by this much
};

namespace detail {

// Analytic values within one part in 1e12 of the threshold are treated as
// sitting on the boundary, which neither theorem covers.
inline constexpr double kBoundaryBand = 1e-12;

template <typename Fold>
double fold_ratio_log_grid(const SdeModel& model, double u_min, double u_max, int points,
                           double init, Fold fold) {
    double acc = init;
    const double log_min = std::log(u_min);
    const double log_max = std::log(u_max);
    for (int i = 0; i < points; ++i) {
        const double frac = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
        const double u = std::exp(log_min + frac * (log_max - log_min));
        acc = fold(acc, ratio(model, u));
    }
    return acc;
}

} // namespace detail

/// Classify the zero equilibrium. Closed-form beta/gamma are used when the
/// model carries them; otherwise beta is estimated as the max of the ratio
/// over a wide log-spaced grid and gamma as the min over a near-zero grid.
/// Grid estimates only produce a definite verdict when they clear the
/// threshold by the configured margin.
inline StabilityVerdict classify(const SdeModel& model, const ClassifyGrid& grid = {}) {
    StabilityVerdict verdict;
    const bool beta_analytic = model.analytic_beta().has_value();
    const bool gamma_analytic = model.analytic_gamma().has_value();

    const double beta = beta_analytic
        ? *model.analytic_beta()
        : detail::fold_ratio_log_grid(model, grid.beta_u_min, grid.beta_u_max, grid.beta_points,
                                      0.0, [](double a, double r) { return std::max(a, r); });
    const double gamma = gamma_analytic
        ? *model.analytic_gamma()
        : detail::fold_ratio_log_grid(model, grid.gamma_u_min, grid.gamma_u_max, grid.gamma_points,
                                      std::numeric_limits<double>::infinity(),
                                      [](double a, double r) { return std::min(a, r); });

    verdict.beta = beta;
    verdict.gamma = gamma;

    const double stable_cut = beta_analytic ? 1.0 - detail::kBoundaryBand : 1.0 - grid.margin;
    const double unstable_cut = gamma_analytic ? 1.0 + detail::kBoundaryBand : 1.0 + grid.margin;

    if (beta < stable_cut) {
        verdict.kind = VerdictKind::AsStable;
        verdict.evidence = beta_analytic ? Evidence::Analytic : Evidence::GridEstimate;
    } else if (gamma > unstable_cut) {
        verdict.kind = VerdictKind::AsUnstable;
        verdict.evidence = gamma_analytic ? Evidence::Analytic : Evidence::GridEstimate;
    } else {
        verdict.kind = VerdictKind::Indeterminate;
        verdict.evidence = (beta_analytic && gamma_analytic) ? Evidence::Analytic
                                                             : Evidence::GridEstimate;
    }
    return verdict;
}

} // namespace sdexp
