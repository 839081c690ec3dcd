#pragma once

// Ensemble driver. Paths are independent work items: path i always draws
// from the substream (master_seed, i), workers share no mutable state, and
// every reduction runs on the folding thread in path-index order. Results
// are therefore bit-identical for any worker count.
//
// Paths are processed in fixed-size blocks; each block is split into
// contiguous slices across the workers, then folded in order before the
// next block starts, which bounds memory when per-step moment values are
// collected.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "sdexp/analysis.hpp"
#include "sdexp/errors.hpp"
#include "sdexp/model.hpp"
#include "sdexp/noise.hpp"
#include "sdexp/schemes.hpp"

namespace sdexp {

struct EnsembleConfig {
    SdeModel model;
    SchemeKind scheme = SchemeKind::SemiDiscrete;
    double y0 = 1.0;
    double delta = 0.01;
    std::uint64_t n_steps = 10000;
    std::uint64_t n_paths = 1000;
    std::uint64_t master_seed = 0;
    GuardConfig guards{};
    double eps_zero = 1e-6;
    std::optional<double> moment_p{};
    unsigned workers = 0; // 0 = hardware concurrency

    void validate() const {
        guards.validate();
        if (n_paths < 1)
            throw DomainError("ensemble requires n_paths >= 1");
        if (n_steps < 1)
            throw DomainError("ensemble requires n_steps >= 1");
        if (!(delta > 0))
            throw DomainError("ensemble requires delta > 0");
        if (y0 < 0)
            throw DomainError("ensemble requires y0 >= 0");
        if (!(eps_zero > guards.absorption_floor))
            throw DomainError("eps_zero must exceed the absorption floor");
        if (moment_p && !(*moment_p > 0 && *moment_p < 1))
            throw DomainError("moment_p must lie in (0,1)");
    }
};

struct ExplosionStats {
    std::uint64_t count = 0;
    double mean = 0.0;
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct MomentPoint {
    double t = 0.0;
    double mean = 0.0;
    double std_error = 0.0;
};

struct EnsembleStats {
    std::uint64_t n_paths = 0;
    double fraction_converged = 0.0;
    double fraction_exploded = 0.0;
    ExplosionStats explosion_times{};
    std::vector<MomentPoint> moment_curve{};   // empty unless moment_p was set
    std::uint64_t moment_excluded_paths = 0;   // exploded paths left out of the curve
    std::uint64_t positivity_violations = 0;   // paths with any negative state
};

namespace detail {

// Knuth/Welford running mean and standard error.
class Accumulator {
public:
    void add(double x) {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }
    std::uint64_t count() const { return n_; }
    double mean() const { return n_ ? mean_ : 0.0; }
    double std_error() const {
        if (n_ < 2)
            return 0.0;
        return std::sqrt(m2_ / static_cast<double>(n_ - 1) / static_cast<double>(n_));
    }

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

struct PathOutcome {
    Termination termination{};
    double final_state = 0.0;
    bool any_negative = false;
    std::vector<double> moment_values; // one entry per curve grid point
    Trajectory trajectory;             // populated only when a sink is attached
    std::exception_ptr error;
};

inline PathOutcome run_one_path(const EnsembleConfig& cfg,
                                const std::vector<std::uint64_t>& grid_steps,
                                std::uint64_t path_index, bool keep_trajectory) {
    PathOutcome out;
    try {
        IncrementStream stream(cfg.master_seed, path_index);
        const double p = cfg.moment_p.value_or(0.0);
        std::size_t next_grid = 0;
        if (cfg.moment_p)
            out.moment_values.assign(grid_steps.size(), 0.0);
        if (keep_trajectory) {
            out.trajectory.scheme = cfg.scheme;
            out.trajectory.delta = cfg.delta;
        }
        out.termination = drive_path(
            cfg.model, cfg.scheme, cfg.y0, cfg.delta, cfg.n_steps, stream, cfg.guards,
            [&](std::uint64_t k, double t, double y, bool recorded) {
                out.final_state = y;
                if (y < 0)
                    out.any_negative = true;
                if (cfg.moment_p && next_grid < grid_steps.size() && grid_steps[next_grid] == k)
                    out.moment_values[next_grid++] = std::pow(std::abs(y), p);
                if (keep_trajectory && recorded) {
                    out.trajectory.times.push_back(t);
                    out.trajectory.states.push_back(y);
                }
            });
        if (keep_trajectory)
            out.trajectory.termination = out.termination;
        // An absorbed path sits on the equilibrium for the rest of the
        // horizon; its remaining curve entries stay zero.
    } catch (...) {
        out.error = std::current_exception();
    }
    return out;
}

} // namespace detail

/// Run the ensemble. When `per_path` is non-null it is invoked on the
/// folding thread, in path-index order, with each finished trajectory
/// (recorded at guards.record_every).
inline EnsembleStats run_ensemble(
    const EnsembleConfig& cfg,
    const std::function<void(std::uint64_t, const Trajectory&)>* per_path = nullptr) {
    cfg.validate();

    // Curve grid: every record_every-th step plus the endpoints.
    std::vector<std::uint64_t> grid_steps;
    if (cfg.moment_p) {
        for (std::uint64_t k = 0; k <= cfg.n_steps; k += cfg.guards.record_every)
            grid_steps.push_back(k);
        if (grid_steps.back() != cfg.n_steps)
            grid_steps.push_back(cfg.n_steps);
    }

    const unsigned workers = cfg.workers
        ? cfg.workers
        : std::max(1u, std::thread::hardware_concurrency());
    const std::uint64_t block_size =
        std::min<std::uint64_t>(cfg.n_paths, std::max<std::uint64_t>(4 * workers, 32));

    std::uint64_t n_converged = 0;
    std::uint64_t n_negative = 0;
    std::vector<double> explosion_times;
    std::vector<detail::Accumulator> curve(grid_steps.size());
    std::vector<detail::PathOutcome> slots(block_size);

    for (std::uint64_t begin = 0; begin < cfg.n_paths; begin += block_size) {
        const std::uint64_t end = std::min(cfg.n_paths, begin + block_size);
        const std::uint64_t count = end - begin;

        const auto run_slice = [&](std::uint64_t lo, std::uint64_t hi) {
            for (std::uint64_t i = lo; i < hi; ++i)
                slots[i - begin] =
                    detail::run_one_path(cfg, grid_steps, i, per_path != nullptr);
        };
        if (workers <= 1 || count == 1) {
            run_slice(begin, end);
        } else {
            const unsigned n_threads = static_cast<unsigned>(
                std::min<std::uint64_t>(workers, count));
            const std::uint64_t slice = (count + n_threads - 1) / n_threads;
            std::vector<std::thread> pool;
            pool.reserve(n_threads);
            for (unsigned w = 0; w < n_threads; ++w) {
                const std::uint64_t lo = begin + w * slice;
                const std::uint64_t hi = std::min(end, lo + slice);
                if (lo < hi)
                    pool.emplace_back(run_slice, lo, hi);
            }
            for (auto& th : pool)
                th.join();
        }

        // Deterministic fold in path-index order.
        for (std::uint64_t i = begin; i < end; ++i) {
            detail::PathOutcome& out = slots[i - begin];
            if (out.error) {
                try {
                    std::rethrow_exception(out.error);
                } catch (const std::exception& e) {
                    throw std::runtime_error("ensemble path " + std::to_string(i) + ": " +
                                             e.what());
                }
            }
            const bool exploded = out.termination.kind == TerminationKind::Exploded;
            const bool converged =
                out.termination.kind == TerminationKind::Absorbed ||
                (out.termination.kind == TerminationKind::Completed &&
                 std::abs(out.final_state) <= cfg.eps_zero);
            if (exploded)
                explosion_times.push_back(out.termination.time);
            if (converged)
                ++n_converged;
            if (out.any_negative)
                ++n_negative;
            if (cfg.moment_p && !exploded)
                for (std::size_t g = 0; g < grid_steps.size(); ++g)
                    curve[g].add(out.moment_values[g]);
            if (per_path)
                (*per_path)(i, out.trajectory);
            out = detail::PathOutcome{}; // release per-path buffers
        }
    }

    EnsembleStats stats;
    stats.n_paths = cfg.n_paths;
    stats.fraction_converged =
        static_cast<double>(n_converged) / static_cast<double>(cfg.n_paths);
    stats.fraction_exploded =
        static_cast<double>(explosion_times.size()) / static_cast<double>(cfg.n_paths);
    stats.positivity_violations = n_negative;
    stats.moment_excluded_paths = explosion_times.size();
    if (!explosion_times.empty()) {
        std::sort(explosion_times.begin(), explosion_times.end());
        stats.explosion_times.count = explosion_times.size();
        stats.explosion_times.min = explosion_times.front();
        stats.explosion_times.max = explosion_times.back();
        double sum = 0.0;
        for (double t : explosion_times)
            sum += t;
        stats.explosion_times.mean = sum / static_cast<double>(explosion_times.size());
        const std::size_t mid = explosion_times.size() / 2;
        stats.explosion_times.median = explosion_times.size() % 2
            ? explosion_times[mid]
            : 0.5 * (explosion_times[mid - 1] + explosion_times[mid]);
    }
    if (cfg.moment_p) {
        stats.moment_curve.reserve(grid_steps.size());
        for (std::size_t g = 0; g < grid_steps.size(); ++g)
            stats.moment_curve.push_back({static_cast<double>(grid_steps[g]) * cfg.delta,
                                          curve[g].mean(), curve[g].std_error()});
    }
    return stats;
}

/// Empirical p-th moment curve of the ensemble; requires moment_p.
inline std::vector<MomentPoint> pth_moment_curve(const EnsembleConfig& cfg) {
    if (!cfg.moment_p)
        throw DomainError("pth_moment_curve requires moment_p");
    return run_ensemble(cfg).moment_curve;
}

} // namespace sdexp
