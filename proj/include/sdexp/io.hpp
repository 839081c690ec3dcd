#pragma once

// Trajectory CSV export and the ensemble JSON report.
//
// CSV layout: a metadata comment, a `t,y` header, one row per recorded
// point, and a trailing comment with the termination reason. Doubles are
// printed with %.17g so values round-trip exactly.

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "sdexp/montecarlo.hpp"
#include "sdexp/schemes.hpp"

namespace sdexp {

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct TrajectoryMeta {
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;
    std::string model_label;
};

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                                 const TrajectoryMeta& meta) {
    os << "# seed=" << meta.seed << ", path=" << meta.path_index
       << ", scheme=" << to_string(traj.scheme)
       << ", delta=" << format_double(traj.delta)
       << ", model=" << meta.model_label << "\n";
    os << "t,y\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i)
        os << format_double(traj.times[i]) << ',' << format_double(traj.states[i]) << "\n";
    os << "# termination=" << to_string(traj.termination.kind);
    if (traj.termination.kind != TerminationKind::Completed) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.10g", traj.termination.time);
        os << " t=" << buf;
    }
    os << "\n";
}

inline nlohmann::json stats_to_json(const EnsembleStats& stats) {
    nlohmann::json j;
    j["n_paths"] = stats.n_paths;
    j["fraction_converged"] = stats.fraction_converged;
    j["fraction_exploded"] = stats.fraction_exploded;
    j["positivity_violations"] = stats.positivity_violations;
    nlohmann::json expl;
    expl["count"] = stats.explosion_times.count;
    if (stats.explosion_times.count > 0) {
        expl["mean"] = stats.explosion_times.mean;
        expl["median"] = stats.explosion_times.median;
        expl["min"] = stats.explosion_times.min;
        expl["max"] = stats.explosion_times.max;
    }
    j["explosion_times"] = expl;
    nlohmann::json curve = nlohmann::json::array();
    for (const MomentPoint& pt : stats.moment_curve)
        curve.push_back({{"t", pt.t}, {"mean", pt.mean}, {"std_error", pt.std_error}});
    j["moment_curve"] = curve;
    j["moment_excluded_paths"] = stats.moment_excluded_paths;
    return j;
}

// The echo covers the experiment-defining fields only; the worker count
// does not change any result and is deliberately left out.
inline nlohmann::json ensemble_report(const EnsembleConfig& cfg, const EnsembleStats& stats) {
    nlohmann::json j;
    j["seed"] = cfg.master_seed;
    nlohmann::json c;
    c["model"] = cfg.model.label();
    c["scheme"] = to_string(cfg.scheme);
    c["y0"] = cfg.y0;
    c["delta"] = cfg.delta;
    c["steps"] = cfg.n_steps;
    c["paths"] = cfg.n_paths;
    c["seed"] = cfg.master_seed;
    c["eps_zero"] = cfg.eps_zero;
    if (cfg.moment_p)
        c["moment_p"] = *cfg.moment_p;
    c["guards"] = {{"explosion_threshold", cfg.guards.explosion_threshold},
                   {"absorption_floor", cfg.guards.absorption_floor},
                   {"record_every", cfg.guards.record_every}};
    j["config"] = c;
    j["stats"] = stats_to_json(stats);
    return j;
}

} // namespace sdexp
