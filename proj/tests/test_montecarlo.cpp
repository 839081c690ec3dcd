#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "sdexp/io.hpp"
#include "sdexp/montecarlo.hpp"

using namespace sdexp;
using Catch::Approx;

namespace {

EnsembleConfig stable_config() {
    EnsembleConfig cfg{make_power_model(2.0)};
    cfg.scheme = SchemeKind::SemiDiscrete;
    cfg.y0 = 1.0;
    cfg.delta = 0.1;
    cfg.n_steps = 200;
    cfg.n_paths = 50;
    cfg.master_seed = 99;
    cfg.moment_p = 0.25;
    return cfg;
}

} // namespace

TEST_CASE("ensemble results are identical for any worker count") {
    EnsembleConfig cfg = stable_config();
    cfg.workers = 1;
    const std::string one = stats_to_json(run_ensemble(cfg)).dump();
    cfg.workers = 3;
    const std::string three = stats_to_json(run_ensemble(cfg)).dump();
    cfg.workers = 8;
    const std::string eight = stats_to_json(run_ensemble(cfg)).dump();
    REQUIRE(one == three);
    REQUIRE(one == eight);
    // And across repeated executions.
    REQUIRE(stats_to_json(run_ensemble(cfg)).dump() == one);
}

TEST_CASE("a single-path ensemble wraps the single trajectory") {
    EnsembleConfig cfg{make_power_model(0.0)};
    cfg.delta = 0.001;
    cfg.n_steps = 2000;
    cfg.n_paths = 1;
    cfg.master_seed = 12;
    const EnsembleStats stats = run_ensemble(cfg);
    REQUIRE(stats.fraction_exploded == 1.0);
    REQUIRE(stats.fraction_converged == 0.0);
    REQUIRE(stats.explosion_times.count == 1);
    REQUIRE(stats.explosion_times.mean >= 0.45);
    REQUIRE(stats.explosion_times.mean <= 0.55);

    IncrementStream stream(12, 0);
    const Trajectory traj = simulate_path(cfg.model, cfg.scheme, cfg.y0, cfg.delta,
                                          cfg.n_steps, stream, cfg.guards);
    REQUIRE(traj.termination.kind == TerminationKind::Exploded);
    REQUIRE(stats.explosion_times.mean == traj.termination.time);
}

TEST_CASE("moment curve of a frozen model is constant") {
    EnsembleConfig cfg{make_constant_model(0.0, 0.0)};
    cfg.y0 = 0.8;
    cfg.delta = 0.1;
    cfg.n_steps = 50;
    cfg.n_paths = 10;
    cfg.moment_p = 0.25;
    const std::vector<MomentPoint> curve = pth_moment_curve(cfg);
    REQUIRE(curve.size() == 51);
    const double expected = std::pow(0.8, 0.25);
    for (const MomentPoint& pt : curve) {
        REQUIRE(pt.mean == Approx(expected).epsilon(1e-15));
        REQUIRE(pt.std_error == 0.0);
    }
}

TEST_CASE("moment curve from the equilibrium is identically zero") {
    EnsembleConfig cfg{make_power_model(2.0)};
    cfg.y0 = 0.0;
    cfg.delta = 0.1;
    cfg.n_steps = 20;
    cfg.n_paths = 5;
    cfg.moment_p = 0.5;
    for (const MomentPoint& pt : pth_moment_curve(cfg)) {
        REQUIRE(pt.mean == 0.0);
        REQUIRE(pt.std_error == 0.0);
    }
}

TEST_CASE("exploded paths are excluded from the moment curve and counted") {
    EnsembleConfig cfg{make_power_model(1.0)};
    cfg.delta = 0.01;
    cfg.n_steps = 2000;
    cfg.n_paths = 40;
    cfg.master_seed = 5;
    cfg.moment_p = 0.5;
    const EnsembleStats stats = run_ensemble(cfg);
    REQUIRE(stats.fraction_exploded > 0.0);
    REQUIRE(stats.moment_excluded_paths == stats.explosion_times.count);
    REQUIRE(stats.fraction_converged + stats.fraction_exploded <= 1.0);
}

TEST_CASE("euler baseline breaks positivity while semi-discrete keeps it") {
    EnsembleConfig cfg{make_power_model(2.0)};
    cfg.delta = 0.1;
    cfg.n_steps = 1000;
    cfg.n_paths = 100;
    cfg.master_seed = 31;
    cfg.scheme = SchemeKind::EulerMaruyama;
    const EnsembleStats em = run_ensemble(cfg);
    REQUIRE(em.positivity_violations >= 1);

    cfg.scheme = SchemeKind::SemiDiscrete;
    const EnsembleStats sd = run_ensemble(cfg);
    REQUIRE(sd.positivity_violations == 0);
}

TEST_CASE("convergence fractions agree across seeds up to binomial noise") {
    std::vector<double> fractions;
    for (std::uint64_t seed : {101, 202, 303, 404, 505}) {
        EnsembleConfig cfg{make_power_model(2.0)};
        cfg.delta = 0.1;
        cfg.n_steps = 1000;
        cfg.n_paths = 1000;
        cfg.master_seed = seed;
        fractions.push_back(run_ensemble(cfg).fraction_converged);
    }
    double lo = fractions[0], hi = fractions[0], sum = 0.0;
    for (double f : fractions) {
        lo = std::min(lo, f);
        hi = std::max(hi, f);
        sum += f;
    }
    const double p = sum / static_cast<double>(fractions.size());
    const double binom_sd = std::sqrt(p * (1.0 - p) / 1000.0);
    REQUIRE(hi - lo <= 6.0 * binom_sd);
}

TEST_CASE("per-path sink sees every trajectory in order") {
    EnsembleConfig cfg = stable_config();
    cfg.n_paths = 17;
    std::vector<std::uint64_t> seen;
    const std::function<void(std::uint64_t, const Trajectory&)> sink =
        [&seen, &cfg](std::uint64_t index, const Trajectory& traj) {
            REQUIRE(traj.states.size() == cfg.n_steps + 1);
            seen.push_back(index);
        };
    run_ensemble(cfg, &sink);
    REQUIRE(seen.size() == 17);
    for (std::size_t i = 0; i < seen.size(); ++i)
        REQUIRE(seen[i] == i);
}

TEST_CASE("simulation errors carry the path index") {
    EnsembleConfig cfg{make_expression_model("log(u)", "u")};
    cfg.y0 = 0.5; // log(0.5) < 0: drift factor is rejected on first use
    cfg.n_steps = 10;
    cfg.n_paths = 3;
    try {
        run_ensemble(cfg);
        FAIL("expected an error");
    } catch (const std::runtime_error& e) {
        REQUIRE(std::string(e.what()).find("path 0") != std::string::npos);
    }
}

TEST_CASE("config validation") {
    EnsembleConfig cfg{make_power_model(2.0)};
    cfg.n_paths = 0;
    REQUIRE_THROWS_AS(run_ensemble(cfg), DomainError);
    cfg.n_paths = 1;
    cfg.eps_zero = 1e-301;
    cfg.guards.absorption_floor = 1e-300;
    REQUIRE_THROWS_AS(run_ensemble(cfg), DomainError);
    cfg.eps_zero = 1e-6;
    cfg.moment_p = 1.5;
    REQUIRE_THROWS_AS(run_ensemble(cfg), DomainError);
    cfg.moment_p.reset();
    REQUIRE_THROWS_AS(pth_moment_curve(cfg), DomainError);
}
