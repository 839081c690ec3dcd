// Command-line front end: single-path simulation, Monte Carlo ensembles,
// stability classification, and the fixed figure experiments.
//
// Exit codes: 0 on success (simulate: path completed or was absorbed),
// 2 when a simulated path exploded, 1 on configuration or I/O errors.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "sdexp/sdexp.hpp"

namespace fs = std::filesystem;
using namespace sdexp;

namespace {

struct FlagSet {
    std::string config_path;
    std::string family;
    double sigma = 0.0;
    double drift_exp = 0.0;
    double diff_exp = 0.0;
    std::string a_text;
    std::string b_text;
    std::string scheme;
    double delta = 0.0;
    std::uint64_t steps = 0;
    double y0 = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;
    std::uint64_t paths = 0;
    unsigned workers = 0;
    double eps_zero = 0.0;
    double moment_p = 0.0;
    double explosion_threshold = 0.0;
    double absorption_floor = 0.0;
    std::uint64_t record_every = 0;
    std::string out;
    std::string dump_dir;
};

void add_common_flags(CLI::App* cmd, FlagSet& flags) {
    cmd->add_option("--config", flags.config_path, "config file (flags override it)");
    cmd->add_option("--family", flags.family, "model family: power or expression");
    cmd->add_option("--sigma", flags.sigma, "power family: diffusion scale");
    cmd->add_option("--drift-exp", flags.drift_exp, "power family: drift exponent");
    cmd->add_option("--diff-exp", flags.diff_exp, "power family: diffusion exponent");
    cmd->add_option("--a", flags.a_text, "drift factor a(u) as an expression");
    cmd->add_option("--b", flags.b_text, "diffusion factor b(u) as an expression");
    cmd->add_option("--scheme", flags.scheme, "integrator: sd, em, or tamed");
    cmd->add_option("--delta", flags.delta, "time step");
    cmd->add_option("--steps", flags.steps, "number of steps");
    cmd->add_option("--y0", flags.y0, "initial state");
    cmd->add_option("--seed", flags.seed, "master seed");
    cmd->add_option("--path", flags.path_index, "substream index for simulate");
    cmd->add_option("--paths", flags.paths, "ensemble size");
    cmd->add_option("--workers", flags.workers, "worker threads (0 = all cores)");
    cmd->add_option("--eps-zero", flags.eps_zero, "convergence threshold");
    cmd->add_option("--moment-p", flags.moment_p, "exponent for the moment curve");
    cmd->add_option("--explosion-threshold", flags.explosion_threshold,
                    "explosion guard threshold");
    cmd->add_option("--absorption-floor", flags.absorption_floor, "absorption guard floor");
    cmd->add_option("--record-every", flags.record_every, "recording stride");
    cmd->add_option("--out", flags.out, "output file (default: stdout)");
    cmd->add_option("--dump-paths", flags.dump_dir, "directory for per-path CSV dumps");
}

RunConfig assemble(const CLI::App* cmd, const FlagSet& flags) {
    RunConfig cfg;
    if (!flags.config_path.empty())
        cfg = RunConfig::from_file(flags.config_path);
    const bool expr_flags = cmd->count("--a") || cmd->count("--b");
    if (cmd->count("--family"))
        cfg.model.family = flags.family;
    else if (expr_flags)
        cfg.model.family = "expression";
    else if (cmd->count("--sigma") || cmd->count("--drift-exp") || cmd->count("--diff-exp"))
        cfg.model.family = "power";
    if (cmd->count("--sigma")) cfg.model.sigma = flags.sigma;
    if (cmd->count("--drift-exp")) cfg.model.drift_exp = flags.drift_exp;
    if (cmd->count("--diff-exp")) cfg.model.diff_exp = flags.diff_exp;
    if (cmd->count("--a")) cfg.model.a_text = flags.a_text;
    if (cmd->count("--b")) cfg.model.b_text = flags.b_text;
    if (cmd->count("--scheme")) cfg.scheme = scheme_from_string(flags.scheme);
    if (cmd->count("--delta")) cfg.delta = flags.delta;
    if (cmd->count("--steps")) cfg.steps = flags.steps;
    if (cmd->count("--y0")) cfg.y0 = flags.y0;
    if (cmd->count("--seed")) cfg.seed = flags.seed;
    if (cmd->count("--path")) cfg.path_index = flags.path_index;
    if (cmd->count("--paths")) cfg.paths = flags.paths;
    if (cmd->count("--workers")) cfg.workers = flags.workers;
    if (cmd->count("--eps-zero")) cfg.eps_zero = flags.eps_zero;
    if (cmd->count("--moment-p")) cfg.moment_p = flags.moment_p;
    if (cmd->count("--explosion-threshold"))
        cfg.guards.explosion_threshold = flags.explosion_threshold;
    if (cmd->count("--absorption-floor"))
        cfg.guards.absorption_floor = flags.absorption_floor;
    if (cmd->count("--record-every")) cfg.guards.record_every = flags.record_every;
    if (cmd->count("--out")) cfg.out = flags.out;
    if (cmd->count("--dump-paths")) cfg.dump_dir = flags.dump_dir;
    cfg.validate();
    return cfg;
}

void write_text(const std::string& out, const std::string& text) {
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream file(out);
    if (!file)
        throw ConfigError("cannot open output file '" + out + "'");
    file << text;
    if (!file)
        throw ConfigError("failed writing output file '" + out + "'");
}

int cmd_simulate(const CLI::App* cmd, const FlagSet& flags) {
    const RunConfig cfg = assemble(cmd, flags);
    const SdeModel model = cfg.model.build();
    IncrementStream stream(cfg.seed, cfg.path_index);
    const Trajectory traj = simulate_path(model, cfg.scheme, cfg.y0, cfg.delta, cfg.steps,
                                          stream, cfg.guards);
    std::ostringstream os;
    write_trajectory_csv(os, traj, {cfg.seed, cfg.path_index, model.label()});
    write_text(cfg.out, os.str());
    return traj.termination.kind == TerminationKind::Exploded ? 2 : 0;
}

int cmd_ensemble(const CLI::App* cmd, const FlagSet& flags) {
    const RunConfig cfg = assemble(cmd, flags);
    const EnsembleConfig ensemble = cfg.to_ensemble();
    EnsembleStats stats;
    if (!cfg.dump_dir.empty()) {
        fs::create_directories(cfg.dump_dir);
        const std::function<void(std::uint64_t, const Trajectory&)> sink =
            [&](std::uint64_t index, const Trajectory& traj) {
                char name[32];
                std::snprintf(name, sizeof name, "path_%06llu.csv",
                              static_cast<unsigned long long>(index));
                std::ofstream file(fs::path(cfg.dump_dir) / name);
                if (!file)
                    throw ConfigError("cannot write path dump in '" + cfg.dump_dir + "'");
                write_trajectory_csv(file, traj, {cfg.seed, index, ensemble.model.label()});
            };
        stats = run_ensemble(ensemble, &sink);
    } else {
        stats = run_ensemble(ensemble);
    }
    write_text(cfg.out, ensemble_report(ensemble, stats).dump(2) + "\n");
    return 0;
}

int cmd_classify(const CLI::App* cmd, const FlagSet& flags) {
    const RunConfig cfg = assemble(cmd, flags);
    const SdeModel model = cfg.model.build();
    const StabilityVerdict verdict = classify(model);
    std::ostringstream os;
    os << to_string(verdict.kind);
    if (verdict.beta)
        os << " beta=" << format_double(*verdict.beta);
    if (verdict.gamma)
        os << " gamma=" << format_double(*verdict.gamma);
    os << " evidence=" << to_string(verdict.evidence) << "\n";
    nlohmann::json j;
    j["model"] = model.label();
    j["kind"] = to_string(verdict.kind);
    if (verdict.beta)
        j["beta"] = *verdict.beta;
    if (verdict.gamma)
        j["gamma"] = *verdict.gamma;
    j["evidence"] = to_string(verdict.evidence);
    os << j.dump(2) << "\n";
    write_text(cfg.out, os.str());
    return 0;
}

// The fixed figure experiments: two stable trajectories, the deterministic
// explosion at two step sizes, and the random explosion at two step sizes.
struct FigureSpec {
    const char* file;
    double sigma;
    double delta;
    std::uint64_t steps;
    std::uint64_t path;
};

constexpr std::uint64_t kFigureSeed = 1234;
constexpr FigureSpec kFigures[] = {
    {"sigma2_delta0.01.csv", 2.0, 0.01, 10'000, 0},
    {"sigma3_delta0.01.csv", 3.0, 0.01, 10'000, 1},
    {"sigma0_delta0.01.csv", 0.0, 0.01, 200, 2},
    {"sigma0_delta0.001.csv", 0.0, 0.001, 2'000, 3},
    {"sigma1_delta0.01.csv", 1.0, 0.01, 10'000, 4},
    {"sigma1_delta0.001.csv", 1.0, 0.001, 100'000, 5},
};

int cmd_figures(const std::string& out_dir) {
    fs::create_directories(out_dir);
    nlohmann::json manifest;
    manifest["seed"] = kFigureSeed;
    manifest["notes"] = {
        "doubles are formatted with %.17g and round-trip exactly",
        "output is byte-identical across runs of the same build; a different "
        "libm may round exp/log differently"};
    nlohmann::json files = nlohmann::json::array();
    for (const FigureSpec& fig : kFigures) {
        const SdeModel model = make_power_model(fig.sigma);
        IncrementStream stream(kFigureSeed, fig.path);
        const Trajectory traj = simulate_path(model, SchemeKind::SemiDiscrete, 1.0,
                                              fig.delta, fig.steps, stream);
        std::ofstream file(fs::path(out_dir) / fig.file);
        if (!file)
            throw ConfigError("cannot write figure file in '" + out_dir + "'");
        write_trajectory_csv(file, traj, {kFigureSeed, fig.path, model.label()});
        if (!file)
            throw ConfigError("failed writing figure file in '" + out_dir + "'");
        nlohmann::json entry;
        entry["file"] = fig.file;
        entry["sigma"] = fig.sigma;
        entry["delta"] = fig.delta;
        entry["steps"] = fig.steps;
        entry["seed"] = kFigureSeed;
        entry["path"] = fig.path;
        entry["scheme"] = "sd";
        entry["termination"] = to_string(traj.termination.kind);
        if (traj.termination.kind != TerminationKind::Completed)
            entry["termination_time"] = traj.termination.time;
        files.push_back(entry);
    }
    manifest["files"] = files;
    std::ofstream file(fs::path(out_dir) / "manifest.json");
    if (!file)
        throw ConfigError("cannot write manifest in '" + out_dir + "'");
    file << manifest.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"semi-discrete exponential scheme for scalar SDEs"};
    app.require_subcommand(1);

    FlagSet flags;
    CLI::App* simulate = app.add_subcommand("simulate", "simulate one path, emit CSV");
    add_common_flags(simulate, flags);
    CLI::App* ensemble = app.add_subcommand("ensemble", "run a Monte Carlo ensemble");
    add_common_flags(ensemble, flags);
    CLI::App* classify_cmd = app.add_subcommand("classify", "classify the equilibrium");
    add_common_flags(classify_cmd, flags);
    CLI::App* figures = app.add_subcommand("figures", "emit the fixed figure experiments");
    std::string out_dir = "figures";
    figures->add_option("--out-dir,out_dir", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (simulate->parsed())
            return cmd_simulate(simulate, flags);
        if (ensemble->parsed())
            return cmd_ensemble(ensemble, flags);
        if (classify_cmd->parsed())
            return cmd_classify(classify_cmd, flags);
        if (figures->parsed())
            return cmd_figures(out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
