#include "spinbath/runner.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace spinbath
{

namespace fs = std::filesystem;

namespace
{

void say(const RunOptions& o, const std::string& line)
{
    if (o.log) {
        *o.log << line << '\n';
    }
}

Json boltzmann_json(const BoltzmannReport& b)
{
    return {{"status", b.status == BoltzmannStatus::Ok ? "ok" : "inconclusive"},
            {"target_lower", b.target_lower},
            {"target_upper", b.target_upper},
            {"final_lower", b.final_lower},
            {"final_upper", b.final_upper},
            {"relative_deviation", b.relative_deviation},
            {"note", b.note}};
}

std::string join(const fs::path& dir, const char* file) { return (dir / file).string(); }

void ensure_directory(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
    }
}

} // namespace

BathFit fit_only(const RunConfig& config, const RunOptions& options)
{
    config.validate();
    if (!config.coupled) {
        throw ValidationError("fit-only: configuration has no bath (coupled = false)");
    }
    say(options, "fitting " + std::to_string(config.fit.k_real) + "+" + std::to_string(config.fit.k_imag) +
                     " exponentials to the bath correlation function");
    BathFit fit = fit_bath(config.bath, config.fit, config.quadrature);
    if (options.write_artifacts) {
        const fs::path dir(config.output.directory);
        ensure_directory(dir);
        write_json_file(join(dir, "fit_report.json"), fit_to_json(fit.series, fit.report));
    }
    return fit;
}

RunResult run(const RunConfig& config, const RunOptions& options)
{
    config.validate();
    if (config.expensive && !options.allow_expensive) {
        throw ValidationError("run \"" + config.name + "\" is marked expensive (" + config.cost_note +
                              "); pass --allow-expensive to run it");
    }
    RunResult result;
    result.config = config;
    result.hash = config_hash(config);

    const auto started = std::chrono::steady_clock::now();
    if (config.coupled) {
        RunOptions quiet = options;
        quiet.write_artifacts = false;
        result.fit = fit_only(config, quiet);
        result.has_fit = true;
        say(options, "fit: " + std::to_string(result.fit.series.size()) + " terms, max abs error " +
                         std::to_string(result.fit.report.max_abs_error));
    }

    HierarchyParams params = config.hierarchy;
    params.record_stride = config.output.stride;

    const fs::path dir(config.output.directory);
    PropagationControl control;
    if (options.write_artifacts && options.checkpoint_every > 0) {
        ensure_directory(dir);
        control.checkpoint_path = join(dir, "checkpoint.json");
        control.checkpoint_every = options.checkpoint_every;
    }
    if (options.resume) {
        const std::string cp = join(dir, "checkpoint.json");
        if (fs::exists(cp)) {
            control.resume_path = cp;
            say(options, "resuming from " + cp);
        } else {
            say(options, "no checkpoint at " + cp + "; starting from t = 0");
        }
    }

    const ExponentialSeries empty;
    result.trajectory = propagate(config.system, result.has_fit ? result.fit.series : empty, params, control);
    result.trajectory.config_hash = result.hash;
    result.boltzmann = boltzmann_check(result.trajectory, config.system.hamiltonian(),
                                       config.coupled ? config.bath.beta : 0.0);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (result.trajectory.clipped_states > 0) {
        say(options, "warning: " + std::to_string(result.trajectory.clipped_states) +
                         " recorded states had small negative eigenvalues clipped for the entropy");
    }
    say(options, "propagated " + std::to_string(result.trajectory.steps) + " steps in " + std::to_string(seconds) +
                     " s; final active DDOs " +
                     std::to_string(result.trajectory.n_active.empty() ? 0 : result.trajectory.n_active.back()));

    if (!options.write_artifacts) {
        return result;
    }
    ensure_directory(dir);
    if (config.output.write_csv) {
        const std::string path = join(dir, "trajectory.csv");
        std::ofstream out(path);
        write_trajectory_csv(out, result.trajectory);
        if (!out) {
            throw Error("write failed for " + path);
        }
        result.artifacts.push_back(path);
    }
    if (config.output.write_json) {
        const Json fit = result.has_fit ? fit_to_json(result.fit.series, result.fit.report)
                                        : fit_to_json(ExponentialSeries{}, FitReport{});
        const auto& t = result.trajectory;
        int max_tier = 0;
        for (int v : t.max_tier) {
            max_tier = std::max(max_tier, v);
        }
        long max_active = 0;
        for (long v : t.n_active) {
            max_active = std::max(max_active, v);
        }
        const Json sidecar = {{"config", config_to_json(config)},
                              {"config_hash", result.hash},
                              {"fit", fit},
                              {"diagnostics",
                               {{"steps", t.steps},
                                {"records", t.size()},
                                {"max_trace_drift", t.max_trace_drift},
                                {"max_hermiticity_residue", t.max_hermiticity_residue},
                                {"clipped_states", t.clipped_states},
                                {"max_active_ddos", max_active},
                                {"max_tier_reached", max_tier}}},
                              {"boltzmann", boltzmann_json(result.boltzmann)}};
        const std::string side = join(dir, "run.json");
        write_json_file(side, sidecar);
        result.artifacts.push_back(side);
        const std::string report = join(dir, "fit_report.json");
        write_json_file(report, fit);
        result.artifacts.push_back(report);
    }
    return result;
}

std::vector<RunConfig> expand_sweep(const RunConfig& config)
{
    std::vector<RunConfig> members;
    RunConfig base = config;
    base.sweep.clear();
    if (config.sweep.empty()) {
        members.push_back(base);
        return members;
    }
    for (std::size_t i = 0; i < config.sweep.size(); ++i) {
        RunConfig m = base;
        for (const auto& [path, value] : config.sweep[i].items()) {
            apply_override(m, path, value);
        }
        m.name = config.name + "/member_" + std::to_string(i);
        m.output.directory = (fs::path(config.output.directory) / ("member_" + std::to_string(i))).string();
        m.hierarchy.record_stride = m.output.stride;
        members.push_back(m);
    }
    return members;
}

Real max_population_deviation(const Trajectory& a, const Trajectory& b)
{
    const std::size_t n = std::min(a.size(), b.size());
    Real worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (std::abs(a.times[j] - b.times[j]) > 1e-12) {
            throw ValidationError("trajectories have different time grids");
        }
        worst = std::max(worst, std::abs(a.population[j] - b.population[j]));
    }
    return worst;
}

SweepResult sweep(const RunConfig& config, const RunOptions& options)
{
    config.validate();
    SweepResult result;
    const auto members = expand_sweep(config);
    for (std::size_t i = 0; i < members.size(); ++i) {
        say(options, "sweep member " + std::to_string(i) + ": " +
                         (config.sweep.empty() ? std::string("base") : config.sweep[i].dump()));
        result.members.push_back(run(members[i], options));
    }
    const std::size_t n = result.members.size();
    result.deviation.assign(n, std::vector<Real>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const Real d = max_population_deviation(result.members[i].trajectory, result.members[j].trajectory);
            result.deviation[i][j] = d;
            result.deviation[j][i] = d;
        }
    }
    if (options.write_artifacts) {
        const fs::path dir(config.output.directory);
        ensure_directory(dir);
        const std::string path = join(dir, "convergence.csv");
        std::ofstream out(path);
        out << "member_i,member_j,max_abs_dP\n";
        char line[96];
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                std::snprintf(line, sizeof line, "%zu,%zu,%.12g\n", i, j, result.deviation[i][j]);
                out << line;
            }
        }
        Json summary = {{"config", config_to_json(config)}, {"members", Json::array()}};
        for (std::size_t i = 0; i < n; ++i) {
            summary["members"].push_back({{"directory", result.members[i].config.output.directory},
                                          {"overrides", config.sweep.empty() ? Json::object() : config.sweep[i]},
                                          {"config_hash", result.members[i].hash}});
        }
        summary["max_abs_dP"] = result.deviation;
        write_json_file(join(dir, "sweep.json"), summary);
    }
    if (options.log && n > 1) {
        *options.log << "max pairwise |dP|:\n";
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                char cell[32];
                std::snprintf(cell, sizeof cell, " %10.3e", result.deviation[i][j]);
                *options.log << cell;
            }
            *options.log << '\n';
        }
    }
    return result;
}

} // namespace spinbath
