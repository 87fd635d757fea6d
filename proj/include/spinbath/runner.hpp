#ifndef SPINBATH_RUNNER_HPP
#define SPINBATH_RUNNER_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"
#include "observables.hpp"

namespace spinbath
{

struct RunOptions
{
    bool allow_expensive = false;
    /// Resume from the checkpoint in the output directory if one exists.
    bool resume = false;
    /// Steps between checkpoints; 0 disables them.
    long checkpoint_every = 0;
    /// Skip writing files (used by tests and sweeps that only need numbers).
    bool write_artifacts = true;
    /// Progress and warnings; null silences them.
    std::ostream* log = nullptr;
};

struct RunResult
{
    RunConfig config;
    std::string hash;
    bool has_fit = false;
    BathFit fit;
    Trajectory trajectory;
    BoltzmannReport boltzmann;
    /// Files written, in order.
    std::vector<std::string> artifacts;
};

/// Bath -> fit -> propagate pipeline. Writes trajectory.csv, run.json and
/// fit_report.json into config.output.directory.
RunResult run(const RunConfig& config, const RunOptions& options = {});

/// Fits the bath TCF only and writes fit_report.json.
BathFit fit_only(const RunConfig& config, const RunOptions& options = {});

struct SweepResult
{
    std::vector<RunResult> members;
    /// deviation[i][j] = max_t |P_i(t) - P_j(t)| over the common time grid.
    std::vector<std::vector<Real>> deviation;
};

/// Runs every sweep member (the base config when the list is empty) in
/// <directory>/member_<i>, then writes convergence.csv with the pairwise table.
SweepResult sweep(const RunConfig& config, const RunOptions& options = {});

/// The member configurations of a sweep, with output directories assigned.
std::vector<RunConfig> expand_sweep(const RunConfig& config);

/// Max pointwise |a - b| over the common time prefix of two trajectories.
Real max_population_deviation(const Trajectory& a, const Trajectory& b);

} // namespace spinbath

#endif
