#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spinbath/config.hpp"
#include "spinbath/presets.hpp"
#include "spinbath/runner.hpp"

namespace
{

enum ExitCode
{
    kOk = 0,
    kValidation = 1,
    kRuntime = 2,
    kDivergence = 3
};

struct Common
{
    bool allow_expensive = false;
    bool resume = false;
    long checkpoint_every = 0;
    bool quiet = false;

    spinbath::RunOptions options() const
    {
        spinbath::RunOptions o;
        o.allow_expensive = allow_expensive;
        o.resume = resume;
        o.checkpoint_every = checkpoint_every;
        o.log = quiet ? nullptr : &std::cerr;
        return o;
    }
};

void report_run(const spinbath::RunResult& r)
{
    for (const auto& a : r.artifacts) {
        std::cout << a << '\n';
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spin-bath relaxation dynamics: bath fitting and hierarchy propagation"};
    app.require_subcommand(1);
    Common common;
    app.add_flag("--allow-expensive", common.allow_expensive, "Permit runs flagged as expensive");
    app.add_flag("--resume", common.resume, "Resume from <output>/checkpoint.json when present");
    app.add_option("--checkpoint-every", common.checkpoint_every, "Write a checkpoint every N steps (0: never)");
    app.add_flag("-q,--quiet", common.quiet, "Suppress progress messages");

    std::string config_path;
    std::string preset_name;
    std::string out_dir;
    std::vector<std::string> overrides;
    bool print_only = false;
    bool list = false;

    auto* run_cmd = app.add_subcommand("run", "Run one configuration (sweep members are ignored)");
    run_cmd->add_option("config", config_path, "JSON configuration file")->required();
    run_cmd->add_option("--override", overrides, "Override a field, e.g. bath.alpha=0.2");

    auto* preset_cmd = app.add_subcommand("preset", "Run a named preset (its sweep, if it has one)");
    preset_cmd->add_option("name", preset_name, "Preset name");
    preset_cmd->add_option("--out", out_dir, "Output directory");
    preset_cmd->add_option("--override", overrides, "Override a field, e.g. hierarchy.tier=12");
    preset_cmd->add_flag("--print", print_only, "Print the configuration as JSON instead of running");
    preset_cmd->add_flag("--list", list, "List the preset catalog");

    auto* sweep_cmd = app.add_subcommand("sweep", "Run every sweep member and summarize convergence");
    sweep_cmd->add_option("config", config_path, "JSON configuration file")->required();
    sweep_cmd->add_option("--override", overrides, "Override a field of the base configuration");

    auto* fit_cmd = app.add_subcommand("fit-only", "Fit the bath correlation function and write fit_report.json");
    fit_cmd->add_option("config", config_path, "JSON configuration file")->required();
    fit_cmd->add_option("--override", overrides, "Override a field");

    auto* validate_cmd = app.add_subcommand("validate", "Check a configuration without computing anything");
    validate_cmd->add_option("config", config_path, "JSON configuration file")->required();
    validate_cmd->add_option("--override", overrides, "Override a field");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    try {
        const auto options = common.options();
        auto with_overrides = [&](spinbath::RunConfig cfg) {
            for (const auto& o : overrides) {
                spinbath::apply_override(cfg, o);
            }
            return cfg;
        };

        if (*preset_cmd) {
            if (list) {
                for (const auto& n : spinbath::preset_catalog()) {
                    std::cout << n << '\n';
                }
                return kOk;
            }
            if (preset_name.empty()) {
                throw spinbath::ValidationError("preset: a name is required (see --list)");
            }
            auto cfg = spinbath::preset(preset_name);
            if (!out_dir.empty()) {
                cfg.output.directory = out_dir;
            }
            cfg = with_overrides(cfg);
            if (print_only) {
                std::cout << spinbath::config_to_json(cfg).dump(2) << '\n';
                return kOk;
            }
            if (cfg.sweep.empty()) {
                report_run(spinbath::run(cfg, options));
            } else {
                for (const auto& m : spinbath::sweep(cfg, options).members) {
                    report_run(m);
                }
            }
            return kOk;
        }

        auto cfg = with_overrides(spinbath::load_config(config_path));
        if (*validate_cmd) {
            cfg.validate();
            std::cout << "ok " << spinbath::config_hash(cfg) << '\n';
        } else if (*fit_cmd) {
            const auto fit = spinbath::fit_only(cfg, options);
            std::cout << "max_abs_error " << fit.report.max_abs_error << '\n';
        } else if (*sweep_cmd) {
            for (const auto& m : spinbath::sweep(cfg, options).members) {
                report_run(m);
            }
        } else if (*run_cmd) {
            if (!cfg.sweep.empty() && !common.quiet) {
                std::cerr << "note: ignoring " << cfg.sweep.size() << " sweep members; use `sweep` to run them\n";
            }
            cfg.sweep.clear();
            report_run(spinbath::run(cfg, options));
        }
        return kOk;
    } catch (const spinbath::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kValidation;
    } catch (const spinbath::DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << '\n';
        return kDivergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
}
