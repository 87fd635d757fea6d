#ifndef SPINBATH_CONFIG_HPP
#define SPINBATH_CONFIG_HPP

#include <string>
#include <vector>

#include "bath.hpp"
#include "deom.hpp"
#include "expfit.hpp"
#include "serialize.hpp"

namespace spinbath
{

struct OutputSpec
{
    std::string directory = "out";
    /// Record observables every `stride` integrator steps.
    int stride = 4;
    bool write_csv = true;
    bool write_json = true;
};

/// Full description of one run. Units: delta = 1 fixes energy, 1/delta time.
struct RunConfig
{
    std::string name = "run";
    SystemSpec system;
    /// false runs the isolated two-level system.
    bool coupled = true;
    BathSpec bath;
    FitStrategy fit;
    QuadratureSpec quadrature;
    HierarchyParams hierarchy;
    OutputSpec output;
    /// Runs refuse to start without an explicit opt-in when set.
    bool expensive = false;
    std::string cost_note;
    /// Each member is an object of dotted-path overrides, e.g. {"hierarchy.tier": 12}.
    std::vector<Json> sweep;

    /// Every violated invariant with its field path.
    std::vector<std::string> violations() const;
    /// Throws ValidationError listing all violations.
    void validate() const;
};

Json config_to_json(const RunConfig& cfg);
/// Starts from defaults and applies `j`. Unknown fields throw ValidationError.
RunConfig config_from_json(const Json& j);
RunConfig load_config(const std::string& path);

/// Sets a dotted path ("bath.alpha") to `value`, checking that the path exists.
void apply_override(RunConfig& cfg, const std::string& path, const Json& value);
/// Parses "path=value"; the value is JSON when it parses as JSON, else a string.
void apply_override(RunConfig& cfg, const std::string& assignment);

/// FNV-1a 64-bit hash of the physics part of the config (output excluded), in hex.
std::string config_hash(const RunConfig& cfg);

} // namespace spinbath

#endif
