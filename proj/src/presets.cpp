#include "spinbath/presets.hpp"

#include <functional>
#include <map>

namespace spinbath
{

namespace
{

// kT/delta = 0, 0.1, 0.167, 0.5
Json temperature_scan()
{
    Json members = Json::array();
    for (Json beta : {Json("inf"), Json(10.0), Json(6.0), Json(2.0)}) {
        members.push_back({{"bath.beta", beta}});
    }
    return members;
}

RunConfig unbiased(const std::string& name, Real alpha, Real omega_c)
{
    RunConfig c;
    c.name = name;
    c.bath.alpha = alpha;
    c.bath.omega_c = omega_c;
    c.bath.beta = kInfiniteBeta;
    c.fit.k_real = 5;
    c.fit.k_imag = 5;
    c.hierarchy.tier = 20;
    c.hierarchy.filter_tol = 5e-7;
    c.output.directory = name;
    return c;
}

RunConfig localization(const std::string& name)
{
    RunConfig c = unbiased(name, 10.0, 1.0);
    c.fit.k_real = 2;
    c.fit.k_imag = 2;
    c.hierarchy.tier = 25;
    c.hierarchy.filter_tol = 0.0;
    c.hierarchy.t_final = 20.0;
    c.expensive = true;
    c.cost_note = "strong-coupling localization run; a converged 4+4/tier-45 calculation needs >100 CPU hours, "
                  "this preset uses the reduced 2+2/tier-25 variant";
    return c;
}

RunConfig biased(const std::string& name, Real omega_c, Real beta)
{
    RunConfig c;
    c.name = name;
    c.system.epsilon = 1.0;
    c.system.delta = 1.0;
    c.bath.alpha = 0.4;
    c.bath.omega_c = omega_c;
    c.bath.beta = beta;
    c.fit.k_real = 5;
    c.fit.k_imag = 5;
    c.hierarchy.tier = 12;
    c.hierarchy.filter_tol = 5e-7;
    c.output.directory = name;
    c.sweep = {Json{{"bath.environment", "spin"}}, Json{{"bath.environment", "boson"}}};
    return c;
}

const std::map<std::string, std::function<RunConfig()>>& catalog()
{
    static const std::map<std::string, std::function<RunConfig()>> table = {
        {"fig1a", [] { return unbiased("fig1a", 0.5, 1.0); }},
        {"fig1b", [] { return unbiased("fig1b", 0.1, 6.0); }},
        {"fig1c", [] { return unbiased("fig1c", 0.2, 10.0); }},
        {"fig1d", [] { return unbiased("fig1d", 0.5, 10.0); }},
        {"fig1e",
         [] {
             RunConfig c = unbiased("fig1e", 0.75, 10.0);
             c.fit.k_real = 6;
             c.hierarchy.filter_tol = 1e-7;
             return c;
         }},
        {"fig1f", [] { return unbiased("fig1f", 0.5, 40.0); }},
        {"fig2", [] { return localization("fig2"); }},
        {"fig3a",
         [] {
             RunConfig c = unbiased("fig3a", 0.5, 6.0);
             c.sweep = temperature_scan();
             return c;
         }},
        {"fig3b",
         [] {
             RunConfig c = unbiased("fig3b", 0.75, 10.0);
             c.fit.k_real = 6;
             c.hierarchy.filter_tol = 1e-7;
             c.sweep = temperature_scan();
             return c;
         }},
        {"fig3c",
         [] {
             RunConfig c = localization("fig3c");
             c.sweep = temperature_scan();
             return c;
         }},
        {"fig5a", [] { return biased("fig5a", 1.0, 0.25); }},
        {"fig5b", [] { return biased("fig5b", 2.0, 1.0); }},
        {"fig5c", [] { return biased("fig5c", 2.0, 5.0); }},
        {"dephasing",
         [] {
             RunConfig c;
             c.name = "dephasing";
             c.system.delta = 0.0;
             c.system.rho0 << 0.5, 0.5, 0.5, 0.5;
             c.bath.alpha = 0.1;
             c.bath.omega_c = 1.0;
             c.bath.beta = kInfiniteBeta;
             c.hierarchy.tier = 6;
             c.hierarchy.filter_tol = 0.0;
             c.output.directory = "dephasing";
             return c;
         }},
        {"rabi",
         [] {
             RunConfig c;
             c.name = "rabi";
             c.coupled = false;
             c.system.epsilon = 0.0;
             c.system.delta = 1.0;
             c.output.directory = "rabi";
             return c;
         }},
    };
    return table;
}

} // namespace

std::vector<std::string> preset_catalog()
{
    return {"fig1a", "fig1b", "fig1c", "fig1d", "fig1e", "fig1f", "fig2",      "fig3a",
            "fig3b", "fig3c", "fig5a", "fig5b", "fig5c", "dephasing", "rabi"};
}

RunConfig preset(const std::string& name)
{
    const auto& table = catalog();
    auto it = table.find(name);
    if (it == table.end()) {
        std::string msg = "unknown preset \"" + name + "\"; available:";
        for (const auto& n : preset_catalog()) {
            msg += " " + n;
        }
        throw ValidationError(msg);
    }
    RunConfig c = it->second();
    c.hierarchy.record_stride = c.output.stride;
    return c;
}

} // namespace spinbath
