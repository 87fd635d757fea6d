#include "spinbath/config.hpp"

#include <cstdint>
#include <cstdio>
#include <sstream>

namespace spinbath
{

std::vector<std::string> RunConfig::violations() const
{
    std::vector<std::string> out;
    auto append = [&out](const std::vector<std::string>& more) { out.insert(out.end(), more.begin(), more.end()); };
    append(system.violations("system"));
    if (coupled) {
        append(bath.violations("bath"));
        append(fit.violations("fit"));
        if (quadrature.n_points < 64) {
            out.push_back("quadrature.n_points: must be >= 64");
        }
        if (quadrature.omega_max != 0.0 && quadrature.omega_max < 20.0 * bath.omega_c) {
            out.push_back("quadrature.omega_max: must be 0 (auto) or >= 20*omega_c");
        }
        if (!(quadrature.rel_tol > 0.0)) {
            out.push_back("quadrature.rel_tol: must be > 0");
        }
        if (quadrature.max_panels < 1) {
            out.push_back("quadrature.max_panels: must be >= 1");
        }
    }
    append(hierarchy.violations("hierarchy"));
    if (output.stride < 1) {
        out.push_back("output.stride: must be >= 1");
    }
    if (output.directory.empty()) {
        out.push_back("output.directory: must not be empty");
    }
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        if (!sweep[i].is_object() || sweep[i].empty()) {
            out.push_back("sweep[" + std::to_string(i) + "]: must be a non-empty object of overrides");
        }
    }
    return out;
}

void RunConfig::validate() const
{
    const auto v = violations();
    if (v.empty()) {
        return;
    }
    std::ostringstream msg;
    msg << "invalid configuration (" << v.size() << (v.size() == 1 ? " problem)" : " problems)");
    for (const auto& line : v) {
        msg << "\n  " << line;
    }
    throw ValidationError(msg.str());
}

namespace
{

Json hierarchy_section(const HierarchyParams& h)
{
    Json j = to_json(h);
    j.erase("record_stride");
    return j;
}

Json physics_json(const RunConfig& cfg)
{
    return {{"system", to_json(cfg.system)},
            {"coupled", cfg.coupled},
            {"bath", to_json(cfg.bath)},
            {"fit", to_json(cfg.fit)},
            {"quadrature", to_json(cfg.quadrature)},
            {"hierarchy", hierarchy_section(cfg.hierarchy)},
            {"stride", cfg.output.stride}};
}

} // namespace

Json config_to_json(const RunConfig& cfg)
{
    Json j = {{"name", cfg.name},
              {"system", to_json(cfg.system)},
              {"coupled", cfg.coupled},
              {"bath", to_json(cfg.bath)},
              {"fit", to_json(cfg.fit)},
              {"quadrature", to_json(cfg.quadrature)},
              {"hierarchy", hierarchy_section(cfg.hierarchy)},
              {"output",
               {{"directory", cfg.output.directory},
                {"stride", cfg.output.stride},
                {"write_csv", cfg.output.write_csv},
                {"write_json", cfg.output.write_json}}},
              {"expensive", cfg.expensive}};
    if (!cfg.cost_note.empty()) {
        j["cost_note"] = cfg.cost_note;
    }
    if (!cfg.sweep.empty()) {
        j["sweep"] = cfg.sweep;
    }
    return j;
}

RunConfig config_from_json(const Json& j)
{
    if (!j.is_object()) {
        throw ValidationError("configuration must be a JSON object");
    }
    RunConfig cfg;
    std::vector<std::string> unknown;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "name") {
                cfg.name = value.get<std::string>();
            } else if (key == "system") {
                update_from_json(cfg.system, value, "system", unknown);
            } else if (key == "coupled") {
                cfg.coupled = value.get<bool>();
            } else if (key == "bath") {
                update_from_json(cfg.bath, value, "bath", unknown);
            } else if (key == "fit") {
                update_from_json(cfg.fit, value, "fit", unknown);
            } else if (key == "quadrature") {
                update_from_json(cfg.quadrature, value, "quadrature", unknown);
            } else if (key == "hierarchy") {
                Json h = value;
                if (h.is_object() && h.contains("record_stride")) {
                    unknown.push_back("hierarchy.record_stride: use output.stride");
                    h.erase("record_stride");
                }
                update_from_json(cfg.hierarchy, h, "hierarchy", unknown);
            } else if (key == "output") {
                for (const auto& [ok, ov] : value.items()) {
                    if (ok == "directory") {
                        cfg.output.directory = ov.get<std::string>();
                    } else if (ok == "stride") {
                        cfg.output.stride = ov.get<int>();
                    } else if (ok == "write_csv") {
                        cfg.output.write_csv = ov.get<bool>();
                    } else if (ok == "write_json") {
                        cfg.output.write_json = ov.get<bool>();
                    } else {
                        unknown.push_back("output." + ok + ": unknown field");
                    }
                }
            } else if (key == "expensive") {
                cfg.expensive = value.get<bool>();
            } else if (key == "cost_note") {
                cfg.cost_note = value.get<std::string>();
            } else if (key == "sweep") {
                if (!value.is_array()) {
                    throw ValidationError("sweep: must be an array of override objects");
                }
                cfg.sweep = value.get<std::vector<Json>>();
            } else {
                unknown.push_back(key + ": unknown field");
            }
        }
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("configuration: ") + e.what());
    }
    if (!unknown.empty()) {
        std::string msg = "invalid configuration";
        for (const auto& u : unknown) {
            msg += "\n  " + u;
        }
        throw ValidationError(msg);
    }
    cfg.hierarchy.record_stride = cfg.output.stride;
    return cfg;
}

RunConfig load_config(const std::string& path) { return config_from_json(read_json_file(path)); }

void apply_override(RunConfig& cfg, const std::string& path, const Json& value)
{
    Json j = config_to_json(cfg);
    Json* node = &j;
    std::stringstream parts(path);
    std::string part;
    std::vector<std::string> keys;
    while (std::getline(parts, part, '.')) {
        keys.push_back(part);
    }
    if (keys.empty()) {
        throw ValidationError("override: empty path");
    }
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
        if (!node->is_object() || !node->contains(keys[i])) {
            throw ValidationError("override: unknown field " + path);
        }
        node = &(*node)[keys[i]];
    }
    const bool top_level_optional = keys.size() == 1 && (keys[0] == "sweep" || keys[0] == "cost_note");
    if (!node->is_object() || (!node->contains(keys.back()) && !top_level_optional)) {
        throw ValidationError("override: unknown field " + path);
    }
    (*node)[keys.back()] = value;
    cfg = config_from_json(j);
}

void apply_override(RunConfig& cfg, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ValidationError("override: expected key=value, got \"" + assignment + "\"");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    Json value = Json::parse(raw, nullptr, false);
    if (value.is_discarded()) {
        value = raw;
    }
    apply_override(cfg, key, value);
}

std::string config_hash(const RunConfig& cfg)
{
    const std::string text = physics_json(cfg).dump();
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace spinbath
