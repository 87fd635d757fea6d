#include "spinbath/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace spinbath
{

namespace
{

using Setter = std::function<void(const Json&)>;

// Applies `setters` to the members of `j`; type errors become ValidationError
// naming the field, unknown keys are collected.
void apply(const Json& j, const std::string& path, const std::map<std::string, Setter>& setters,
           std::vector<std::string>& unknown)
{
    if (!j.is_object()) {
        throw ValidationError(path + ": expected an object");
    }
    for (const auto& [key, value] : j.items()) {
        auto it = setters.find(key);
        if (it == setters.end()) {
            unknown.push_back(path + "." + key + ": unknown field");
            continue;
        }
        try {
            it->second(value);
        } catch (const Json::exception& e) {
            throw ValidationError(path + "." + key + ": " + e.what());
        } catch (const ValidationError& e) {
            const std::string field = path + "." + key;
            const std::string what = e.what();
            throw ValidationError(what.rfind(field, 0) == 0 ? what : field + ": " + what);
        }
    }
}

Setter real_setter(Real& field)
{
    return [&field](const Json& v) { field = real_from_json(v); };
}

template <typename Int>
Setter int_setter(Int& field)
{
    return [&field](const Json& v) { field = v.get<Int>(); };
}

} // namespace

Json real_to_json(Real v)
{
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    return v;
}

Real real_from_json(const Json& j)
{
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "infinity") {
            return kInfiniteBeta;
        }
        if (s == "-inf") {
            return -kInfiniteBeta;
        }
        throw ValidationError("expected a number or \"inf\", got \"" + s + "\"");
    }
    if (!j.is_number()) {
        throw ValidationError("expected a number, got " + j.dump());
    }
    return j.get<Real>();
}

Json matrix_to_json(const Matrix2c& m)
{
    Json a = Json::array();
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            a.push_back(m(r, c).real());
            a.push_back(m(r, c).imag());
        }
    }
    return a;
}

Matrix2c matrix_from_json(const Json& j)
{
    if (!j.is_array() || j.size() != 8) {
        throw ValidationError("2x2 complex matrix must be an array of 8 numbers [re00, im00, re01, ...]");
    }
    Matrix2c m;
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            const int at = 4 * r + 2 * c;
            m(r, c) = Complex(j[at].get<Real>(), j[at + 1].get<Real>());
        }
    }
    return m;
}

Json series_to_json(const ExponentialSeries& series)
{
    Json terms = Json::array();
    for (const auto& t : series.terms) {
        terms.push_back({{"eta_re", t.eta.real()},
                         {"eta_im", t.eta.imag()},
                         {"gamma_re", t.gamma.real()},
                         {"gamma_im", t.gamma.imag()}});
    }
    return {{"terms", terms}, {"partner", series.conj_partner}};
}

ExponentialSeries series_from_json(const Json& j)
{
    ExponentialSeries s;
    for (const auto& t : j.at("terms")) {
        s.terms.push_back({Complex(t.at("eta_re").get<Real>(), t.at("eta_im").get<Real>()),
                           Complex(t.at("gamma_re").get<Real>(), t.at("gamma_im").get<Real>())});
    }
    s.conj_partner = j.at("partner").get<std::vector<int>>();
    s.check_invariants();
    return s;
}

Json report_to_json(const FitReport& r)
{
    return {{"max_abs_error", r.max_abs_error},       {"rms_error", r.rms_error},
            {"max_abs_error_re", r.max_abs_error_re}, {"rms_error_re", r.rms_error_re},
            {"max_abs_error_im", r.max_abs_error_im}, {"rms_error_im", r.rms_error_im},
            {"n_samples", r.n_samples}};
}

Json fit_to_json(const ExponentialSeries& series, const FitReport& report)
{
    Json j = series_to_json(series);
    j["errors"] = report_to_json(report);
    return j;
}

std::string to_string(SpectralFamily) { return "ohmic_exponential"; }

std::string to_string(Environment e) { return e == Environment::Spin ? "spin" : "boson"; }

Json to_json(const BathSpec& b)
{
    return {{"family", to_string(b.family)},
            {"environment", to_string(b.environment)},
            {"alpha", b.alpha},
            {"omega_c", b.omega_c},
            {"beta", real_to_json(b.beta)},
            {"spin_s", b.spin_s}};
}

void update_from_json(BathSpec& b, const Json& j, const std::string& path, std::vector<std::string>& unknown)
{
    apply(j, path,
          {{"family",
            [&](const Json& v) {
                if (v.get<std::string>() != "ohmic_exponential") {
                    throw ValidationError(path + ".family: only \"ohmic_exponential\" is available");
                }
            }},
           {"environment",
            [&](const Json& v) {
                const auto s = v.get<std::string>();
                if (s == "spin") {
                    b.environment = Environment::Spin;
                } else if (s == "boson") {
                    b.environment = Environment::Boson;
                } else {
                    throw ValidationError(path + ".environment: expected \"spin\" or \"boson\", got \"" + s + "\"");
                }
            }},
           {"alpha", real_setter(b.alpha)},
           {"omega_c", real_setter(b.omega_c)},
           {"beta", real_setter(b.beta)},
           {"spin_s", real_setter(b.spin_s)}},
          unknown);
}

Json to_json(const FitStrategy& f)
{
    return {{"k_real", f.k_real}, {"k_imag", f.k_imag}, {"plateau_time", f.plateau_time}, {"dt_sample", f.dt_sample}};
}

void update_from_json(FitStrategy& f, const Json& j, const std::string& path, std::vector<std::string>& unknown)
{
    apply(j, path,
          {{"k_real", int_setter(f.k_real)},
           {"k_imag", int_setter(f.k_imag)},
           {"plateau_time", real_setter(f.plateau_time)},
           {"dt_sample", real_setter(f.dt_sample)}},
          unknown);
}

Json to_json(const QuadratureSpec& q)
{
    return {{"omega_max", q.omega_max},
            {"n_points", q.n_points},
            {"rule", q.rule == QuadratureRule::Adaptive ? "adaptive" : "fixed_gauss_legendre"},
            {"rel_tol", q.rel_tol},
            {"max_panels", q.max_panels}};
}

void update_from_json(QuadratureSpec& q, const Json& j, const std::string& path, std::vector<std::string>& unknown)
{
    apply(j, path,
          {{"omega_max", real_setter(q.omega_max)},
           {"n_points", int_setter(q.n_points)},
           {"rule",
            [&](const Json& v) {
                const auto s = v.get<std::string>();
                if (s == "adaptive") {
                    q.rule = QuadratureRule::Adaptive;
                } else if (s == "fixed_gauss_legendre") {
                    q.rule = QuadratureRule::FixedGaussLegendre;
                } else {
                    throw ValidationError(path + ".rule: expected \"adaptive\" or \"fixed_gauss_legendre\"");
                }
            }},
           {"rel_tol", real_setter(q.rel_tol)},
           {"max_panels", int_setter(q.max_panels)}},
          unknown);
}

Json to_json(const SystemSpec& s)
{
    return {{"epsilon", s.epsilon}, {"delta", s.delta}, {"q_op", matrix_to_json(s.q_op)}, {"rho0", matrix_to_json(s.rho0)}};
}

void update_from_json(SystemSpec& s, const Json& j, const std::string& path, std::vector<std::string>& unknown)
{
    apply(j, path,
          {{"epsilon", real_setter(s.epsilon)},
           {"delta", real_setter(s.delta)},
           {"q_op", [&](const Json& v) { s.q_op = matrix_from_json(v); }},
           {"rho0", [&](const Json& v) { s.rho0 = matrix_from_json(v); }}},
          unknown);
}

Json to_json(const HierarchyParams& h)
{
    return {{"tier", h.tier},
            {"dt", h.dt},
            {"filter_tol", h.filter_tol},
            {"t_final", h.t_final},
            {"record_stride", h.record_stride},
            {"ddo_cap", h.ddo_cap},
            {"scaled", h.scaled}};
}

void update_from_json(HierarchyParams& h, const Json& j, const std::string& path, std::vector<std::string>& unknown)
{
    apply(j, path,
          {{"tier", int_setter(h.tier)},
           {"dt", real_setter(h.dt)},
           {"filter_tol", real_setter(h.filter_tol)},
           {"t_final", real_setter(h.t_final)},
           {"record_stride", int_setter(h.record_stride)},
           {"ddo_cap", int_setter(h.ddo_cap)},
           {"scaled", [&](const Json& v) { h.scaled = v.get<bool>(); }}},
          unknown);
}

Json trajectory_to_json(const Trajectory& t)
{
    return {{"times", t.times},
            {"population", t.population},
            {"entropy", t.entropy},
            {"coherence", t.coherence},
            {"n_active", t.n_active},
            {"max_tier", t.max_tier},
            {"max_trace_drift", t.max_trace_drift},
            {"max_hermiticity_residue", t.max_hermiticity_residue},
            {"steps", t.steps},
            {"clipped_states", t.clipped_states},
            {"final_state", matrix_to_json(t.final_state)},
            {"config_hash", t.config_hash}};
}

Trajectory trajectory_from_json(const Json& j)
{
    Trajectory t;
    j.at("times").get_to(t.times);
    j.at("population").get_to(t.population);
    j.at("entropy").get_to(t.entropy);
    j.at("coherence").get_to(t.coherence);
    j.at("n_active").get_to(t.n_active);
    j.at("max_tier").get_to(t.max_tier);
    t.max_trace_drift = j.at("max_trace_drift").get<Real>();
    t.max_hermiticity_residue = j.at("max_hermiticity_residue").get<Real>();
    t.steps = j.at("steps").get<long>();
    t.clipped_states = j.at("clipped_states").get<long>();
    t.final_state = matrix_from_json(j.at("final_state"));
    t.config_hash = j.at("config_hash").get<std::string>();
    return t;
}

Json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open " + path);
    }
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const Json& j)
{
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) {
            throw Error("cannot write " + tmp);
        }
        out << j.dump(2) << '\n';
        if (!out) {
            throw Error("write failed for " + tmp);
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw Error("cannot rename " + tmp + " to " + path);
    }
}

} // namespace spinbath
