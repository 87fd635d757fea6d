#include "spinbath/bath.hpp"

#include <cmath>
#include <sstream>

namespace spinbath
{

namespace
{

bool is_half_integer_spin(Real s)
{
    const Real twice = 2.0 * s;
    return std::isfinite(s) && s > 0.0 && std::abs(twice - std::round(twice)) < 1e-12;
}

int level_count(Real spin_s) { return static_cast<int>(std::lround(2.0 * spin_s)) + 1; }

bool grid_is_uniform(const std::vector<Real>& t)
{
    if (t.size() < 3) {
        return true;
    }
    const Real h = t[1] - t[0];
    const Real scale = std::max(std::abs(t.front()), std::abs(t.back())) + std::abs(h);
    for (std::size_t j = 2; j < t.size(); ++j) {
        if (std::abs(t[j] - (t[0] + static_cast<Real>(j) * h)) > 1e-12 * scale) {
            return false;
        }
    }
    return true;
}

// Adds w * g(omega) * exp(+i omega t_j) into (acc_cos_j, acc_sin_j) for every
// grid point. Uniform grids use a rotation recurrence reseeded every 128 steps.
class FourierKernel
{
public:
    explicit FourierKernel(const std::vector<Real>& t) : t_(t), uniform_(grid_is_uniform(t)) {}

    std::size_t size() const { return t_.size(); }

    template <typename F>
    void for_each_phase(Real omega, F&& f) const
    {
        const std::size_t n = t_.size();
        if (!uniform_ || n < 3) {
            for (std::size_t j = 0; j < n; ++j) {
                const Real phase = omega * t_[j];
                f(j, std::cos(phase), std::sin(phase));
            }
            return;
        }
        const Real h = t_[1] - t_[0];
        const Complex step = std::polar(1.0, omega * h);
        Complex z;
        for (std::size_t j = 0; j < n; ++j) {
            if (j % 128 == 0) {
                z = std::polar(1.0, omega * (t_[0] + static_cast<Real>(j) * h));
            }
            f(j, z.real(), z.imag());
            z *= step;
        }
    }

private:
    const std::vector<Real>& t_;
    bool uniform_;
};

// Integrates cos-weighted and sin-weighted spectra over [0, omega_max] for all
// grid points at once; returns (1/pi) * [Int cw cos, Int sw sin].
template <typename CosWeight, typename SinWeight>
std::pair<VectorXr, VectorXr> fourier_integrals(const std::vector<Real>& t, Real omega_max, const QuadratureSpec& quad,
                                                CosWeight&& cos_weight, SinWeight&& sin_weight)
{
    const auto n = static_cast<Eigen::Index>(t.size());
    const GaussLegendre<Real> rule(quad.n_points);
    const bool adaptive = quad.rule == QuadratureRule::Adaptive;

    Real t_max = 0.0;
    for (Real tj : t) {
        t_max = std::max(t_max, std::abs(tj));
    }
    // Each initial panel spans at most (n_points - 16) radians of phase.
    const Real phase_per_panel = std::max<Real>(quad.n_points - 16, 8);
    const int initial_panels = std::max(4, static_cast<int>(std::ceil(omega_max * t_max / phase_per_panel)));

    // L1 norm of the spectra bounds |C(t)| and sets the absolute tolerance.
    auto norm_acc = [&](Real omega, Real w, Eigen::Ref<VectorXr> acc) {
        acc[0] += w * (std::abs(cos_weight(omega)) + std::abs(sin_weight(omega)));
    };
    const auto norm = integrate_composite(norm_acc, 0.0, omega_max, 1, rule, 4, adaptive, 1e-12, quad.max_panels);
    const Real scale = std::max(norm.value[0], std::numeric_limits<Real>::min());

    const FourierKernel kernel(t);
    auto acc = [&](Real omega, Real w, Eigen::Ref<VectorXr> out) {
        const Real cw = w * cos_weight(omega);
        const Real sw = w * sin_weight(omega);
        kernel.for_each_phase(omega, [&](std::size_t j, Real c, Real s) {
            out[static_cast<Eigen::Index>(j)] += cw * c;
            out[n + static_cast<Eigen::Index>(j)] += sw * s;
        });
    };
    const Real abs_tol = quad.rel_tol * scale;
    const auto result = integrate_composite(acc, 0.0, omega_max, 2 * n, rule, initial_panels, adaptive, abs_tol,
                                            std::max(quad.max_panels, initial_panels));
    if (adaptive && (!result.converged || result.error_estimate > abs_tol)) {
        std::ostringstream msg;
        msg << "bath correlation quadrature did not converge: estimated error " << result.error_estimate
            << " exceeds tolerance " << abs_tol << " after " << result.panels << " panels";
        throw QuadratureError(msg.str(), result.error_estimate);
    }
    return {result.value.head(n) / kPi, result.value.tail(n) / kPi};
}

} // namespace

std::vector<std::string> BathSpec::violations(const std::string& path) const
{
    std::vector<std::string> out;
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        out.push_back(path + ".alpha: must be finite and > 0");
    }
    if (!(omega_c > 0.0) || !std::isfinite(omega_c)) {
        out.push_back(path + ".omega_c: must be finite and > 0");
    }
    if (!(beta > 0.0)) {
        out.push_back(path + ".beta: must be > 0 (use \"inf\" for zero temperature)");
    }
    if (!is_half_integer_spin(spin_s)) {
        out.push_back(path + ".spin_s: must be a positive integer or half-integer");
    }
    return out;
}

void BathSpec::validate() const
{
    const auto errs = violations();
    if (!errs.empty()) {
        std::string msg = "invalid bath specification:";
        for (const auto& e : errs) {
            msg += "\n  " + e;
        }
        throw ValidationError(msg);
    }
}

Real ohmic_j(Real omega, const BathSpec& spec)
{
    if (omega < 0.0) {
        throw DomainError("ohmic_j: negative frequency " + std::to_string(omega));
    }
    return 0.5 * kPi * spec.alpha * omega * std::exp(-omega / spec.omega_c);
}

SpinMoments spin_z_moments(Real spin_s, Real beta_omega)
{
    if (std::isinf(beta_omega)) {
        const Real m = beta_omega > 0 ? -spin_s : spin_s;
        return {m, spin_s * spin_s};
    }
    const int levels = level_count(spin_s);
    // exponent of level m is -x m; the largest sits at whichever end x favours.
    const Real max_exponent = std::abs(beta_omega) * spin_s;
    Real z = 0.0, zm = 0.0, zm2 = 0.0;
    for (int j = 0; j < levels; ++j) {
        const Real m = -spin_s + j;
        const Real w = std::exp(-beta_omega * m - max_exponent);
        z += w;
        zm += w * m;
        zm2 += w * m * m;
    }
    return {zm / z, zm2 / z};
}

Real spin_log_partition(Real spin_s, Real beta_omega)
{
    const int levels = level_count(spin_s);
    const Real max_exponent = std::abs(beta_omega) * spin_s;
    Real z = 0.0;
    for (int j = 0; j < levels; ++j) {
        z += std::exp(-beta_omega * (-spin_s + j) - max_exponent);
    }
    return max_exponent + std::log(z);
}

Real spin_partition_cosh_form(Real spin_s, Real beta_omega)
{
    const Real integer_part = std::floor(spin_s);
    const Real fractional_part = spin_s - integer_part;
    const bool integer_spin = fractional_part < 0.25;
    Real z = 0.0;
    for (int k = 0; k <= static_cast<int>(integer_part); ++k) {
        z += 2.0 * std::cosh((k + fractional_part) * beta_omega);
    }
    return integer_spin ? z - 1.0 : z;
}

Real zeta_factor(Real omega, const BathSpec& spec)
{
    if (omega == 0.0) {
        return 0.0;
    }
    const Real x = spec.zero_temperature() ? kInfiniteBeta : spec.beta * omega;
    const SpinMoments m = spin_z_moments(spec.spin_s, x);
    const Real s = spec.spin_s;
    const Real transverse = s * (s + 1.0) - m.mean_sz2;
    const Real prefactor = std::isinf(x) ? 0.5 : -0.5 * std::expm1(-x);
    return prefactor * (transverse - m.mean_sz) / transverse;
}

Real effective_j(Real omega, const BathSpec& spec)
{
    const Real j = ohmic_j(omega, spec);
    if (spec.environment == Environment::Boson || j == 0.0) {
        return j;
    }
    return j * zeta_factor(omega, spec);
}

Real symmetrized_spectrum(Real omega, const BathSpec& spec)
{
    if (spec.zero_temperature()) {
        return effective_j(omega, spec);
    }
    if (omega == 0.0) {
        return spec.environment == Environment::Boson ? kPi * spec.alpha / spec.beta : 0.0;
    }
    return effective_j(omega, spec) / std::tanh(0.5 * spec.beta * omega);
}

Real resolved_omega_max(const BathSpec& spec, const QuadratureSpec& quad)
{
    return quad.omega_max > 0.0 ? quad.omega_max : 40.0 * spec.omega_c;
}

VectorXc bath_tcf(const std::vector<Real>& t, const BathSpec& spec, const QuadratureSpec& quad)
{
    for (Real tj : t) {
        if (tj < 0.0) {
            throw DomainError("bath_tcf: negative time " + std::to_string(tj));
        }
    }
    auto [re, im] = fourier_integrals(
        t, resolved_omega_max(spec, quad), quad, [&](Real omega) { return symmetrized_spectrum(omega, spec); },
        [&](Real omega) { return -effective_j(omega, spec); });
    VectorXc c(re.size());
    c.real() = re;
    c.imag() = im;
    return c;
}

VectorXc bath_tcf_fermionic(const std::vector<Real>& t, const BathSpec& spec, const QuadratureSpec& quad)
{
    if (spec.environment != Environment::Spin || std::abs(spec.spin_s - 0.5) > 1e-12) {
        throw DomainError("bath_tcf_fermionic: only defined for a spin-1/2 bath");
    }
    // Fold omega < 0 onto omega > 0 with the even J'. The two branches carry
    // Fermi weights f(+omega) for exp(-i omega t) and f(-omega) for exp(+i omega t).
    auto fermi = [&](Real omega) { return 1.0 / (1.0 + std::exp(-spec.beta * omega)); };
    auto [re, im] = fourier_integrals(
        t, resolved_omega_max(spec, quad), quad,
        [&](Real omega) { return ohmic_j(omega, spec) * (fermi(omega) + fermi(-omega)); },
        [&](Real omega) { return ohmic_j(omega, spec) * (fermi(-omega) - fermi(omega)); });
    VectorXc c(re.size());
    c.real() = re;
    c.imag() = im;
    return c;
}

std::vector<Real> uniform_grid(Real t_max, Real dt)
{
    if (!(dt > 0.0) || t_max < 0.0) {
        throw DomainError("uniform_grid: need dt > 0 and t_max >= 0");
    }
    const auto n = static_cast<std::size_t>(std::llround(t_max / dt));
    std::vector<Real> t(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        t[j] = static_cast<Real>(j) * dt;
    }
    return t;
}

} // namespace spinbath
