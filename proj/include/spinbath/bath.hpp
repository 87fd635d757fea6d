#ifndef SPINBATH_BATH_HPP
#define SPINBATH_BATH_HPP

#include <string>
#include <vector>

#include "quadrature.hpp"
#include "types.hpp"

namespace spinbath
{

enum class SpectralFamily
{
    OhmicExponential
};

/// Statistics of the microscopic bath. A spin bath enters through the
/// temperature- and S-dependent effective density; a boson bath uses the
/// bare density directly.
enum class Environment
{
    Spin,
    Boson
};

struct BathSpec
{
    SpectralFamily family = SpectralFamily::OhmicExponential;
    Environment environment = Environment::Spin;
    Real alpha = 0.5;
    Real omega_c = 1.0;
    /// kInfiniteBeta encodes zero temperature.
    Real beta = kInfiniteBeta;
    Real spin_s = 0.5;

    bool zero_temperature() const { return is_zero_temperature(beta); }

    /// Every violated invariant, with field names prefixed by `path`.
    std::vector<std::string> violations(const std::string& path = "bath") const;
    void validate() const;
};

struct SpinMoments
{
    Real mean_sz = 0.0;
    Real mean_sz2 = 0.0;
};

/// J(omega) = (pi/2) alpha omega exp(-omega/omega_c). Throws DomainError for omega < 0.
Real ohmic_j(Real omega, const BathSpec& spec);

/// <s_z> and <s_z^2> of one spin-S level system with Hamiltonian omega s_z,
/// as a function of x = beta*omega (x may be +infinity).
SpinMoments spin_z_moments(Real spin_s, Real beta_omega);

/// ln Z for one spin: direct sum over the 2S+1 levels, shifted for stability.
Real spin_log_partition(Real spin_s, Real beta_omega);

/// Z for one spin from the cosh-sum closed form over integer and fractional parts of S.
Real spin_partition_cosh_form(Real spin_s, Real beta_omega);

/// Ratio J_eff / J' for a spin-S bath; tanh(beta omega / 2) at S = 1/2.
/// Returns the continuous extension 0 at omega = 0.
Real zeta_factor(Real omega, const BathSpec& spec);

/// Effective bosonic spectral density on omega >= 0.
Real effective_j(Real omega, const BathSpec& spec);

/// J_eff(omega) coth(beta omega / 2): the weight of cos(omega t) in Re C(t).
/// Finite as omega -> 0 for every environment.
Real symmetrized_spectrum(Real omega, const BathSpec& spec);

/// Quadrature upper limit actually used for a bath.
Real resolved_omega_max(const BathSpec& spec, const QuadratureSpec& quad);

/// Bath correlation function on the grid t from the bosonic FDT:
/// C(t) = (1/pi) Int_0^inf J_eff [coth(beta omega/2) cos(omega t) - i sin(omega t)].
/// Throws QuadratureError when the tolerance is not met.
VectorXc bath_tcf(const std::vector<Real>& t, const BathSpec& spec, const QuadratureSpec& quad = {});

/// Same correlation function from the fermionic form with an even J' and the
/// 1 + exp(-beta omega) denominator. Only meaningful for a spin-1/2 bath.
VectorXc bath_tcf_fermionic(const std::vector<Real>& t, const BathSpec& spec, const QuadratureSpec& quad = {});

/// Uniform grid 0, dt, ..., n*dt with n = round(t_max / dt).
std::vector<Real> uniform_grid(Real t_max, Real dt);

} // namespace spinbath

#endif
