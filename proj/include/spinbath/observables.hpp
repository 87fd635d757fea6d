#ifndef SPINBATH_OBSERVABLES_HPP
#define SPINBATH_OBSERVABLES_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "bath.hpp"
#include "types.hpp"

namespace spinbath
{

/// Recorded observables of one propagation. All series share `times`.
struct Trajectory
{
    std::vector<Real> times;
    std::vector<Real> population;
    std::vector<Real> entropy;
    std::vector<Real> coherence;
    std::vector<long> n_active;
    std::vector<int> max_tier;

    // Conservation diagnostics over all recorded states.
    Real max_trace_drift = 0.0;
    Real max_hermiticity_residue = 0.0;
    long steps = 0;
    /// Recorded states whose tiny negative eigenvalues were clipped for the entropy.
    long clipped_states = 0;

    Matrix2c final_state = Matrix2c::Zero();

    std::string config_hash;

    std::size_t size() const { return times.size(); }

    /// Appends one record computed from the reduced density matrix.
    void record(Real t, const Matrix2c& rho, long active, int tier);
};

/// Tr[sigma_z rho]. Throws Error if the imaginary residue exceeds 1e-8.
Real population(const Matrix2c& rho);

/// -Tr[rho ln rho] of the Hermitian part. Eigenvalues in [-1e-6, 0) are
/// clipped to zero; anything more negative throws DomainError.
Real von_neumann_entropy(const Matrix2c& rho);

/// Eigenvalues of the Hermitian part of a 2x2 matrix, ascending.
std::pair<Real, Real> hermitian_eigenvalues(const Matrix2c& m);

/// Decoherence exponent Gamma(t) = 4 Int_0^t (t - s) Re C(s) ds for pure
/// dephasing with Q = sigma_z, integrating the exact correlation function in time.
Real pure_dephasing_exponent(Real t, const BathSpec& spec, const QuadratureSpec& quad = {});

/// The same exponent in the frequency domain:
/// (4/pi) Int J_eff coth(beta omega/2) (1 - cos omega t) / omega^2 d omega.
Real pure_dephasing_exponent_spectral(Real t, const BathSpec& spec, const QuadratureSpec& quad = {});

enum class BoltzmannStatus
{
    Ok,
    Inconclusive
};

struct BoltzmannReport
{
    BoltzmannStatus status = BoltzmannStatus::Inconclusive;
    /// Populations of the lower and upper H_S eigenstates.
    Real target_lower = 0.5;
    Real target_upper = 0.5;
    Real final_lower = 0.0;
    Real final_upper = 0.0;
    Real relative_deviation = 0.0;
    std::string note;
};

/// Thermal populations e^{-beta E}/Z of a two-level Hamiltonian, lower level first.
std::pair<Real, Real> boltzmann_populations(const Matrix2c& hamiltonian, Real beta);

/// Compares the final reduced state (traj.final_state) against the Boltzmann populations of H_S.
/// A plateau is required: |dP/dt| <= 1e-4 over the final 10% of the run.
BoltzmannReport boltzmann_check(const Trajectory& traj, const Matrix2c& hamiltonian, Real beta);

/// CSV with header t,P,S_vN,coh_abs,n_active and 12 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

} // namespace spinbath

#endif
