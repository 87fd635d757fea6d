#ifndef SPINBATH_DEOM_HPP
#define SPINBATH_DEOM_HPP

#include <functional>
#include <string>
#include <vector>

#include "expfit.hpp"
#include "hierarchy.hpp"
#include "observables.hpp"
#include "types.hpp"

namespace spinbath
{

/// Pauli matrices in the basis {|0>, |1>} with sigma_z |0> = |0>.
Matrix2c pauli_x();
Matrix2c pauli_z();

/// Two-level system H_S = epsilon sigma_z + delta sigma_x coupled through q_op.
struct SystemSpec
{
    Real epsilon = 0.0;
    Real delta = 1.0;
    Matrix2c q_op = pauli_z();
    Matrix2c rho0 = (Matrix2c() << 1.0, 0.0, 0.0, 0.0).finished();

    Matrix2c hamiltonian() const;
    std::vector<std::string> violations(const std::string& path = "system") const;
};

struct HierarchyParams
{
    int tier = 20;
    Real dt = 0.0025;
    /// Filtering threshold on the max-norm of a DDO; 0 disables filtering.
    Real filter_tol = 5e-7;
    Real t_final = 10.0;
    /// Record observables every `record_stride` steps.
    int record_stride = 4;
    long ddo_cap = kDefaultDdoCap;
    /// Propagate DDOs divided by prod_k sqrt(n_k! |eta_k|^{n_k}).
    bool scaled = true;

    std::vector<std::string> violations(const std::string& path = "hierarchy") const;
    long total_steps() const;
};

/// Per-term coefficients of the hierarchy couplings.
struct DeomCoefficients
{
    VectorXc eta_prime;
    VectorXc eta_dprime;
    VectorXc gamma;
    /// up[k][m]: weight of rho_{n+e_k} in d rho_n when n_k = m.
    std::vector<std::vector<Real>> up;
    /// down[k][m]: weight of rho_{n-e_k} in d rho_n when n_k = m.
    std::vector<std::vector<Real>> down;

    int size() const { return static_cast<int>(gamma.size()); }
};

/// eta'_k = (eta_k + conj(eta_{kbar}))/2 and eta''_k = (eta_k - conj(eta_{kbar}))/(2i),
/// with the neighbor weights for occupations up to `tier`. Unscaled weights are
/// up = 1 and down = n_k.
DeomCoefficients deom_coefficients(const ExponentialSeries& series, int tier = 0, bool scaled = false);

/// Time derivative of every active DDO, indexed by slot. Dormant slots get zero.
std::vector<Matrix2c> deom_rhs(DdoStore& store, const SystemSpec& sys, const DeomCoefficients& coeffs);

/// One classical RK-4 step over the active slots.
void rk4_step(DdoStore& store, const SystemSpec& sys, const DeomCoefficients& coeffs, Real dt);

/// Removes non-root DDOs whose max-norm is below tol. Returns the number pruned.
long filter_prune(DdoStore& store, Real tol);

/// Hooks into a running propagation.
struct PropagationControl
{
    /// Checkpoint file written every `checkpoint_every` steps (0 disables).
    std::string checkpoint_path;
    long checkpoint_every = 0;
    /// Checkpoint to resume from; empty starts at t = 0.
    std::string resume_path;
    /// Called after each recorded sample.
    std::function<void(const Trajectory&)> on_record;
};

/// Propagates the factorized initial state rho0 (x) bath equilibrium to t_final.
/// Throws DivergenceError when the root norm exceeds 10 or a DDO turns non-finite.
Trajectory propagate(const SystemSpec& sys, const ExponentialSeries& series, const HierarchyParams& params,
                     const PropagationControl& control = {});

} // namespace spinbath

#endif
