#include "spinbath/observables.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <tuple>

#include <Eigen/Eigenvalues>

namespace spinbath
{

namespace
{

constexpr Real kUnphysicalEigenvalue = -1e-6;

Real xlogx(Real x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// Gauss-Legendre estimate of Int_0^t (t - s) Re C(s) ds on `panels` panels.
Real dephasing_time_integral(Real t, int panels, const BathSpec& spec, const QuadratureSpec& quad)
{
    static const GaussLegendre<Real> rule(16);
    std::vector<Real> nodes;
    std::vector<Real> weights;
    nodes.reserve(static_cast<std::size_t>(panels) * rule.size());
    weights.reserve(nodes.capacity());
    const Real h = t / panels;
    for (int p = 0; p < panels; ++p) {
        const Real a = p * h;
        for (int i = 0; i < rule.size(); ++i) {
            nodes.push_back(a + 0.5 * h * (rule.nodes[i] + 1.0));
            weights.push_back(0.5 * h * rule.weights[i]);
        }
    }
    const VectorXc c = bath_tcf(nodes, spec, quad);
    Real sum = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        sum += weights[j] * (t - nodes[j]) * c[static_cast<Eigen::Index>(j)].real();
    }
    return sum;
}

} // namespace

std::pair<Real, Real> hermitian_eigenvalues(const Matrix2c& m)
{
    const Real a = m(0, 0).real();
    const Real d = m(1, 1).real();
    const Complex b = 0.5 * (m(0, 1) + std::conj(m(1, 0)));
    const Real mean = 0.5 * (a + d);
    const Real radius = std::hypot(0.5 * (a - d), std::abs(b));
    return {mean - radius, mean + radius};
}

Real population(const Matrix2c& rho)
{
    const Complex p = rho(0, 0) - rho(1, 1);
    if (std::abs(p.imag()) > 1e-8) {
        throw Error("population: imaginary residue " + std::to_string(p.imag()) + " in Tr[sigma_z rho]");
    }
    return p.real();
}

Real von_neumann_entropy(const Matrix2c& rho)
{
    auto [lo, hi] = hermitian_eigenvalues(rho);
    if (lo < kUnphysicalEigenvalue) {
        throw DomainError("von_neumann_entropy: eigenvalue " + std::to_string(lo) + " below -1e-6, state is unphysical");
    }
    return 0.0 - (xlogx(std::max(lo, 0.0)) + xlogx(std::max(hi, 0.0)));
}

void Trajectory::record(Real t, const Matrix2c& rho, long active, int tier)
{
    times.push_back(t);
    population.push_back(spinbath::population(rho));
    if (hermitian_eigenvalues(rho).first < 0.0) {
        ++clipped_states;
    }
    entropy.push_back(von_neumann_entropy(rho));
    coherence.push_back(std::abs(rho(0, 1)));
    n_active.push_back(active);
    max_tier.push_back(tier);
    max_trace_drift = std::max(max_trace_drift, std::abs(rho.trace() - 1.0));
    max_hermiticity_residue = std::max(max_hermiticity_residue, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
    final_state = rho;
}

Real pure_dephasing_exponent(Real t, const BathSpec& spec, const QuadratureSpec& quad)
{
    if (t < 0.0) {
        throw DomainError("pure_dephasing_exponent: negative time");
    }
    if (t == 0.0) {
        return 0.0;
    }
    // Re C varies on the scale 1/omega_c; start near 4 panels per unit of omega_c t
    // and double until two successive estimates agree.
    int panels = std::max(4, static_cast<int>(std::ceil(4.0 * spec.omega_c * t)));
    Real previous = dephasing_time_integral(t, panels, spec, quad);
    for (int round = 0; round < 12; ++round) {
        panels *= 2;
        const Real current = dephasing_time_integral(t, panels, spec, quad);
        if (std::abs(current - previous) <= 1e-12 * std::abs(current) + 1e-300) {
            return 4.0 * current;
        }
        previous = current;
    }
    throw QuadratureError("pure_dephasing_exponent: time integral did not converge", std::abs(previous));
}

Real pure_dephasing_exponent_spectral(Real t, const BathSpec& spec, const QuadratureSpec& quad)
{
    if (t < 0.0) {
        throw DomainError("pure_dephasing_exponent_spectral: negative time");
    }
    if (t == 0.0) {
        return 0.0;
    }
    const Real omega_max = resolved_omega_max(spec, quad);
    const GaussLegendre<Real> rule(quad.n_points);
    auto acc = [&](Real omega, Real w, Eigen::Ref<VectorXr> out) {
        const Real s = std::sin(0.5 * omega * t);
        // (1 - cos wt) / w^2 = 2 sin^2(wt/2) / w^2
        out[0] += w * symmetrized_spectrum(omega, spec) * 2.0 * s * s / (omega * omega);
    };
    const int initial = std::max(4, static_cast<int>(std::ceil(omega_max * t / std::max(quad.n_points - 16, 8))));
    const auto r = integrate_composite(acc, 0.0, omega_max, 1, rule, initial, true, 1e-14 * t * t * spec.alpha,
                                       std::max(quad.max_panels, initial));
    return 4.0 / kPi * r.value[0];
}

std::pair<Real, Real> boltzmann_populations(const Matrix2c& hamiltonian, Real beta)
{
    auto [lo, hi] = hermitian_eigenvalues(hamiltonian);
    if (is_zero_temperature(beta)) {
        return hi > lo ? std::pair<Real, Real>{1.0, 0.0} : std::pair<Real, Real>{0.5, 0.5};
    }
    const Real ratio = std::exp(-beta * (hi - lo));
    return {1.0 / (1.0 + ratio), ratio / (1.0 + ratio)};
}

BoltzmannReport boltzmann_check(const Trajectory& traj, const Matrix2c& hamiltonian, Real beta)
{
    BoltzmannReport report;
    std::tie(report.target_lower, report.target_upper) = boltzmann_populations(hamiltonian, beta);

    const std::size_t n = traj.size();
    if (n < 3) {
        report.note = "trajectory too short for plateau detection";
        return report;
    }
    const Real t_end = traj.times.back();
    const Real window_start = t_end - 0.1 * (t_end - traj.times.front());
    Real max_slope = 0.0;
    std::size_t points = 0;
    for (std::size_t j = 1; j < n; ++j) {
        if (traj.times[j - 1] < window_start) {
            continue;
        }
        const Real dt = traj.times[j] - traj.times[j - 1];
        max_slope = std::max(max_slope, std::abs(traj.population[j] - traj.population[j - 1]) / dt);
        ++points;
    }
    if (points == 0 || max_slope > 1e-4) {
        report.note = "no plateau: max |dP/dt| over the final 10% is " + std::to_string(max_slope);
        return report;
    }

    const Eigen::SelfAdjointEigenSolver<Matrix2c> eig(0.5 * (hamiltonian + hamiltonian.adjoint()));
    const Eigen::Vector2cd lower = eig.eigenvectors().col(0);
    const Eigen::Vector2cd upper = eig.eigenvectors().col(1);
    report.final_lower = (lower.adjoint() * traj.final_state * lower)(0, 0).real();
    report.final_upper = (upper.adjoint() * traj.final_state * upper)(0, 0).real();
    report.relative_deviation = std::abs(report.final_lower - report.target_lower) / report.target_lower;
    report.status = BoltzmannStatus::Ok;
    return report;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj)
{
    out << "t,P,S_vN,coh_abs,n_active\n";
    char line[160];
    for (std::size_t j = 0; j < traj.size(); ++j) {
        std::snprintf(line, sizeof line, "%.12g,%.12g,%.12g,%.12g,%ld\n", traj.times[j], traj.population[j],
                      traj.entropy[j], traj.coherence[j], traj.n_active[j]);
        out << line;
    }
}

} // namespace spinbath
