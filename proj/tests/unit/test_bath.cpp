#include <doctest.h>

#include <cmath>

#include "spinbath/bath.hpp"

using namespace spinbath;

namespace
{

BathSpec ohmic(Real alpha, Real omega_c, Real beta = kInfiniteBeta, Real s = 0.5)
{
    BathSpec b;
    b.alpha = alpha;
    b.omega_c = omega_c;
    b.beta = beta;
    b.spin_s = s;
    return b;
}

// Zero-temperature Ohmic correlation function in closed form.
Complex ohmic_tcf_zero_t(Real t, Real alpha, Real omega_c)
{
    const Complex d(1.0, omega_c * t);
    return 0.5 * alpha * omega_c * omega_c / (d * d);
}

} // namespace

TEST_CASE("ohmic density values")
{
    const BathSpec b = ohmic(0.5, 1.0);
    CHECK(ohmic_j(0.0, b) == 0.0);
    CHECK(ohmic_j(1.0, b) == doctest::Approx(kPi / (4.0 * std::exp(1.0))).epsilon(1e-14));
    CHECK(ohmic_j(1.0, b) == doctest::Approx(0.2889318374).epsilon(1e-9));
    CHECK(ohmic_j(1.0, b) > ohmic_j(1.0 - 1e-3, b));
    CHECK(ohmic_j(1.0, b) > ohmic_j(1.0 + 1e-3, b));
    CHECK_THROWS_AS(ohmic_j(-0.1, b), DomainError);
}

TEST_CASE("spin moments")
{
    auto m = spin_z_moments(0.5, 0.0);
    CHECK(m.mean_sz == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(m.mean_sz2 == doctest::Approx(0.25));

    m = spin_z_moments(0.5, 1.0);
    CHECK(m.mean_sz == doctest::Approx(-0.2310585786300049).epsilon(1e-13));
    CHECK(m.mean_sz2 == doctest::Approx(0.25).epsilon(1e-14));

    m = spin_z_moments(1.0, kInfiniteBeta);
    CHECK(m.mean_sz == -1.0);
    CHECK(m.mean_sz2 == 1.0);

    // No overflow deep in the ordered regime.
    m = spin_z_moments(5.0, 800.0);
    CHECK(m.mean_sz == doctest::Approx(-5.0));
}

TEST_CASE("moments are log-derivatives of the partition function")
{
    const Real h = 1e-4;
    for (Real s : {0.5, 1.0, 1.5, 5.0}) {
        for (Real x : {0.05, 0.3, 1.0, 3.0}) {
            const Real fd = (spin_log_partition(s, x + h) - spin_log_partition(s, x - h)) / (2.0 * h);
            CHECK(std::abs(spin_z_moments(s, x).mean_sz + fd) <= 1e-6);
            const Real fd2 = (spin_log_partition(s, x + h) - 2.0 * spin_log_partition(s, x) +
                              spin_log_partition(s, x - h)) /
                             (h * h);
            const auto m = spin_z_moments(s, x);
            CHECK(std::abs(m.mean_sz2 - m.mean_sz * m.mean_sz - fd2) <= 1e-5);
            CHECK(std::log(spin_partition_cosh_form(s, x)) == doctest::Approx(spin_log_partition(s, x)).epsilon(1e-12));
        }
    }
}

TEST_CASE("moment invariants")
{
    for (Real s : {0.5, 1.0, 2.5, 7.0}) {
        for (Real x : {0.0, 0.2, 2.0, 20.0}) {
            const auto m = spin_z_moments(s, x);
            CHECK(m.mean_sz <= 1e-15);
            CHECK(m.mean_sz >= -s);
            CHECK(m.mean_sz2 <= s * s + 1e-12);
            CHECK(m.mean_sz2 >= m.mean_sz * m.mean_sz - 1e-12);
        }
    }
}

TEST_CASE("high-spin geometric closed form")
{
    const Real s = 100.0;
    const Real x = 1.0;
    const Real closed = 1.0 - (1.0 / s) * std::exp(-x) / (1.0 - std::exp(-x));
    CHECK(std::abs(-spin_z_moments(s, x).mean_sz / s - closed) <= 1e-6);
}

TEST_CASE("zeta factor")
{
    BathSpec b = ohmic(0.5, 1.0, 1.0);
    CHECK(zeta_factor(1.0, b) == doctest::Approx(0.4621171572600098).epsilon(1e-13));
    CHECK(zeta_factor(0.0, b) == 0.0);

    Real worst = 0.0;
    for (int i = 0; i <= 2000; ++i) {
        const Real x = 0.01 * std::pow(5000.0, i / 2000.0);
        worst = std::max(worst, std::abs(zeta_factor(x, b) - std::tanh(0.5 * x)));
    }
    CHECK(worst <= 1e-12);

    for (Real s : {0.5, 1.0, 1.5, 5.0}) {
        BathSpec cold = ohmic(0.5, 1.0, kInfiniteBeta, s);
        CHECK(zeta_factor(0.3, cold) == doctest::Approx(1.0).epsilon(1e-15));
        BathSpec large = ohmic(0.5, 1.0, 1e4, s);
        CHECK(zeta_factor(0.3, large) == doctest::Approx(1.0).epsilon(1e-12));
    }

    // Independent 30-digit evaluation of the level sums for S = 3/2 at beta omega = 1.
    BathSpec s32 = ohmic(0.5, 1.0, 1.0, 1.5);
    CHECK(zeta_factor(1.0, s32) == doctest::Approx(0.462117157260009758502).epsilon(1e-13));

    BathSpec s100 = ohmic(0.5, 1.0, 1.0, 100.0);
    CHECK(std::abs(zeta_factor(1.0, s100) / std::tanh(0.5) - 1.0) <= 0.01);
}

TEST_CASE("effective density")
{
    BathSpec b = ohmic(0.5, 1.0);
    for (Real w : {0.1, 1.0, 7.0}) {
        CHECK(effective_j(w, b) == doctest::Approx(ohmic_j(w, b)).epsilon(1e-15));
    }
    CHECK(effective_j(0.0, b) == 0.0);
    b.beta = 2.0;
    CHECK(effective_j(1.0, b) == doctest::Approx(ohmic_j(1.0, b) * std::tanh(1.0)).epsilon(1e-13));
    b.environment = Environment::Boson;
    CHECK(effective_j(1.0, b) == ohmic_j(1.0, b));
    CHECK(symmetrized_spectrum(0.0, b) == doctest::Approx(kPi * 0.5 / 2.0));
}

TEST_CASE("bath spec validation")
{
    BathSpec b;
    CHECK(b.violations().empty());
    b.alpha = -1.0;
    b.omega_c = 0.0;
    b.beta = -2.0;
    b.spin_s = 0.7;
    const auto v = b.violations();
    CHECK(v.size() == 4);
    CHECK(v[0].find("bath.alpha") == 0);
    CHECK_THROWS_AS(b.validate(), ValidationError);
}

TEST_CASE("correlation function against the closed form")
{
    const BathSpec b = ohmic(0.5, 1.0);
    const std::vector<Real> t = {0.0, 0.1, 0.7, 2.0, 5.0, 13.0, 40.0};
    const VectorXc c = bath_tcf(t, b);
    CHECK(c[0].real() == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(c[0].imag() == 0.0);
    for (std::size_t j = 0; j < t.size(); ++j) {
        CHECK(std::abs(c[static_cast<Eigen::Index>(j)] - ohmic_tcf_zero_t(t[j], 0.5, 1.0)) <= 1e-9);
    }
    CHECK_THROWS_AS(bath_tcf({-1.0}, b), DomainError);
}

TEST_CASE("uniform grid recurrence matches direct evaluation")
{
    const BathSpec b = ohmic(0.3, 2.0, 1.5);
    const auto grid = uniform_grid(40.0, 0.01);
    CHECK(grid.size() == 4001);
    const VectorXc fast = bath_tcf(grid, b);
    std::vector<Real> pick = {grid[0], grid[1], grid[777], grid[2500], grid[4000]};
    const VectorXc slow = bath_tcf(pick, b);
    CHECK(std::abs(fast[0] - slow[0]) <= 1e-10);
    CHECK(std::abs(fast[1] - slow[1]) <= 1e-10);
    CHECK(std::abs(fast[777] - slow[2]) <= 1e-10);
    CHECK(std::abs(fast[2500] - slow[3]) <= 1e-10);
    CHECK(std::abs(fast[4000] - slow[4]) <= 1e-10);
}

TEST_CASE("spin-1/2 real part is temperature independent")
{
    const auto grid = uniform_grid(10.0, 0.05);
    const VectorXc c1 = bath_tcf(grid, ohmic(0.5, 1.0, 1.0));
    const VectorXc c5 = bath_tcf(grid, ohmic(0.5, 1.0, 5.0));
    CHECK((c1.real() - c5.real()).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((c1.imag() - c5.imag()).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("fermionic and bosonic forms agree")
{
    const auto grid = uniform_grid(10.0, 0.1);
    for (Real beta : {1.0, 5.0, kInfiniteBeta}) {
        const BathSpec b = ohmic(0.5, 1.0, beta);
        CHECK((bath_tcf(grid, b) - bath_tcf_fermionic(grid, b)).cwiseAbs().maxCoeff() <= 1e-9);
    }
    CHECK_THROWS(bath_tcf_fermionic(grid, ohmic(0.5, 1.0, 1.0, 1.0)));
}
