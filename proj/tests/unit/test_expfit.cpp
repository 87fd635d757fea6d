#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "spinbath/expfit.hpp"

using namespace spinbath;

namespace
{

VectorXr sample(Real t_max, Real dt, const std::function<Real(Real)>& f)
{
    const auto grid = uniform_grid(t_max, dt);
    VectorXr v(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t j = 0; j < grid.size(); ++j) {
        v[static_cast<Eigen::Index>(j)] = f(grid[j]);
    }
    return v;
}

// Distance between two term sets after matching each expected term to its nearest fitted rate.
Real term_distance(std::vector<ExponentialTerm> fit, const std::vector<ExponentialTerm>& expected)
{
    Real worst = 0.0;
    for (const auto& e : expected) {
        auto it = std::min_element(fit.begin(), fit.end(), [&](const auto& a, const auto& b) {
            return std::abs(a.gamma - e.gamma) < std::abs(b.gamma - e.gamma);
        });
        worst = std::max({worst, std::abs(it->gamma - e.gamma), std::abs(it->eta - e.eta)});
        fit.erase(it);
    }
    return worst;
}

Real reconstruct_imag(const std::vector<ExponentialTerm>& terms, Real t_max, Real dt)
{
    Real worst = 0.0;
    for (Real t : uniform_grid(t_max, dt)) {
        Complex v = 0.0;
        for (const auto& term : terms) {
            v += term.eta * std::exp(-term.gamma * t);
        }
        worst = std::max(worst, std::abs(v.imag()));
    }
    return worst;
}

BathSpec ohmic(Real alpha, Real omega_c, Real beta = kInfiniteBeta)
{
    BathSpec b;
    b.alpha = alpha;
    b.omega_c = omega_c;
    b.beta = beta;
    return b;
}

} // namespace

TEST_CASE("prony recovers a single decay")
{
    const auto v = sample(40.0, 0.01, [](Real t) { return std::exp(-t); });
    const auto terms = prony_fit(v, 0.01, 1);
    REQUIRE(terms.size() == 1);
    CHECK(std::abs(terms[0].eta - 1.0) <= 1e-10);
    CHECK(std::abs(terms[0].gamma - 1.0) <= 1e-10);
}

TEST_CASE("prony recovers a cosine as a conjugate pair")
{
    const auto v = sample(40.0, 0.01, [](Real t) { return std::cos(t); });
    const auto terms = prony_fit(v, 0.01, 2);
    CHECK(term_distance(terms, {{0.5, Complex(0.0, 1.0)}, {0.5, Complex(0.0, -1.0)}}) <= 1e-8);
}

TEST_CASE("prony recovers a three-term generator")
{
    const auto v = sample(40.0, 0.01, [](Real t) { return 0.7 * std::exp(-0.3 * t) + 0.3 * std::exp(-2.0 * t) * std::cos(5.0 * t); });
    const auto terms = prony_fit(v, 0.01, 3);
    CHECK(term_distance(terms, {{0.7, 0.3}, {0.15, Complex(2.0, 5.0)}, {0.15, Complex(2.0, -5.0)}}) <= 1e-6);
    CHECK(reconstruct_imag(terms, 40.0, 0.01) <= 1e-10);
}

TEST_CASE("prony reports rank deficiency")
{
    const auto v = sample(40.0, 0.01, [](Real t) { return std::exp(-t); });
    try {
        prony_fit(v, 0.01, 3);
        FAIL("expected RankError");
    } catch (const RankError& e) {
        CHECK(e.rank() == 1);
        CHECK(std::string(e.what()).find("rank") != std::string::npos);
    }
    CHECK_THROWS_AS(prony_fit(v, 0.01, 0), DomainError);
}

TEST_CASE("prony rates decay and residuals are monotone in k")
{
    const BathSpec b = ohmic(0.5, 1.0);
    FitStrategy s;
    const auto samples = sample_tcf(b, s);
    const VectorXr re = samples.values.real();
    Real previous = std::numeric_limits<Real>::infinity();
    for (int k = 1; k <= 6; ++k) {
        const auto terms = prony_fit(re, samples.dt, k);
        for (const auto& t : terms) {
            CHECK(t.gamma.real() >= 0.0);
        }
        CHECK(reconstruct_imag(terms, 40.0, 0.01) <= 1e-10);
        const Real r = fit_residual(terms, re, samples.dt);
        CHECK(r <= previous);
        previous = r;
    }
}

TEST_CASE("sampling")
{
    FitStrategy s;
    const auto samples = sample_tcf(ohmic(10.0, 1.0), s);
    CHECK(samples.t.size() == 4001);
    CHECK(samples.values.size() == 4001);

    const auto first = sample_tcf(ohmic(0.5, 1.0), s);
    CHECK(first.values[0].real() == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(first.values[0].imag() == 0.0);

    FitStrategy zero = s;
    zero.plateau_time = 0.0;
    CHECK(sample_tcf(ohmic(0.5, 1.0), zero).t.size() == 1);
}

TEST_CASE("fit strategy invariants")
{
    FitStrategy s;
    CHECK(s.violations().empty());
    s.k_real = 0;
    s.dt_sample = -1.0;
    const auto v = s.violations();
    CHECK(v.size() == 2);
    FitStrategy tight;
    tight.plateau_time = 0.5;
    CHECK(tight.violations().size() == 1);
}

TEST_CASE("assemble series partners")
{
    auto one = assemble_series({{1.0, 1.0}}, {});
    REQUIRE(one.size() == 1);
    CHECK(one.conj_partner[0] == 0);
    CHECK(one.terms[0].eta == Complex(1.0));

    auto pair = assemble_series({{0.5, Complex(0.0, 1.0)}, {0.5, Complex(0.0, -1.0)}}, {});
    REQUIRE(pair.size() == 2);
    CHECK(pair.conj_partner[0] == 1);
    CHECK(pair.conj_partner[1] == 0);

    // A lone complex term gets its conjugate created.
    auto lone = assemble_series({{Complex(0.5, 0.1), Complex(1.0, 2.0)}}, {{-0.3, 0.5}});
    REQUIRE(lone.size() == 3);
    CHECK(lone.terms[1].gamma == Complex(1.0, -2.0));
    CHECK(lone.terms[1].eta == Complex(0.5, -0.1));
    CHECK(lone.terms[2].eta == Complex(0.0, -0.3));
    lone.check_invariants();

    CHECK_THROWS_AS(assemble_series({{Complex(0.5, 0.1), Complex(0.0, 1.0)}, {Complex(0.2, 0.0), Complex(0.0, -1.0)}}, {}),
                    Error);
}

TEST_CASE("series invariants on a bath fit")
{
    FitStrategy s;
    s.k_real = 3;
    s.k_imag = 3;
    const auto fit = fit_bath(ohmic(0.5, 1.0, 2.0), s);
    const auto& series = fit.series;
    series.check_invariants();
    for (int k = 0; k < series.size(); ++k) {
        const int p = series.conj_partner[k];
        CHECK(series.conj_partner[p] == k);
        CHECK(series.terms[p].gamma == std::conj(series.terms[k].gamma));
        CHECK(series.terms[k].gamma.real() > 0.0);
    }
    CHECK(std::abs(series.amplitude_sum() - fit.samples.values[0]) <= fit.report.max_abs_error);
    CHECK(fit.report.n_samples == 4001);
}

TEST_CASE("fit report")
{
    const auto grid = uniform_grid(40.0, 0.01);
    TcfSamples exact;
    exact.t = grid;
    exact.dt = 0.01;
    exact.values.resize(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t j = 0; j < grid.size(); ++j) {
        exact.values[static_cast<Eigen::Index>(j)] = Complex(std::exp(-grid[j]), 0.2 * std::exp(-3.0 * grid[j]));
    }
    const auto series = assemble_series(prony_fit(exact.values.real(), 0.01, 1), prony_fit(exact.values.imag(), 0.01, 1));
    CHECK(fit_report(series, exact).max_abs_error <= 1e-10);
}

TEST_CASE("spin-1/2 real-part fit errors do not depend on temperature")
{
    FitStrategy s;
    s.k_real = 3;
    s.k_imag = 3;
    const auto hot = fit_bath(ohmic(0.5, 1.0, 1.0), s);
    const auto cold = fit_bath(ohmic(0.5, 1.0, 5.0), s);
    CHECK(hot.report.max_abs_error_re == doctest::Approx(cold.report.max_abs_error_re).epsilon(1e-6));
}

TEST_CASE("2+2 is worse than 4+4 on the strong-coupling bath")
{
    FitStrategy small;
    small.k_real = 2;
    small.k_imag = 2;
    FitStrategy large;
    large.k_real = 4;
    large.k_imag = 4;
    const BathSpec b = ohmic(10.0, 1.0);
    CHECK(fit_bath(b, small).report.max_abs_error > fit_bath(b, large).report.max_abs_error);
}
