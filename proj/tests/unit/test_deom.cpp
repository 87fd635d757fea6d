#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>

#include "spinbath/deom.hpp"

using namespace spinbath;

namespace
{

const Complex I(0.0, 1.0);

Matrix2c comm(const Matrix2c& a, const Matrix2c& b) { return a * b - b * a; }
Matrix2c anti(const Matrix2c& a, const Matrix2c& b) { return a * b + b * a; }

Matrix2c random_matrix(std::mt19937& rng)
{
    std::normal_distribution<Real> g;
    Matrix2c m;
    for (int i = 0; i < 4; ++i) {
        m(i / 2, i % 2) = Complex(g(rng), g(rng));
    }
    return m;
}

ExponentialSeries small_fit(Real alpha = 0.1, Real omega_c = 1.0, Real beta = kInfiniteBeta, int k = 2)
{
    BathSpec b;
    b.alpha = alpha;
    b.omega_c = omega_c;
    b.beta = beta;
    FitStrategy s;
    s.k_real = k;
    s.k_imag = k;
    return fit_bath(b, s).series;
}

HierarchyParams params(int tier, Real t_final, Real filter = 0.0)
{
    HierarchyParams p;
    p.tier = tier;
    p.t_final = t_final;
    p.filter_tol = filter;
    p.record_stride = 4;
    return p;
}

} // namespace

TEST_CASE("deom coefficients")
{
    ExponentialSeries single;
    single.terms = {{1.0, 1.0}};
    single.conj_partner = {0};
    auto c = deom_coefficients(single);
    CHECK(c.eta_prime[0] == Complex(1.0));
    CHECK(c.eta_dprime[0] == Complex(0.0));

    ExponentialSeries pair;
    pair.terms = {{I, Complex(1.0, 1.0)}, {-I, Complex(1.0, -1.0)}};
    pair.conj_partner = {1, 0};
    c = deom_coefficients(pair);
    for (int k = 0; k < 2; ++k) {
        const Complex eta = pair.terms[k].eta;
        const Complex bar = std::conj(pair.terms[pair.conj_partner[k]].eta);
        CHECK(std::abs(c.eta_prime[k] - (eta + bar) / 2.0) == 0.0);
        CHECK(std::abs(c.eta_dprime[k] - (eta - bar) / (2.0 * I)) == 0.0);
    }
}

TEST_CASE("coefficient sums reproduce C(0)")
{
    BathSpec b;
    b.alpha = 0.5;
    b.beta = 1.0;
    b.environment = Environment::Boson;
    FitStrategy s;
    s.k_real = 3;
    s.k_imag = 3;
    const auto fit = fit_bath(b, s);
    const auto c = deom_coefficients(fit.series);
    const Complex c0 = fit.samples.values[0];
    CHECK(std::abs(c.eta_prime.sum() - c0.real()) <= fit.report.max_abs_error);
    CHECK(std::abs(c.eta_dprime.sum() - c0.imag()) <= fit.report.max_abs_error);
}

TEST_CASE("single-term tier-1 right-hand side")
{
    ExponentialSeries series;
    series.terms = {{Complex(0.7, 0.0), 1.3}};
    series.conj_partner = {0};
    const auto c = deom_coefficients(series, 1, false);
    SystemSpec sys;
    sys.epsilon = 0.4;
    sys.delta = 1.0;

    DdoStore store(1, 1);
    const int one = store.plus(0, 0, true);
    store.activate(one);
    store.compact_active();
    std::mt19937 rng(7);
    store[0] = random_matrix(rng);
    store[one] = random_matrix(rng);

    const auto d = deom_rhs(store, sys, c);
    const Matrix2c h = sys.hamiltonian();
    const Matrix2c q = sys.q_op;
    const Matrix2c root = -I * comm(h, store[0]) - I * comm(q, store[one]);
    const Matrix2c tier1 = -I * comm(h, store[one]) - 1.3 * store[one] -
                           I * (c.eta_prime[0] * comm(q, store[0]) + I * c.eta_dprime[0] * anti(q, store[0]));
    CHECK((d[0] - root).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((d[one] - tier1).cwiseAbs().maxCoeff() <= 1e-14);

    // A general (non-diagonal) coupling operator takes the dense path.
    sys.q_op << 0.3, Complex(0.2, -0.5), Complex(0.2, 0.5), -0.1;
    const auto dense = deom_rhs(store, sys, c);
    const Matrix2c q2 = sys.q_op;
    CHECK((dense[0] - (-I * comm(h, store[0]) - I * comm(q2, store[one]))).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("right-hand side preserves the Hermitian pairing")
{
    ExponentialSeries series;
    series.terms = {{0.8, 2.0}, {Complex(0.3, -0.4), Complex(1.0, 3.0)}, {Complex(0.3, 0.4), Complex(1.0, -3.0)},
                    {Complex(0.0, -0.2), 0.5}};
    series.conj_partner = {0, 2, 1, 3};
    for (bool scaled : {false, true}) {
        const auto c = deom_coefficients(series, 3, scaled);
        SystemSpec sys;
        sys.epsilon = 0.3;
        DdoStore store(4, 3);
        const auto keys = build_index_set(4, 3);
        std::map<int, int> mirror;
        for (const auto& key : keys) {
            store.activate(store.ensure(key));
        }
        store.compact_active();
        std::mt19937 rng(11);
        for (const auto& key : keys) {
            DdoKey bar = key;
            for (int k = 0; k < 4; ++k) {
                bar.n[k] = key.n[series.conj_partner[k]];
            }
            const int s = store.find(key);
            const int sb = store.find(bar);
            mirror[s] = sb;
            if (sb < s) {
                store[s] = store[sb].adjoint();
            } else if (sb == s) {
                const Matrix2c m = random_matrix(rng);
                store[s] = m + m.adjoint();
            } else {
                store[s] = random_matrix(rng);
            }
        }
        const auto d = deom_rhs(store, sys, c);
        Real worst = 0.0;
        for (auto [s, sb] : mirror) {
            worst = std::max(worst, (d[s] - d[sb].adjoint()).cwiseAbs().maxCoeff());
        }
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("rk4 leaves a stationary state unchanged")
{
    SystemSpec sys;
    sys.delta = 0.0;
    sys.epsilon = 0.0;
    DdoStore store(1, 0);
    store[0] = 0.5 * Matrix2c::Identity();
    const auto c = deom_coefficients(ExponentialSeries{}, 0);
    for (int i = 0; i < 10; ++i) {
        rk4_step(store, sys, c, 0.0025);
    }
    CHECK((store[0] - 0.5 * Matrix2c::Identity()).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(rk4_step(store, sys, c, 0.0), DomainError);
}

TEST_CASE("isolated system follows cos(2t)")
{
    SystemSpec sys;
    auto p = params(1, std::acos(-1.0) / 2.0);
    p.record_stride = 1;
    const auto traj = propagate(sys, ExponentialSeries{}, p);
    Real worst = 0.0;
    for (std::size_t j = 0; j < traj.size(); ++j) {
        worst = std::max(worst, std::abs(traj.population[j] - std::cos(2.0 * traj.times[j])));
    }
    CHECK(worst <= 1e-8);
    CHECK(traj.n_active.back() == 1);
}

TEST_CASE("trace is conserved over 10^4 steps")
{
    const auto series = small_fit();
    const auto traj = propagate(SystemSpec{}, series, params(4, 25.0));
    CHECK(traj.steps == 10000);
    CHECK(traj.max_trace_drift <= 1e-10);
    CHECK(traj.max_hermiticity_residue <= 1e-10);
}

TEST_CASE("sigma_z flip symmetry")
{
    const auto series = small_fit(0.2, 2.0);
    SystemSpec up;
    SystemSpec down;
    down.rho0 << 0.0, 0.0, 0.0, 1.0;
    for (Real filter : {0.0, 1e-6}) {
        const auto a = propagate(up, series, params(5, 5.0, filter));
        const auto b = propagate(down, series, params(5, 5.0, filter));
        Real worst = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) {
            worst = std::max(worst, std::abs(a.population[j] + b.population[j]));
        }
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("scaled and unscaled hierarchies agree")
{
    const auto series = small_fit(0.2, 2.0);
    auto p = params(5, 3.0);
    const auto a = propagate(SystemSpec{}, series, p);
    p.scaled = false;
    const auto b = propagate(SystemSpec{}, series, p);
    Real worst = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        worst = std::max(worst, std::abs(a.population[j] - b.population[j]));
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("filter_prune limits")
{
    DdoStore store(2, 2);
    for (const auto& key : build_index_set(2, 2)) {
        const int s = store.ensure(key);
        store.activate(s);
        store[s] = Matrix2c::Constant(1e-3);
    }
    store.compact_active();
    CHECK(filter_prune(store, 0.0) == 0);
    CHECK(store.active_count() == 6);
    CHECK(filter_prune(store, std::numeric_limits<Real>::infinity()) == 5);
    CHECK(store.active_count() == 1);
    CHECK(store.is_active(0));
}

TEST_CASE("filtered propagation tracks the full hierarchy")
{
    const auto series = small_fit(0.2, 2.0, kInfiniteBeta, 3);
    const auto full = propagate(SystemSpec{}, series, params(6, 5.0));
    const auto filtered = propagate(SystemSpec{}, series, params(6, 5.0, 1e-6));
    Real worst = 0.0;
    for (std::size_t j = 0; j < full.size(); ++j) {
        worst = std::max(worst, std::abs(full.population[j] - filtered.population[j]));
    }
    CHECK(worst <= 1e-4);
    CHECK(*std::max_element(filtered.n_active.begin(), filtered.n_active.end()) < full.n_active.back());
}

TEST_CASE("divergence is detected")
{
    const auto series = small_fit(2.0, 5.0);
    auto p = params(3, 20.0);
    p.dt = 0.5;
    CHECK_THROWS_AS(propagate(SystemSpec{}, series, p), DivergenceError);
}

TEST_CASE("checkpoint resume is bit-compatible")
{
    const auto series = small_fit(0.2, 2.0);
    const auto p = params(5, 0.5, 1e-6);
    const auto reference = propagate(SystemSpec{}, series, p);

    const auto path = (std::filesystem::temp_directory_path() / "spinbath_checkpoint_test.json").string();
    PropagationControl save;
    save.checkpoint_path = path;
    save.checkpoint_every = 120;
    propagate(SystemSpec{}, series, p, save);

    PropagationControl resume;
    resume.resume_path = path;
    const auto resumed = propagate(SystemSpec{}, series, p, resume);
    CHECK(resumed.times == reference.times);
    CHECK(resumed.population == reference.population);
    CHECK(resumed.entropy == reference.entropy);
    CHECK(resumed.n_active == reference.n_active);

    auto other = p;
    other.tier = 4;
    CHECK_THROWS_AS(propagate(SystemSpec{}, series, other, resume), ValidationError);
    std::remove(path.c_str());
}

TEST_CASE("input validation")
{
    SystemSpec sys;
    sys.rho0 << 0.7, 0.0, 0.0, 0.7;
    sys.q_op << 0.0, 1.0, 0.0, 0.0;
    CHECK(sys.violations().size() == 2);
    HierarchyParams p;
    p.tier = 0;
    p.dt = -1.0;
    CHECK(p.violations().size() == 2);
    CHECK_THROWS_AS(propagate(sys, ExponentialSeries{}, p), ValidationError);
}
