#ifndef SPINBATH_QUADRATURE_HPP
#define SPINBATH_QUADRATURE_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "types.hpp"

namespace spinbath
{

enum class QuadratureRule
{
    Adaptive,
    FixedGaussLegendre
};

/// Controls how continuum frequency integrals are discretized.
struct QuadratureSpec
{
    /// Upper frequency limit. Zero selects 40 * omega_c of the bath in use.
    Real omega_max = 0.0;
    /// Gauss-Legendre nodes per panel.
    int n_points = 64;
    QuadratureRule rule = QuadratureRule::Adaptive;
    Real rel_tol = 1e-9;
    int max_panels = 1 << 16;
};

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
template <typename Scalar = Real>
struct GaussLegendre
{
    std::vector<Scalar> nodes;
    std::vector<Scalar> weights;

    explicit GaussLegendre(int n) : nodes(n), weights(n)
    {
        if (n < 2) {
            throw DomainError("Gauss-Legendre rule needs at least 2 nodes");
        }
        // Newton iteration on P_n from the Chebyshev guess; symmetric pairs.
        const int m = (n + 1) / 2;
        for (int i = 0; i < m; ++i) {
            Scalar x = std::cos(Scalar(kPi) * (Scalar(i) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5)));
            Scalar dp = 0;
            for (int iter = 0; iter < 100; ++iter) {
                Scalar p0 = 1, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const Scalar pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = pk;
                }
                dp = n * (x * p1 - p0) / (x * x - 1);
                const Scalar dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < Scalar(1e-16)) {
                    break;
                }
            }
            Scalar p0 = 1, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const Scalar pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1);
            const Scalar w = 2 / ((1 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
    }

    int size() const { return static_cast<int>(nodes.size()); }
};

/// Result of a vector-valued integral with its estimated absolute error.
struct VectorIntegral
{
    VectorXr value;
    Real error_estimate = 0.0;
    int panels = 0;
    /// False when the panel budget ran out before the tolerance was met.
    bool converged = true;
};

namespace detail
{

template <typename Accumulate>
void integrate_panel(const GaussLegendre<Real>& rule, Real a, Real b, Accumulate& accumulate, Eigen::Ref<VectorXr> out)
{
    out.setZero();
    const Real half = 0.5 * (b - a);
    const Real mid = 0.5 * (b + a);
    for (int i = 0; i < rule.size(); ++i) {
        accumulate(mid + half * rule.nodes[i], half * rule.weights[i], out);
    }
}

} // namespace detail

/// Composite Gauss-Legendre integral of a vector-valued function over [a, b].
///
/// `accumulate(x, w, acc)` must add w * f(x) into acc (length `dim`). The
/// interval starts as `initial_panels` equal panels; in adaptive mode each
/// panel is compared against its two halves and bisected until the max-norm
/// difference is below abs_tol scaled by the panel's share of [a, b].
/// Panels are processed in a fixed order, so the result is deterministic.
template <typename Accumulate>
VectorIntegral integrate_composite(Accumulate&& accumulate, Real a, Real b, Eigen::Index dim,
                                   const GaussLegendre<Real>& rule, int initial_panels, bool adaptive, Real abs_tol,
                                   int max_panels)
{
    struct Panel
    {
        Real a, b;
        VectorXr whole;
    };

    VectorIntegral result;
    result.value = VectorXr::Zero(dim);
    initial_panels = std::max(initial_panels, 1);
    const Real width = b - a;

    std::vector<Panel> pending;
    pending.reserve(initial_panels);
    for (int p = initial_panels - 1; p >= 0; --p) {
        const Real pa = a + width * p / initial_panels;
        const Real pb = (p + 1 == initial_panels) ? b : a + width * (p + 1) / initial_panels;
        pending.push_back({pa, pb, VectorXr(dim)});
        detail::integrate_panel(rule, pa, pb, accumulate, pending.back().whole);
    }

    if (!adaptive) {
        for (auto it = pending.rbegin(); it != pending.rend(); ++it) {
            result.value += it->whole;
        }
        result.panels = initial_panels;
        return result;
    }

    VectorXr left(dim), right(dim);
    int panels = initial_panels;
    // Depth-first from the left end keeps the summation order fixed.
    while (!pending.empty()) {
        Panel panel = std::move(pending.back());
        pending.pop_back();
        const Real mid = 0.5 * (panel.a + panel.b);
        detail::integrate_panel(rule, panel.a, mid, accumulate, left);
        detail::integrate_panel(rule, mid, panel.b, accumulate, right);
        const Real diff = (left + right - panel.whole).cwiseAbs().maxCoeff();
        const Real allowed = abs_tol * (panel.b - panel.a) / width;
        if (diff <= allowed || panels >= max_panels) {
            if (diff > allowed) {
                result.converged = false;
            }
            result.value += left + right;
            result.error_estimate += diff;
            continue;
        }
        ++panels;
        pending.push_back({mid, panel.b, right});
        pending.push_back({panel.a, mid, left});
    }
    result.panels = panels;
    return result;
}

} // namespace spinbath

#endif
