#include "spinbath/expfit.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace spinbath
{

namespace
{

// A real-valued exponential model: each real rate r contributes exp(-r t),
// each complex pair (a, b) contributes exp(-a t) cos(b t) and exp(-a t) sin(b t).
struct RealModel
{
    std::vector<Real> real_rates;
    std::vector<std::pair<Real, Real>> pairs;

    int columns() const { return static_cast<int>(real_rates.size() + 2 * pairs.size()); }
    int parameters() const { return columns(); }

    VectorXr pack() const
    {
        VectorXr p(parameters());
        int i = 0;
        for (Real r : real_rates) {
            p[i++] = r;
        }
        for (const auto& [a, b] : pairs) {
            p[i++] = a;
            p[i++] = b;
        }
        return p;
    }

    void unpack(const VectorXr& p)
    {
        int i = 0;
        for (Real& r : real_rates) {
            r = p[i++];
        }
        for (auto& [a, b] : pairs) {
            a = p[i++];
            b = p[i++];
        }
    }
};

MatrixXr basis(const RealModel& model, const VectorXr& t)
{
    const Eigen::Index n = t.size();
    MatrixXr phi(n, model.columns());
    int col = 0;
    for (Real r : model.real_rates) {
        phi.col(col++) = (-r * t).array().exp();
    }
    for (const auto& [a, b] : model.pairs) {
        const VectorXr e = (-a * t).array().exp();
        phi.col(col) = e.array() * (b * t).array().cos();
        phi.col(col + 1) = e.array() * (b * t).array().sin();
        col += 2;
    }
    return phi;
}

struct Projection
{
    VectorXr coeffs;
    VectorXr residual; // samples - phi * coeffs
    Real cost = std::numeric_limits<Real>::infinity();
};

Projection project(const MatrixXr& phi, const VectorXr& y)
{
    Projection p;
    p.coeffs = phi.colPivHouseholderQr().solve(y);
    p.residual = y - phi * p.coeffs;
    p.cost = p.residual.squaredNorm();
    if (!std::isfinite(p.cost)) {
        p.cost = std::numeric_limits<Real>::infinity();
    }
    return p;
}

bool rates_admissible(const RealModel& m)
{
    for (Real r : m.real_rates) {
        if (!(r >= 0.0) || !std::isfinite(r)) {
            return false;
        }
    }
    for (const auto& [a, b] : m.pairs) {
        if (!(a >= 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
            return false;
        }
    }
    return true;
}

// Variable projection with the Kaufman Jacobian and Levenberg-Marquardt damping.
Projection refine(RealModel& model, const VectorXr& y, const VectorXr& t, const PronyOptions& options)
{
    const Eigen::Index n = y.size();
    MatrixXr phi = basis(model, t);
    Projection current = project(phi, y);
    if (!options.refine || model.parameters() == 0) {
        return current;
    }

    const Real scale = std::max(y.squaredNorm(), std::numeric_limits<Real>::min());
    Real mu = 1e-3;

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        // Columns of dPhi/dtheta_j * c.
        MatrixXr dphi_c(n, model.parameters());
        int col = 0, par = 0;
        for (std::size_t q = 0; q < model.real_rates.size(); ++q) {
            dphi_c.col(par++) = -t.cwiseProduct(phi.col(col)) * current.coeffs[col];
            ++col;
        }
        for (std::size_t q = 0; q < model.pairs.size(); ++q) {
            const Real c1 = current.coeffs[col], c2 = current.coeffs[col + 1];
            const auto cosc = phi.col(col);
            const auto sinc = phi.col(col + 1);
            dphi_c.col(par++) = -t.cwiseProduct(c1 * cosc + c2 * sinc);
            dphi_c.col(par++) = t.cwiseProduct(c2 * cosc - c1 * sinc);
            col += 2;
        }
        // r = y - P y, so dr/dtheta ~ -(I - P) dPhi c.
        const Eigen::HouseholderQR<MatrixXr> qr(phi);
        const MatrixXr q_thin = qr.householderQ() * MatrixXr::Identity(n, phi.cols());
        const MatrixXr jac = -(dphi_c - q_thin * (q_thin.transpose() * dphi_c));

        const VectorXr grad = jac.transpose() * current.residual;
        if (grad.cwiseAbs().maxCoeff() <= options.gradient_tol * scale) {
            break;
        }
        const MatrixXr jtj = jac.transpose() * jac;
        const Real dmax = jtj.diagonal().maxCoeff();
        const VectorXr diag = jtj.diagonal().cwiseMax(1e-14 * dmax + std::numeric_limits<Real>::min());

        bool improved = false;
        Real gain = 0.0;
        while (mu < 1e16) {
            MatrixXr lhs = jtj;
            lhs.diagonal() += mu * diag;
            const VectorXr step = lhs.ldlt().solve(-grad);
            VectorXr p = model.pack() + step;
            // Decay rates stay in the closed right half-plane.
            int i = 0;
            for (std::size_t q = 0; q < model.real_rates.size(); ++q, ++i) {
                p[i] = std::max(p[i], 0.0);
            }
            for (std::size_t q = 0; q < model.pairs.size(); ++q, i += 2) {
                p[i] = std::max(p[i], 0.0);
            }
            RealModel trial = model;
            trial.unpack(p);
            if (rates_admissible(trial)) {
                MatrixXr trial_phi = basis(trial, t);
                Projection trial_proj = project(trial_phi, y);
                if (trial_proj.cost < current.cost) {
                    gain = current.cost - trial_proj.cost;
                    model = std::move(trial);
                    phi = std::move(trial_phi);
                    current = std::move(trial_proj);
                    mu = std::max(mu / 3.0, 1e-12);
                    improved = true;
                    break;
                }
            }
            mu *= 4.0;
        }
        if (!improved || gain <= 1e-15 * current.cost) {
            break;
        }
    }
    for (auto& pr : model.pairs) {
        pr.second = std::abs(pr.second);
    }
    return project(basis(model, t), y);
}

// Matrix pencil estimate of k decay rates.
RealModel pencil_model(const VectorXr& y, Real dt, int k, const PronyOptions& options)
{
    const auto n = static_cast<int>(y.size());
    int cols = options.pencil_columns > 0 ? options.pencil_columns : std::min(n / 2, 256);
    cols = std::clamp(cols, k + 1, n - k);
    const int rows = n - cols + 1;
    // H(i, j) = y[i + j]; rows share the exponential structure z^j.
    MatrixXr hankel(rows, cols);
    for (int j = 0; j < cols; ++j) {
        hankel.col(j) = y.segment(j, rows);
    }
    const Eigen::BDCSVD<MatrixXr> svd(hankel, Eigen::ComputeThinV);
    const VectorXr& sv = svd.singularValues();
    int rank = 0;
    if (sv.size() > 0 && sv[0] > 0.0) {
        for (Eigen::Index i = 0; i < sv.size(); ++i) {
            if (sv[i] > options.svd_rel_threshold * sv[0]) {
                ++rank;
            }
        }
    }
    if (rank < k) {
        std::ostringstream msg;
        msg << "prony_fit: sample matrix has numerical rank " << rank << ", fewer than the " << k
            << " requested modes";
        throw RankError(msg.str(), rank);
    }
    const MatrixXr vk = svd.matrixV().leftCols(k);
    const MatrixXr top = vk.topRows(cols - 1);
    const MatrixXr bottom = vk.bottomRows(cols - 1);
    const MatrixXr shift = top.colPivHouseholderQr().solve(bottom);
    const VectorXc roots = Eigen::EigenSolver<MatrixXr>(shift, false).eigenvalues();

    RealModel model;
    for (Eigen::Index i = 0; i < roots.size(); ++i) {
        Complex z = roots[i];
        if (std::abs(z) < 1e-300) {
            z = 1e-300;
        }
        // Growing modes are reflected into the unit disk, keeping the phase.
        if (std::abs(z) > 1.0) {
            z = std::polar(1.0 / std::abs(z), std::arg(z));
        }
        if (std::abs(z.imag()) <= 1e-12 * std::abs(z)) {
            model.real_rates.push_back(-std::log(std::abs(z)) / dt);
        } else if (z.imag() > 0.0) {
            const Complex g = -std::log(z) / dt;
            model.pairs.emplace_back(g.real(), std::abs(g.imag()));
        }
    }
    // An unmatched complex root can only come from rounding; pad with real rates.
    while (model.columns() < k) {
        model.real_rates.push_back(model.real_rates.empty() ? 1.0 : 2.0 * model.real_rates.back());
    }
    return model;
}

std::vector<ExponentialTerm> to_terms(const RealModel& model, const VectorXr& coeffs)
{
    std::vector<ExponentialTerm> terms;
    int col = 0;
    for (Real r : model.real_rates) {
        terms.push_back({Complex(coeffs[col++], 0.0), Complex(r, 0.0)});
    }
    for (const auto& [a, b] : model.pairs) {
        // c1 cos(bt) + c2 sin(bt) = (c1 - i c2)/2 e^{ibt} + (c1 + i c2)/2 e^{-ibt}
        const Real c1 = coeffs[col], c2 = coeffs[col + 1];
        col += 2;
        terms.push_back({Complex(0.5 * c1, -0.5 * c2), Complex(a, -b)});
        terms.push_back({Complex(0.5 * c1, 0.5 * c2), Complex(a, b)});
    }
    return terms;
}

struct Candidate
{
    RealModel model;
    Projection fit;
};

Real largest_rate(const RealModel& m)
{
    Real hi = 0.0;
    for (Real r : m.real_rates) {
        hi = std::max(hi, r);
    }
    for (const auto& pr : m.pairs) {
        hi = std::max(hi, std::hypot(pr.first, pr.second));
    }
    return hi;
}

Real smallest_rate(const RealModel& m)
{
    Real lo = std::numeric_limits<Real>::infinity();
    for (Real r : m.real_rates) {
        lo = std::min(lo, r);
    }
    for (const auto& pr : m.pairs) {
        lo = std::min(lo, pr.first);
    }
    return lo;
}

class OrderSearch
{
public:
    OrderSearch(const VectorXr& y, Real dt, const PronyOptions& options) : y_(y), options_(options), t_(y.size())
    {
        for (Eigen::Index j = 0; j < y.size(); ++j) {
            t_[j] = dt * static_cast<Real>(j);
        }
        dt_ = dt;
    }

    // The order-k search also extends the best order k-1 and k-2 models, so
    // the residual of the returned fit never increases with k.
    const Candidate& best(int k)
    {
        if (static_cast<int>(cache_.size()) > k && cache_[k]) {
            return *cache_[k];
        }
        Candidate winner = fit(pencil_model(y_, dt_, k, options_));
        auto consider = [&](RealModel m) {
            if (!rates_admissible(m)) {
                return;
            }
            Candidate c = fit(std::move(m));
            if (c.fit.cost < winner.fit.cost) {
                winner = std::move(c);
            }
        };
        if (k >= 2) {
            const RealModel prev = best(k - 1).model;
            const Real hi = std::max(largest_rate(prev), 1e-3);
            const Real lo = std::clamp(smallest_rate(prev), 1e-3, hi);
            for (Real rate : {0.1 * lo, 0.5 * lo, 2.0 * hi, 10.0 * hi}) {
                RealModel m = prev;
                m.real_rates.push_back(rate);
                consider(std::move(m));
            }
        }
        if (k >= 3) {
            const RealModel prev = best(k - 2).model;
            const Real hi = std::max(largest_rate(prev), 1e-3);
            for (Real f : {0.3, 1.0, 3.0}) {
                RealModel m = prev;
                m.pairs.emplace_back(f * hi, f * hi);
                consider(std::move(m));
            }
        }
        if (static_cast<int>(cache_.size()) <= k) {
            cache_.resize(k + 1);
        }
        cache_[k] = std::move(winner);
        return *cache_[k];
    }

private:
    Candidate fit(RealModel model)
    {
        Projection p = refine(model, y_, t_, options_);
        return {std::move(model), std::move(p)};
    }

    const VectorXr& y_;
    const PronyOptions& options_;
    VectorXr t_;
    Real dt_ = 0.0;
    std::vector<std::optional<Candidate>> cache_;
};

} // namespace

std::vector<ExponentialTerm> prony_fit(const VectorXr& samples, Real dt, int k, const PronyOptions& options)
{
    if (k < 1) {
        throw DomainError("prony_fit: need at least one term");
    }
    if (!(dt > 0.0)) {
        throw DomainError("prony_fit: sample spacing must be positive");
    }
    if (samples.size() < 2 * static_cast<Eigen::Index>(k) + 2) {
        throw DomainError("prony_fit: too few samples for " + std::to_string(k) + " terms");
    }
    OrderSearch search(samples, dt, options);
    const Candidate& best = search.best(k);
    return to_terms(best.model, best.fit.coeffs);
}

Real fit_residual(const std::vector<ExponentialTerm>& terms, const VectorXr& samples, Real dt)
{
    Real cost = 0.0;
    for (Eigen::Index j = 0; j < samples.size(); ++j) {
        const Real t = dt * static_cast<Real>(j);
        Complex v = 0.0;
        for (const auto& term : terms) {
            v += term.eta * std::exp(-term.gamma * t);
        }
        const Real r = v.real() - samples[j];
        cost += r * r;
    }
    return cost;
}

} // namespace spinbath
