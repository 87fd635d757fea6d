#include "spinbath/expfit.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace spinbath
{

namespace
{

constexpr Real kPartnerRateTol = 1e-8;
constexpr Real kClosureTol = 1e-8;

// Appends one part (Re or Im) of a fit to the series. `phase` multiplies the
// part's amplitudes: 1 for Re C, i for Im C.
void append_part(ExponentialSeries& series, const std::vector<ExponentialTerm>& part, Complex phase)
{
    const int offset = series.size();
    const auto n = static_cast<int>(part.size());
    std::vector<int> partner(n, -1);
    std::vector<ExponentialTerm> local = part;

    for (int k = 0; k < n; ++k) {
        Complex& g = local[k].gamma;
        if (std::abs(g.imag()) <= 1e-14 * std::abs(g)) {
            g = Complex(g.real(), 0.0);
        }
    }
    for (int k = 0; k < n; ++k) {
        if (partner[k] >= 0) {
            continue;
        }
        if (local[k].gamma.imag() == 0.0) {
            partner[k] = k;
            if (std::abs(local[k].eta.imag()) > kClosureTol * std::max<Real>(1.0, std::abs(local[k].eta))) {
                std::ostringstream msg;
                msg << "assemble_series: real-rate term " << k << " has complex amplitude " << local[k].eta
                    << "; the fitted part would not be real";
                throw Error(msg.str());
            }
            local[k].eta = Complex(local[k].eta.real(), 0.0);
            continue;
        }
        const Complex target = std::conj(local[k].gamma);
        int best = -1;
        Real best_dist = std::numeric_limits<Real>::infinity();
        for (int j = 0; j < n; ++j) {
            if (j == k || partner[j] >= 0) {
                continue;
            }
            const Real d = std::abs(local[j].gamma - target);
            if (d < best_dist) {
                best_dist = d;
                best = j;
            }
        }
        if (best >= 0 && best_dist <= kPartnerRateTol * (1.0 + std::abs(target))) {
            const Complex expected = std::conj(local[k].eta);
            if (std::abs(local[best].eta - expected) > kClosureTol * std::max<Real>(1.0, std::abs(expected))) {
                std::ostringstream msg;
                msg << "assemble_series: terms " << k << " and " << best << " have conjugate rates but amplitudes "
                    << local[k].eta << " and " << local[best].eta << " are not conjugate";
                throw Error(msg.str());
            }
            local[best].gamma = target;
            partner[k] = best;
            partner[best] = k;
        } else {
            // Realness of the part implies the conjugate term.
            local.push_back({std::conj(local[k].eta), target});
            partner.push_back(k);
            partner[k] = static_cast<int>(local.size()) - 1;
        }
    }
    for (std::size_t k = 0; k < local.size(); ++k) {
        series.terms.push_back({phase * local[k].eta, local[k].gamma});
        series.conj_partner.push_back(offset + partner[k]);
    }
}

} // namespace

std::vector<std::string> FitStrategy::violations(const std::string& path) const
{
    std::vector<std::string> out;
    if (k_real < 1) {
        out.push_back(path + ".k_real: must be >= 1");
    }
    if (k_imag < 1) {
        out.push_back(path + ".k_imag: must be >= 1");
    }
    if (!(dt_sample > 0.0)) {
        out.push_back(path + ".dt_sample: must be > 0");
    }
    if (!(plateau_time > 0.0)) {
        out.push_back(path + ".plateau_time: must be > 0");
    } else if (dt_sample > 0.0 && plateau_time / dt_sample < 10.0 * (k_real + k_imag)) {
        out.push_back(path + ".plateau_time: plateau_time/dt_sample must be >= 10*(k_real+k_imag)");
    }
    return out;
}

Complex ExponentialSeries::evaluate(Real t) const
{
    Complex v = 0.0;
    for (const auto& term : terms) {
        v += term.eta * std::exp(-term.gamma * t);
    }
    return v;
}

VectorXc ExponentialSeries::evaluate(const std::vector<Real>& t) const
{
    VectorXc out(static_cast<Eigen::Index>(t.size()));
    for (std::size_t j = 0; j < t.size(); ++j) {
        out[static_cast<Eigen::Index>(j)] = evaluate(t[j]);
    }
    return out;
}

Complex ExponentialSeries::amplitude_sum() const
{
    Complex s = 0.0;
    for (const auto& term : terms) {
        s += term.eta;
    }
    return s;
}

void ExponentialSeries::check_invariants() const
{
    const int n = size();
    if (static_cast<int>(conj_partner.size()) != n) {
        throw Error("exponential series: partner map has the wrong length");
    }
    for (int k = 0; k < n; ++k) {
        const int p = conj_partner[k];
        if (p < 0 || p >= n || conj_partner[p] != k) {
            throw Error("exponential series: partner map is not an involution at term " + std::to_string(k));
        }
        if (terms[p].gamma != std::conj(terms[k].gamma)) {
            throw Error("exponential series: partner rate is not the exact conjugate at term " + std::to_string(k));
        }
        if (!(terms[k].gamma.real() > 0.0)) {
            throw Error("exponential series: term " + std::to_string(k) + " does not decay");
        }
    }
}

TcfSamples sample_tcf(const BathSpec& spec, const FitStrategy& strategy, const QuadratureSpec& quad)
{
    TcfSamples s;
    s.dt = strategy.dt_sample;
    s.t = uniform_grid(strategy.plateau_time, strategy.dt_sample);
    s.values = bath_tcf(s.t, spec, quad);
    return s;
}

ExponentialSeries assemble_series(const std::vector<ExponentialTerm>& re_fit, const std::vector<ExponentialTerm>& im_fit)
{
    ExponentialSeries series;
    append_part(series, re_fit, Complex(1.0, 0.0));
    append_part(series, im_fit, Complex(0.0, 1.0));
    return series;
}

FitReport fit_report(const ExponentialSeries& series, const TcfSamples& samples)
{
    FitReport r;
    const VectorXc model = series.evaluate(samples.t);
    const VectorXc diff = model - samples.values;
    const auto n = diff.size();
    r.n_samples = static_cast<int>(n);
    if (n == 0) {
        return r;
    }
    r.max_abs_error = diff.cwiseAbs().maxCoeff();
    r.rms_error = std::sqrt(diff.squaredNorm() / static_cast<Real>(n));
    r.max_abs_error_re = diff.real().cwiseAbs().maxCoeff();
    r.rms_error_re = std::sqrt(diff.real().squaredNorm() / static_cast<Real>(n));
    r.max_abs_error_im = diff.imag().cwiseAbs().maxCoeff();
    r.rms_error_im = std::sqrt(diff.imag().squaredNorm() / static_cast<Real>(n));
    return r;
}

BathFit fit_bath(const BathSpec& spec, const FitStrategy& strategy, const QuadratureSpec& quad,
                 const PronyOptions& options)
{
    BathFit fit;
    fit.samples = sample_tcf(spec, strategy, quad);
    const VectorXr re = fit.samples.values.real();
    const VectorXr im = fit.samples.values.imag();
    const auto re_terms = prony_fit(re, fit.samples.dt, strategy.k_real, options);
    const auto im_terms = prony_fit(im, fit.samples.dt, strategy.k_imag, options);
    fit.series = assemble_series(re_terms, im_terms);
    fit.series.check_invariants();
    fit.report = fit_report(fit.series, fit.samples);
    return fit;
}

} // namespace spinbath
