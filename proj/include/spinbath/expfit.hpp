#ifndef SPINBATH_EXPFIT_HPP
#define SPINBATH_EXPFIT_HPP

#include <vector>

#include "bath.hpp"
#include "types.hpp"

namespace spinbath
{

/// One exponential eta * exp(-gamma t).
struct ExponentialTerm
{
    Complex eta;
    Complex gamma;
};

/// Time-domain fitting strategy "k_real + k_imag".
struct FitStrategy
{
    int k_real = 5;
    int k_imag = 5;
    Real plateau_time = 40.0;
    Real dt_sample = 0.01;

    std::vector<std::string> violations(const std::string& path = "fit") const;
};

/// Exponential decomposition of a correlation function with the
/// conjugate-partner map required by the hierarchy: gamma[partner[k]] == conj(gamma[k]).
struct ExponentialSeries
{
    std::vector<ExponentialTerm> terms;
    std::vector<int> conj_partner;

    int size() const { return static_cast<int>(terms.size()); }
    bool empty() const { return terms.empty(); }

    Complex evaluate(Real t) const;
    VectorXc evaluate(const std::vector<Real>& t) const;
    Complex amplitude_sum() const;

    /// Throws Error when the partner map is not an involution, a partner's
    /// rate is not the exact conjugate, or a rate does not decay.
    void check_invariants() const;
};

struct FitReport
{
    Real max_abs_error = 0.0;
    Real rms_error = 0.0;
    Real max_abs_error_re = 0.0;
    Real rms_error_re = 0.0;
    Real max_abs_error_im = 0.0;
    Real rms_error_im = 0.0;
    int n_samples = 0;
};

struct TcfSamples
{
    std::vector<Real> t;
    VectorXc values;
    Real dt = 0.0;
};

struct PronyOptions
{
    /// Singular values below this fraction of the largest count as noise.
    Real svd_rel_threshold = 1e-12;
    /// Number of Hankel columns; 0 picks min(n/2, 256).
    int pencil_columns = 0;
    bool refine = true;
    int max_iterations = 200;
    Real gradient_tol = 1e-12;
};

/// Uniform samples of the exact correlation function on [0, plateau_time].
TcfSamples sample_tcf(const BathSpec& spec, const FitStrategy& strategy, const QuadratureSpec& quad = {});

/// Least-squares fit of k exponentials to real, uniformly spaced samples.
///
/// Rates come from a matrix pencil on the Hankel matrix, growing roots are
/// reflected into the unit disk, amplitudes are solved by linear least
/// squares, and a variable-projection Levenberg-Marquardt pass refines the
/// rates. Complex terms are emitted as adjacent conjugate pairs so the sum
/// is real. Throws RankError when the data supports fewer than k modes.
std::vector<ExponentialTerm> prony_fit(const VectorXr& samples, Real dt, int k, const PronyOptions& options = {});

/// Sum of squared residuals of a term list against the samples.
Real fit_residual(const std::vector<ExponentialTerm>& terms, const VectorXr& samples, Real dt);

/// Merges fits of Re C and Im C into one complex series C = Re + i Im,
/// filling in missing conjugate partners.
ExponentialSeries assemble_series(const std::vector<ExponentialTerm>& re_fit, const std::vector<ExponentialTerm>& im_fit);

FitReport fit_report(const ExponentialSeries& series, const TcfSamples& samples);

struct BathFit
{
    TcfSamples samples;
    ExponentialSeries series;
    FitReport report;
};

/// sample_tcf, prony_fit on both parts, assemble_series and fit_report in one call.
BathFit fit_bath(const BathSpec& spec, const FitStrategy& strategy, const QuadratureSpec& quad = {},
                 const PronyOptions& options = {});

} // namespace spinbath

#endif
