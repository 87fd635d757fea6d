#ifndef SPINBATH_TYPES_HPP
#define SPINBATH_TYPES_HPP

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace spinbath
{

using Real = double;
using Complex = std::complex<double>;

using Matrix2c = Eigen::Matrix2cd;
using VectorXr = Eigen::VectorXd;
using VectorXc = Eigen::VectorXcd;
using MatrixXr = Eigen::MatrixXd;
using MatrixXc = Eigen::MatrixXcd;

inline constexpr Real kPi = 3.14159265358979323846264338327950288;

/// Inverse temperature of the zero-temperature limit.
inline constexpr Real kInfiniteBeta = std::numeric_limits<Real>::infinity();

inline bool is_zero_temperature(Real beta) { return beta == kInfiniteBeta; }

// Error hierarchy. The CLI maps these onto exit codes.

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error
{
public:
    using Error::Error;
};

/// Configuration or parameter invariant violated before any computation.
class ValidationError : public Error
{
public:
    using Error::Error;
};

class QuadratureError : public Error
{
public:
    QuadratureError(const std::string& what, Real residual) : Error(what), residual_(residual) {}
    Real residual() const { return residual_; }

private:
    Real residual_;
};

/// The sample matrix supports fewer exponential modes than requested.
class RankError : public Error
{
public:
    RankError(const std::string& what, int rank) : Error(what), rank_(rank) {}
    int rank() const { return rank_; }

private:
    int rank_;
};

/// Propagation produced non-finite values or left the physical range.
class DivergenceError : public Error
{
public:
    using Error::Error;
};

} // namespace spinbath

#endif
