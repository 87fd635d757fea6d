#ifndef SPINBATH_SERIALIZE_HPP
#define SPINBATH_SERIALIZE_HPP

#include <string>

#include <json.hpp>

#include "bath.hpp"
#include "deom.hpp"
#include "expfit.hpp"
#include "observables.hpp"

namespace spinbath
{

using Json = nlohmann::json;

// Infinite beta is written as the string "inf".
Json real_to_json(Real v);
Real real_from_json(const Json& j);

/// Row-major [re00, im00, re01, im01, re10, im10, re11, im11].
Json matrix_to_json(const Matrix2c& m);
Matrix2c matrix_from_json(const Json& j);

/// {"terms": [{eta_re, eta_im, gamma_re, gamma_im}], "partner": [...]}
Json series_to_json(const ExponentialSeries& series);
ExponentialSeries series_from_json(const Json& j);

Json report_to_json(const FitReport& report);

/// Fit artifact: series plus {"errors": report}.
Json fit_to_json(const ExponentialSeries& series, const FitReport& report);

// Partial updates: keys present in `j` overwrite fields, unknown keys are
// reported in `unknown` with their path.
Json to_json(const BathSpec& b);
void update_from_json(BathSpec& b, const Json& j, const std::string& path, std::vector<std::string>& unknown);
Json to_json(const FitStrategy& f);
void update_from_json(FitStrategy& f, const Json& j, const std::string& path, std::vector<std::string>& unknown);
Json to_json(const QuadratureSpec& q);
void update_from_json(QuadratureSpec& q, const Json& j, const std::string& path, std::vector<std::string>& unknown);
Json to_json(const SystemSpec& s);
void update_from_json(SystemSpec& s, const Json& j, const std::string& path, std::vector<std::string>& unknown);
Json to_json(const HierarchyParams& h);
void update_from_json(HierarchyParams& h, const Json& j, const std::string& path, std::vector<std::string>& unknown);

Json trajectory_to_json(const Trajectory& traj);
Trajectory trajectory_from_json(const Json& j);

std::string to_string(SpectralFamily f);
std::string to_string(Environment e);

/// Reads a whole JSON file; throws ValidationError on parse errors.
Json read_json_file(const std::string& path);
/// Writes JSON with two-space indentation via a temporary file and rename.
void write_json_file(const std::string& path, const Json& j);

} // namespace spinbath

#endif
