#ifndef SPINBATH_PRESETS_HPP
#define SPINBATH_PRESETS_HPP

#include <string>
#include <vector>

#include "config.hpp"

namespace spinbath
{

/// Names accepted by preset(), in catalog order.
std::vector<std::string> preset_catalog();

/// Parameter set of a named scenario. Temperature scans and bath comparisons
/// are expressed as sweeps. Throws ValidationError for unknown names.
RunConfig preset(const std::string& name);

} // namespace spinbath

#endif
