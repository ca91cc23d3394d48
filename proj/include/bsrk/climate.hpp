#pragma once

#include <string>
#include <vector>

namespace bsrk {

/// Koppen-Geiger class codes (Beck et al. numbering, 1..30). Only the 16
/// classes present over the European study area are accepted in
/// ClimateClass rasters.
namespace kg {

int code_from_name(const std::string& name); // e.g. "Cfb" -> 15
std::string name_from_code(int code);
bool in_study_area_table(int code);
const std::vector<int>& study_area_codes();

} // namespace kg

} // namespace bsrk
