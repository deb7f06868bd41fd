#pragma once

#include <string_view>

#include "hestopt/model.hpp"

namespace hestopt {

struct ModelInputs {
    HestonParams params;
    Utility utility;
};

// Parses a document of the form
//   { "mu": 0.2, "k": 1.0, "theta": 0.16, "sigma": 0.4, "rho": 0.5,
//     "utility": { "type": "exponential", "c": 1.0 } }
// Field names are exact; "type" is "power" (with "gamma") or "exponential"
// (with "c"). Unknown fields are rejected. Throws std::invalid_argument
// with a description of the offending field.
ModelInputs parse_model_inputs(std::string_view json_text);

} // namespace hestopt
