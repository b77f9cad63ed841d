#pragma once

#include <stdexcept>

namespace qdarwin {

// Input is structurally malformed: bad JSON, unknown keys, unparsable grids.
struct schema_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Inputs are individually valid but the requested formula does not apply to
// their combination (perturbative element >= 1, singular radius convention).
struct regime_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace qdarwin
