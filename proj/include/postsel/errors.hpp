#pragma once

#include <stdexcept>
#include <string>

namespace postsel {

/// Base class for all postsel errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Confidence level outside its domain (usually (0, 1)).
struct invalid_level_error : error {
    using error::error;
};

/// Region construction with NaN or otherwise inconsistent endpoints.
struct invalid_region_error : error {
    using error::error;
};

/// Sublevel-set bracketing found more than one below-threshold segment.
struct non_unimodal_error : error {
    using error::error;
};

/// A plain CI family was passed where an e-CI family is required.
struct not_an_eci_error : error {
    using error::error;
};

/// Two-sided e-value pair fails the inverse constraint e_plus * e_minus = 1.
struct not_inverse_error : error {
    using error::error;
};

/// Observation outside the declared bounded range of an e-process.
struct out_of_range_error : error {
    using error::error;
};

/// Universal-inference split with an empty half.
struct empty_split_error : error {
    using error::error;
};

/// Weight vector sums to more than K.
struct weight_sum_error : error {
    using error::error;
};

struct invalid_kappa_error : error {
    using error::error;
};

/// Hitting-probability boundary a or b is not strictly positive.
struct invalid_boundary_error : error {
    using error::error;
};

/// A rejected index has no assigned direction.
struct missing_direction_error : error {
    using error::error;
};

/// Sharpness run reached beta <= gamma (cannot happen for gamma < 1/delta).
struct invalid_gamma_error : error {
    using error::error;
};

/// Malformed experiment or report configuration.
struct invalid_config_error : error {
    using error::error;
};

} // namespace postsel
