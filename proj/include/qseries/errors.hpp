#pragma once

#include <stdexcept>
#include <string>

namespace qseries {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad context construction, foreign contexts, malformed monomials.
struct context_error : error {
    using error::error;
};

// Inputs outside what an operation is defined for: non-unit inversion,
// poles, values outside an identity's domain.
struct precondition_error : error {
    using error::error;
};

// A summand whose weight is below its declared lower bound.
struct bound_violation : error {
    using error::error;
};

struct convergence_error : error {
    using error::error;
};

} // namespace qseries
