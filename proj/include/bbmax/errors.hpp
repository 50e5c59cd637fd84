#pragma once

#include <stdexcept>
#include <string>

namespace bbmax {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Integration failed to reach the requested tolerance within budget.
struct non_convergent : error {
    using error::error;
};

// Parameters outside the admissible range (alpha <= -1, p <= 1, ...).
struct domain_error : error {
    using error::error;
};

// A stopping-time sweep was asked for a level the window top already exceeds,
// so maximality of the returned family could not be certified.
struct window_too_small : error {
    using error::error;
};

// sigma-measure of a box vanished while the numerator did not.
struct degenerate_box : error {
    using error::error;
};

// log f failed to be integrable where a positive value was required.
struct log_singular : error {
    using error::error;
};

// A Young function required to be in B_p failed the test.
struct bp_violation : error {
    using error::error;
};

// A fitted growth exponent landed too close to a decision boundary
// for the classification to be trusted.
struct inconclusive : error {
    using error::error;
};

// Legendre transform probe found no finite supremum.
struct unbounded_complementary : error {
    using error::error;
};

struct non_integrable : error {
    using error::error;
};

// A truncated norm was dominated by its outermost shell.
struct tail_dominated : error {
    using error::error;
};

struct config_error : error {
    using error::error;
};

}  // namespace bbmax
