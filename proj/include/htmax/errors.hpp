#pragma once

#include <stdexcept>
#include <string>

namespace htmax {

/// Invalid arguments or malformed tensor data (shape/tree mismatch, bad parameters).
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Operations requiring normalization received a (numerically) zero tensor.
struct ZeroTensorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An iterative estimator failed (blow-up, iterate destroyed by truncation, ...).
struct EstimatorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dense materialization would exceed the configured entry cap.
struct DenseCapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace htmax
