#pragma once

#include <stdexcept>
#include <string>

namespace ncdoa {

/// Requested table entry or size is outside what the library supports.
class UnsupportedSize : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A linear-algebra kernel (SVD, factorization) failed.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The estimator could not produce a usable pseudo-spectrum.
class EstimationFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ncdoa
