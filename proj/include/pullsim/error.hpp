#pragma once

#include <stdexcept>
#include <string>

namespace pullsim {

/// Invalid parameters or configuration supplied by the caller.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A closed form was requested for a response-time family that has none.
/// The simulator is the fallback for these cases.
class UnsupportedDistribution : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Two phase rates of the AoI density coincide, so the product-form weights
/// are undefined.
class DegenerateRates : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// File-system failure while emitting experiment output.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pullsim
