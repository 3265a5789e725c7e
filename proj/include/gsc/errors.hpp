#pragma once

#include <stdexcept>
#include <string>

namespace gsc {

/// Malformed or inconsistent input data (files, names, coordinates).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parameters that are invalid or infeasible for the data at hand
/// (block longer than a segment, too few replicates, ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A ratio statistic whose denominator is zero on the requested windows.
class DegenerateDenominator : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace gsc
