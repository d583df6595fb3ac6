#pragma once

#include <stdexcept>
#include <string>

namespace pickact {

// Bad or inconsistent input data: missing files, dimension mismatches,
// malformed manifests. Maps to CLI exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public DataError {
public:
    using DataError::DataError;
};

// A numeric procedure could not produce a usable result (degenerate
// clusters, zero-variance attribute, ...). Maps to CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CalibrationError : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace pickact
