#pragma once

#include <stdexcept>
#include <string>

namespace sgc {

// Base of all library errors. The three intermediate categories map onto the
// CLI exit codes: ConfigError -> 2, DataError -> 3, NumericError -> 4.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

// --- data-shaped problems -------------------------------------------------

class MissingFileError : public DataError {
public:
    using DataError::DataError;
};

class ParseError : public DataError {
public:
    using DataError::DataError;
};

class SplitError : public DataError {
public:
    using DataError::DataError;
};

class IndexError : public DataError {
public:
    using DataError::DataError;
};

class ValueError : public DataError {
public:
    using DataError::DataError;
};

class SelfLoopError : public DataError {
public:
    using DataError::DataError;
};

class DuplicateEdgeError : public DataError {
public:
    using DataError::DataError;
};

class InsufficientClassError : public DataError {
public:
    using DataError::DataError;
};

// --- numerical problems ---------------------------------------------------

class ShapeError : public NumericError {
public:
    using NumericError::NumericError;
};

class IsolatedNodeError : public NumericError {
public:
    using NumericError::NumericError;
};

class AsymmetricError : public NumericError {
public:
    using NumericError::NumericError;
};

class SizeError : public NumericError {
public:
    using NumericError::NumericError;
};

class DisconnectedError : public NumericError {
public:
    using NumericError::NumericError;
};

class EmptyMaskError : public NumericError {
public:
    using NumericError::NumericError;
};

class DivergenceError : public NumericError {
public:
    using NumericError::NumericError;
};

class ConvergenceError : public NumericError {
public:
    ConvergenceError(const std::string& what, double best_residual)
        : NumericError(what), best_residual_(best_residual) {}

    double best_residual() const { return best_residual_; }

private:
    double best_residual_;
};

}  // namespace sgc
