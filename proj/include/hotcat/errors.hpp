#pragma once

#include <stdexcept>
#include <string>

namespace hotcat {

// Base for every library failure. The CLI maps subclasses to exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// numeric failures (exit code 3)
struct NumericError : Error {
    using Error::Error;
};
struct TruncationError : NumericError {
    using NumericError::NumericError;
};
struct DegenerateBranch : NumericError {
    using NumericError::NumericError;
};
struct ConvergenceError : NumericError {
    using NumericError::NumericError;
};
struct StepSizeError : NumericError {
    using NumericError::NumericError;
};
struct DegenerateData : NumericError {
    using NumericError::NumericError;
};
struct InsufficientData : NumericError {
    using NumericError::NumericError;
};
struct InvalidState : NumericError {
    using NumericError::NumericError;
};

// schedule problems are configuration problems
struct ValidationError : Error {
    explicit ValidationError(const std::string& what) : Error(what) {}
};
struct ScheduleError : ValidationError {
    using ValidationError::ValidationError;
};

struct ParseError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace hotcat
