#ifndef NRBO_ERRORS_HPP
#define NRBO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nrbo {

// Invalid argument relative to a mathematical domain (bounds, dimensions, radii).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Operation called in the wrong lifecycle state (ask twice, result on empty data).
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// A requested candidate grid or allocation exceeds the configured cap.
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Linear algebra failed (Cholesky did not succeed after jitter escalation).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Told results do not match the pending suggestions.
class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Objective value rejected (non-finite).
class ValueError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Metric undefined for the given inputs.
class UndefinedScoreError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace nrbo

#endif  // NRBO_ERRORS_HPP
