#pragma once

#include <stdexcept>
#include <string>

namespace vvfx {

/// Input outside the mathematical domain of an operation (negative tau, zero vol, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A root search found no admissible solution (unreachable delta, bad bracket).
class NoSolutionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative construction (smile pillars, broker strangle) did not converge.
class ConstructionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Ill-conditioned linear algebra or other numerical breakdown.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input file / configuration.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw DomainError(msg);
}

}  // namespace detail
}  // namespace vvfx
