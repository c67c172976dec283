#pragma once

#include <array>
#include <complex>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace cubicsense {

namespace detail {
inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}
}  // namespace detail

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidDimensionError : public Error {
public:
    explicit InvalidDimensionError(const std::string& what) : Error(what) {}
};

// Tail mass above tolerance after a gate/state construction.
class TruncationError : public Error {
public:
    TruncationError(const std::string& what, double tail_mass, long dim)
        : Error(what + " (tail mass " + detail::sci(tail_mass) + " at dim " + std::to_string(dim) + ")"),
          tail_mass(tail_mass), dim(dim) {}
    double tail_mass;
    long dim;
};

// Precondition violation: dimension mismatch, non-Hermitian generator, missing data.
class ContractError : public Error {
public:
    explicit ContractError(const std::string& what) : Error(what) {}
};

// Density-operator invariant violation (Hermiticity, trace, positivity).
class InvalidStateError : public Error {
public:
    explicit InvalidStateError(const std::string& what) : Error(what) {}
};

class InfeasiblePopulationError : public Error {
public:
    InfeasiblePopulationError(double n, double s)
        : Error("population " + std::to_string(n) + " below sinh^2(s) at s = " + std::to_string(s)),
          n(n), s(s) {}
    double n, s;
};

// Quartic solver found no admissible root; carries the four candidates.
class RootSelectionError : public Error {
public:
    RootSelectionError(const std::string& what, std::array<std::complex<double>, 4> roots)
        : Error(what), roots(roots) {}
    std::array<std::complex<double>, 4> roots;
};

class ConditioningError : public Error {
public:
    ConditioningError(const std::string& what, double condition_number)
        : Error(what + " (condition number " + std::to_string(condition_number) + ")"),
          condition_number(condition_number) {}
    double condition_number;
};

class UnsupportedOrderError : public Error {
public:
    explicit UnsupportedOrderError(const std::string& what) : Error(what) {}
};

// Value did not stabilize between two truncation dimensions; carries both.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double value_lo, double value_hi)
        : Error(what + " (values " + detail::sci(value_lo) + " / " + detail::sci(value_hi) + ")"),
          value_lo(value_lo), value_hi(value_hi) {}
    double value_lo, value_hi;
};

class IntegratorError : public Error {
public:
    IntegratorError(const std::string& what, double trace_drift)
        : Error(what + " (trace drift " + detail::sci(trace_drift) + "); increase steps"),
          trace_drift(trace_drift) {}
    double trace_drift;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace cubicsense
