#ifndef TASEPLAB_ERRORS_HPP
#define TASEPLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace taseplab {

// Bad user input (config fields, domain violations). CLI exit code 2.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

// Parameters outside the regime where a quantity is defined
// (e.g. a derivative equation with no solution). CLI exit code 3.
class regime_error : public std::runtime_error {
public:
    explicit regime_error(const std::string& what) : std::runtime_error(what) {}
};

// Enumeration caps, solver cutoffs, exhausted Monte Carlo budgets. CLI exit code 4.
class budget_error : public std::runtime_error {
public:
    explicit budget_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace taseplab

#endif
