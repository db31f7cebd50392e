// error.hpp: Exception types shared by every kmsorder module

#pragma once

#include <stdexcept>
#include <string>

namespace kmsorder {

// Base for everything the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

// A logarithm or relative entropy was requested outside the support of a state.
class SupportViolation : public Error {
public:
    using Error::Error;
};

// Adaptive integration or time stepping did not reach the requested tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double achieved_error)
        : Error(what), achieved_error_(achieved_error) {}
    double achieved_error() const noexcept { return achieved_error_; }

private:
    double achieved_error_;
};

// Population in the top Fock level of a truncated mode exceeded the threshold.
class LeakageError : public Error {
public:
    LeakageError(const std::string& what, double leakage)
        : Error(what), leakage_(leakage) {}
    double leakage() const noexcept { return leakage_; }

private:
    double leakage_;
};

// A closed form and its numerical cross-check disagree.
class ConsistencyError : public Error {
public:
    ConsistencyError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

}  // namespace kmsorder
