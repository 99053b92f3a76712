#pragma once

#include <stdexcept>
#include <string>

namespace hopcycle {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidDimension : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// The learning equation J*Sigma = Sigma*P has no solution.
class NotAdmissible : public Error {
public:
    using Error::Error;
};

/// A regularized inverse firing function was evaluated outside its domain.
class DomainError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class IntegrationFailure : public Error {
public:
    IntegrationFailure(const std::string& what, double last_valid_time)
        : Error(what), last_valid_time_(last_valid_time) {}
    double last_valid_time() const noexcept { return last_valid_time_; }

private:
    double last_valid_time_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace hopcycle
