#pragma once

#include <stdexcept>
#include <string>

namespace simlearn {

// Base of every error raised by the library. Callers that only need a
// message can catch this; the CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MalformedTutorError : public Error {
public:
    using Error::Error;
};

class InvariantViolation : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Tutor contract misuse: submitting to a locked field, asking for a hint in
// posttest mode, acting on a finished problem.
class ProtocolError : public Error {
public:
    using Error::Error;
};

class SessionError : public Error {
public:
    using Error::Error;
};

class GenerationError : public Error {
public:
    using Error::Error;
};

class InductionFailure : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class DesignError : public Error {
public:
    using Error::Error;
};

class SeparationError : public Error {
public:
    SeparationError(std::string term, const std::string& what)
        : Error(what), term_(std::move(term)) {}

    const std::string& term() const noexcept { return term_; }

private:
    std::string term_;
};

}  // namespace simlearn
