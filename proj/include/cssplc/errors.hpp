#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cssplc {

// Base of every error raised by the library. The CLI maps the validation
// family (parameter/framing/config/parse) to exit code 1 and everything else
// to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A value outside its mathematical domain (symbol index, spreading factor...).
class ParameterError : public Error {
public:
    using Error::Error;
};

// A signal whose length does not match the symbol framing.
class FramingError : public Error {
public:
    using Error::Error;
};

// An inconsistent channel or experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed input file. Carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : Error(source + (line > 0 ? ":" + std::to_string(line) : std::string{}) + ": " + what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Filesystem failures, always with the offending path in the message.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace cssplc
