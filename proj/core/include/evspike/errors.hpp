#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace evspike {

// Error taxonomy shared by the library and the CLI. The CLI maps these to
// process exit codes: IoError -> 1, ConfigError -> 2, DataError -> 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

// Parse failure in a line-oriented input; carries the 1-based line number.
class ParseError : public DataError {
public:
    ParseError(std::size_t line, const std::string& what)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace evspike
