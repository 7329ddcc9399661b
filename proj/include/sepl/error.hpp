#pragma once

#include <stdexcept>
#include <string>

namespace sepl {

/// Base exception for every failure raised by the library. The message is a
/// single line so the CLI can forward it verbatim to stderr.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or unreadable input files.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error("format: " + what) {}
};

}  // namespace sepl
