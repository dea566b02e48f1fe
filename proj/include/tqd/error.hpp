#pragma once

#include <stdexcept>
#include <string>

namespace tqd {

/// Failure category. The numeric value doubles as the CLI exit code.
enum class ErrorKind : int {
    Usage = 1,
    Io = 2,
    Data = 3,
    Numeric = 4,
    Artifact = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

}  // namespace tqd
