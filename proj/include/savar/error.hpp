#pragma once

#include <stdexcept>
#include <string>

namespace savar {

/// Failure classes; the CLI maps them onto exit codes 2, 3 and 4.
enum class ErrorKind {
    validation,  // malformed input or parameters out of range
    model,       // a model precondition does not hold (e.g. nonstationary spec)
    internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail_validation(const std::string& what) {
    throw Error(ErrorKind::validation, what);
}

[[noreturn]] inline void fail_model(const std::string& what) {
    throw Error(ErrorKind::model, what);
}

inline int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::validation: return 2;
        case ErrorKind::model: return 3;
        case ErrorKind::internal: return 4;
    }
    return 4;
}

}  // namespace savar
