#pragma once

#include <stdexcept>
#include <string>

namespace capmeasure {

enum class ErrorKind {
    config,      // invalid input document or parameter
    invalid,     // malformed mathematical object (asymmetric metric, bad weights, ...)
    domain,      // evaluation outside a function's domain
    infeasible,  // well-posed request with no admissible answer
};

inline const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::config: return "config";
        case ErrorKind::invalid: return "invalid";
        case ErrorKind::domain: return "domain";
        case ErrorKind::infeasible: return "infeasible";
    }
    return "internal";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace capmeasure
