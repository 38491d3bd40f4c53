#pragma once

#include <stdexcept>
#include <string>

namespace privleak {

enum class ErrorKind {
    io,                // file cannot be read or written
    format,            // file-level schema problem
    parse,             // record-level decode failure
    undefined_input,   // empty payload, empty series
    insufficient_sample,
    domain,            // argument outside the function's domain
    degenerate_length, // octet length correction with n <= 1
    index,             // index out of range
    not_found,         // unknown rule / session / component
    contract,          // caller broke a documented precondition
    conflict,          // operation not allowed in current state
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::io: return "io";
    case ErrorKind::format: return "format";
    case ErrorKind::parse: return "parse";
    case ErrorKind::undefined_input: return "undefined_input";
    case ErrorKind::insufficient_sample: return "insufficient_sample";
    case ErrorKind::domain: return "domain";
    case ErrorKind::degenerate_length: return "degenerate_length";
    case ErrorKind::index: return "index";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::contract: return "contract";
    case ErrorKind::conflict: return "conflict";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace privleak
