#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nonins {

/// Broad failure categories. The CLI maps each one to a distinct exit status.
enum class ErrorKind {
    invalid_argument,
    io,
    parse,
    missing_input,
    shape_mismatch,
    non_finite,
    transport,
    rate_limited,
    auth,
    refusal,
    provider,
    unparseable_reply,
    config,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Judge reply that could not be mapped to a decision. Carries the raw text.
class UnparseableReply : public Error {
public:
    UnparseableReply(const std::string& message, std::string raw_reply);

    const std::string& raw_reply() const noexcept { return raw_; }

private:
    std::string raw_;
};

}  // namespace nonins
