#include "nonins/error.hpp"

namespace nonins {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_argument: return "invalid-argument";
        case ErrorKind::io: return "io";
        case ErrorKind::parse: return "parse";
        case ErrorKind::missing_input: return "missing-input";
        case ErrorKind::shape_mismatch: return "shape-mismatch";
        case ErrorKind::non_finite: return "non-finite";
        case ErrorKind::transport: return "transport";
        case ErrorKind::rate_limited: return "rate-limited";
        case ErrorKind::auth: return "auth";
        case ErrorKind::refusal: return "refusal";
        case ErrorKind::provider: return "provider";
        case ErrorKind::unparseable_reply: return "unparseable-reply";
        case ErrorKind::config: return "config";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

UnparseableReply::UnparseableReply(const std::string& message, std::string raw_reply)
    : Error(ErrorKind::unparseable_reply, message), raw_(std::move(raw_reply)) {}

}  // namespace nonins
