#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <string>

namespace nonins::http {

struct Response {
    int status = 0;
    std::string body;
};

using Headers = std::multimap<std::string, std::string>;

/// Minimal POST interface the teacher client needs. Implementations throw
/// Error(ErrorKind::transport) when no HTTP response was received.
class Transport {
public:
    virtual ~Transport() = default;
    virtual Response post(const std::string& url, const Headers& headers, const std::string& body) = 0;
};

/// cpp-httplib backed transport. Safe to call from several threads; each call
/// opens its own connection.
class HttplibTransport : public Transport {
public:
    explicit HttplibTransport(std::chrono::seconds timeout = std::chrono::seconds(120));

    Response post(const std::string& url, const Headers& headers, const std::string& body) override;

private:
    std::chrono::seconds timeout_;
};

struct UrlParts {
    std::string origin;  // scheme://host[:port]
    std::string path;    // begins with '/', may be empty
};

UrlParts split_url(const std::string& url);

std::shared_ptr<Transport> default_transport();

}  // namespace nonins::http
