#include <httplib.h>

#include "nonins/http.hpp"

#include "nonins/error.hpp"

namespace nonins::http {

UrlParts split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error(ErrorKind::config, "URL lacks a scheme: " + url);
    const auto path_begin = url.find('/', scheme_end + 3);
    if (path_begin == std::string::npos) return {url, ""};
    return {url.substr(0, path_begin), url.substr(path_begin)};
}

HttplibTransport::HttplibTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

Response HttplibTransport::post(const std::string& url, const Headers& headers, const std::string& body) {
    const UrlParts parts = split_url(url);
    httplib::Client client(parts.origin);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    httplib::Headers h(headers.begin(), headers.end());
    auto res = client.Post(parts.path.empty() ? "/" : parts.path, h, body, "application/json");
    if (!res) {
        throw Error(ErrorKind::transport, "POST " + url + " failed: " + httplib::to_string(res.error()));
    }
    return {res->status, res->body};
}

std::shared_ptr<Transport> default_transport() {
    return std::make_shared<HttplibTransport>();
}

}  // namespace nonins::http
