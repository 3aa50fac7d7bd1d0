#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <string>

#include "ragprobe/common/error.hpp"

namespace ragprobe {

struct HttpResponse {
    int status = 0;
    std::string body;
};

using HttpHeaders = std::map<std::string, std::string>;

/// Connection-level failure (refused, reset, timed out): no HTTP status was received.
class TransportFailure : public Error {
public:
    using Error::Error;
};

/// Minimal POST-JSON transport. Implementations must be safe to call from several threads.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse post_json(const std::string& url, const std::string& body, const HttpHeaders& headers) = 0;
};

struct HttpTransportOptions {
    std::chrono::seconds connect_timeout{10};
    std::chrono::seconds read_timeout{300};
};

/// cpp-httplib backed transport; supports http:// and https:// URLs.
std::unique_ptr<HttpTransport> make_http_transport(HttpTransportOptions options = {});

struct ParsedUrl {
    std::string scheme_host_port; // "http://host:port"
    std::string path;             // "/v1/chat/completions"
};

/// Throws InvalidArgument for URLs without an http(s) scheme.
ParsedUrl parse_url(const std::string& url);

} // namespace ragprobe
