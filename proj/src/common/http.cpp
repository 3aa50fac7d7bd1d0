#include "ragprobe/common/http.hpp"

#include <httplib.h>

namespace ragprobe {

ParsedUrl parse_url(const std::string& url)
{
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw InvalidArgument("URL without scheme: " + url);
    }
    auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw InvalidArgument("unsupported URL scheme: " + url);
    }
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return ParsedUrl{url, "/"};
    }
    return ParsedUrl{url.substr(0, path_start), url.substr(path_start)};
}

namespace {

class HttplibTransport final : public HttpTransport {
public:
    explicit HttplibTransport(HttpTransportOptions options) : options_(options) {}

    HttpResponse post_json(const std::string& url, const std::string& body, const HttpHeaders& headers) override
    {
        auto parsed = parse_url(url);
        httplib::Client client(parsed.scheme_host_port);
        client.set_connection_timeout(options_.connect_timeout);
        client.set_read_timeout(options_.read_timeout);
        httplib::Headers h;
        for (const auto& [k, v] : headers) {
            h.emplace(k, v);
        }
        auto res = client.Post(parsed.path, h, body, "application/json");
        if (!res) {
            throw TransportFailure("POST " + url + " failed: " + httplib::to_string(res.error()));
        }
        return HttpResponse{res->status, res->body};
    }

private:
    HttpTransportOptions options_;
};

} // namespace

std::unique_ptr<HttpTransport> make_http_transport(HttpTransportOptions options)
{
    return std::make_unique<HttplibTransport>(options);
}

} // namespace ragprobe
