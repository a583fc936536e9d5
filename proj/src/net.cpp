#include "xcot/net.hpp"

#include <stdexcept>

#include "httplib.h"

namespace xcot {

std::pair<std::string, std::string> split_url(const std::string& url) {
    std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw std::invalid_argument("URL missing scheme: '" + url + "'");
    }
    std::size_t path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

HttpResponse HttplibTransport::post_json(const std::string& url, const HttpHeaders& headers,
                                         const std::string& body, int timeout_s) {
    auto [origin, path] = split_url(url);
    httplib::Client client(origin);
    client.set_connection_timeout(timeout_s, 0);
    client.set_read_timeout(timeout_s, 0);
    client.set_write_timeout(timeout_s, 0);

    httplib::Headers h;
    for (const auto& [key, value] : headers) h.emplace(key, value);

    auto res = client.Post(path, h, body, "application/json");
    HttpResponse out;
    if (!res) {
        out.transport_error = httplib::to_string(res.error());
        return out;
    }
    out.status = res->status;
    out.body = res->body;
    return out;
}

}  // namespace xcot
