#pragma once

#include <string>
#include <utility>
#include <vector>

namespace xcot {

struct HttpResponse {
    int status = 0;
    std::string body;
    std::string transport_error;  // nonempty when no HTTP exchange happened
    bool ok() const { return transport_error.empty(); }
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

class Transport {
  public:
    virtual ~Transport() = default;
    virtual HttpResponse post_json(const std::string& url, const HttpHeaders& headers,
                                   const std::string& body, int timeout_s) = 0;
};

// cpp-httplib client; https URLs use OpenSSL.
class HttplibTransport final : public Transport {
  public:
    HttpResponse post_json(const std::string& url, const HttpHeaders& headers,
                           const std::string& body, int timeout_s) override;
};

// "https://host:8443/v1/x" -> {"https://host:8443", "/v1/x"}; empty path
// becomes "/".
std::pair<std::string, std::string> split_url(const std::string& url);

}  // namespace xcot
