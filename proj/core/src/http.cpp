#include "http.hpp"

#include "hirag/errors.hpp"

#include <httplib.h>

#include <cstdlib>
#include <regex>

namespace hirag::http {

namespace {

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

ParsedUrl parse_url(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re)) throw ConfigError("invalid endpoint URL: " + url);
    return {m[1].str(), m[2].matched ? m[2].str() : std::string("/")};
}

}  // namespace

nlohmann::json post_json(const std::string& url, const Headers& headers,
                         const nlohmann::json& body, std::chrono::milliseconds timeout) {
    auto parsed = parse_url(url);
    httplib::Client client(parsed.origin);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto res = client.Post(parsed.path, h, body.dump(), "application/json");
    if (!res) {
        throw TransportError("POST " + url + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
        auto snippet = res->body.substr(0, 200);
        throw TransportError("POST " + url + " returned HTTP " + std::to_string(res->status) + ": " +
                             snippet);
    }
    try {
        return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
        throw TransportError("POST " + url + " returned invalid JSON: " + e.what());
    }
}

std::string env_or_empty(const std::string& name) {
    if (name.empty()) return {};
    const char* v = std::getenv(name.c_str());
    return v ? std::string(v) : std::string();
}

}  // namespace hirag::http
