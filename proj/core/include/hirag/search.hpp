#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace hirag {

struct SearchResult {
    std::string text;
    std::string source_url;
};

/// Web search used by the online rewrite path. Only the top result is ever
/// returned. "No results" is nullopt; transport problems throw
/// TransportError so callers can tell the two apart.
class SearchClient {
public:
    virtual ~SearchClient() = default;

    std::optional<SearchResult> search(std::string_view query);
    virtual std::string describe() const = 0;

protected:
    virtual std::optional<SearchResult> do_search(std::string_view query) = 0;
};

/// Token bucket limiter; acquire() blocks until a token is available.
class TokenBucket {
public:
    TokenBucket(double rate_per_second, double burst);

    void acquire();

private:
    using Clock = std::chrono::steady_clock;

    double rate_;
    double burst_;
    double tokens_;
    Clock::time_point last_;
    std::mutex mu_;
};

/// Replays canned results keyed by exact (trimmed) query text. Queries listed
/// under "failures" raise TransportError.
///
/// File: {"results": {"<query>": {"snippet": "...", "link": "..."} | "<snippet>"},
///        "failures": ["<query>", ...]}
class ScriptedSearch final : public SearchClient {
public:
    ScriptedSearch() = default;

    static std::shared_ptr<ScriptedSearch> from_json(const nlohmann::json& script);
    static std::shared_ptr<ScriptedSearch> load(const std::filesystem::path& path);

    void add(std::string query, SearchResult result);
    void fail_on(std::string query);

    std::string describe() const override;
    std::vector<std::string> calls() const;

protected:
    std::optional<SearchResult> do_search(std::string_view query) override;

private:
    std::map<std::string, SearchResult, std::less<>> results_;
    std::set<std::string, std::less<>> failures_;
    mutable std::mutex mu_;
    std::vector<std::string> calls_;
};

struct SerperConfig {
    std::string endpoint = "https://google.serper.dev/search";
    std::string api_key_env = "SERPER_API_KEY";
    std::chrono::milliseconds timeout{15000};
    double requests_per_second = 5.0;
};

/// Serper-style Google search API: POST {"q", "num": 1}, reads
/// organic[0].snippet and organic[0].link.
class SerperSearch final : public SearchClient {
public:
    explicit SerperSearch(SerperConfig config);

    std::string describe() const override;

protected:
    std::optional<SearchResult> do_search(std::string_view query) override;

private:
    SerperConfig config_;
    TokenBucket limiter_;
};

}  // namespace hirag
