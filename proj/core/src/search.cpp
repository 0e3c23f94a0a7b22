#include "hirag/search.hpp"

#include "hirag/errors.hpp"
#include "hirag/text.hpp"
#include "http.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace hirag {

std::optional<SearchResult> SearchClient::search(std::string_view query) {
    auto q = text::trim(query);
    if (q.empty()) throw std::invalid_argument("search query must be non-empty");
    auto result = do_search(q);
    if (result && text::trim(result->text).empty()) return std::nullopt;
    return result;
}

// ---------------------------------------------------------------------------

TokenBucket::TokenBucket(double rate_per_second, double burst)
    : rate_(rate_per_second), burst_(std::max(1.0, burst)), tokens_(burst_), last_(Clock::now()) {
    if (rate_per_second <= 0.0) throw ConfigError("rate limit must be positive");
}

void TokenBucket::acquire() {
    std::unique_lock lock(mu_);
    for (;;) {
        auto now = Clock::now();
        std::chrono::duration<double> elapsed = now - last_;
        last_ = now;
        tokens_ = std::min(burst_, tokens_ + elapsed.count() * rate_);
        if (tokens_ >= 1.0) {
            tokens_ -= 1.0;
            return;
        }
        auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
        lock.unlock();
        std::this_thread::sleep_for(wait);
        lock.lock();
    }
}

// ---------------------------------------------------------------------------

std::shared_ptr<ScriptedSearch> ScriptedSearch::from_json(const nlohmann::json& script) {
    auto s = std::make_shared<ScriptedSearch>();
    if (!script.is_object()) throw ConfigError("search script must be an object");
    if (auto it = script.find("results"); it != script.end()) {
        if (!it->is_object()) throw ConfigError("search script 'results' must be an object");
        for (const auto& [query, value] : it->items()) {
            if (value.is_string()) {
                s->add(query, {value.get<std::string>(), ""});
            } else if (value.is_object()) {
                s->add(query, {value.value("snippet", std::string()), value.value("link", std::string())});
            } else {
                throw ConfigError("search script result for '" + query + "' must be a string or object");
            }
        }
    }
    if (auto it = script.find("failures"); it != script.end()) {
        for (const auto& q : *it) s->fail_on(q.get<std::string>());
    }
    return s;
}

std::shared_ptr<ScriptedSearch> ScriptedSearch::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open search script " + path.string());
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("search script " + path.string() + ": " + e.what());
    }
}

void ScriptedSearch::add(std::string query, SearchResult result) {
    std::lock_guard lock(mu_);
    results_[std::string(text::trim(query))] = std::move(result);
}

void ScriptedSearch::fail_on(std::string query) {
    std::lock_guard lock(mu_);
    failures_.insert(std::string(text::trim(query)));
}

std::string ScriptedSearch::describe() const {
    std::lock_guard lock(mu_);
    return "scripted-search/" + std::to_string(results_.size());
}

std::vector<std::string> ScriptedSearch::calls() const {
    std::lock_guard lock(mu_);
    return calls_;
}

std::optional<SearchResult> ScriptedSearch::do_search(std::string_view query) {
    std::lock_guard lock(mu_);
    calls_.emplace_back(query);
    if (failures_.contains(query)) {
        throw TransportError("scripted search failure for '" + std::string(query) + "'");
    }
    auto it = results_.find(query);
    if (it == results_.end()) return std::nullopt;
    return it->second;
}

// ---------------------------------------------------------------------------

SerperSearch::SerperSearch(SerperConfig config)
    : config_(std::move(config)), limiter_(config_.requests_per_second, config_.requests_per_second) {
    if (config_.endpoint.empty()) throw ConfigError("search endpoint is required");
}

std::string SerperSearch::describe() const {
    return "serper:" + config_.endpoint;
}

std::optional<SearchResult> SerperSearch::do_search(std::string_view query) {
    auto key = http::env_or_empty(config_.api_key_env);
    if (key.empty()) {
        throw TransportError("search API key not set (environment variable " + config_.api_key_env +
                             ")");
    }
    limiter_.acquire();
    auto reply = http::post_json(config_.endpoint, {{"X-API-KEY", key}},
                                 {{"q", std::string(query)}, {"num", 1}}, config_.timeout);
    auto organic = reply.find("organic");
    if (organic == reply.end() || !organic->is_array() || organic->empty()) return std::nullopt;
    const auto& top = organic->front();
    SearchResult r{top.value("snippet", std::string()), top.value("link", std::string())};
    if (r.text.empty()) return std::nullopt;
    return r;
}

}  // namespace hirag
