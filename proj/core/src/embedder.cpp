#include "hirag/embedder.hpp"

#include "hirag/errors.hpp"
#include "hirag/text.hpp"
#include "http.hpp"

#include <cmath>
#include <stdexcept>

namespace hirag {

double dot(const Embedding& a, const Embedding& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("embedding dimensions differ");
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) s += a.values[i] * b.values[i];
    return s;
}

double l2_norm(const Embedding& e) {
    return std::sqrt(dot(e, e));
}

std::vector<Embedding> Embedder::embed_batch(std::span<const std::string> texts) const {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed(t));
    return out;
}

HashEmbedder::HashEmbedder(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw std::invalid_argument("embedding dim must be positive");
}

Embedding HashEmbedder::embed(std::string_view input) const {
    Embedding e{std::vector<double>(dim_, 0.0)};
    for (const auto& token : text::lexical_tokens(input)) {
        e.values[text::fnv1a64(token) % dim_] += 1.0;
    }
    const double norm = l2_norm(e);
    if (norm > 0.0) {
        for (auto& v : e.values) v /= norm;
    }
    return e;
}

std::string HashEmbedder::describe() const {
    return "hash-bow/" + std::to_string(dim_);
}

HttpEmbedder::HttpEmbedder(HttpEmbedderConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) throw ConfigError("embedder endpoint is required");
    if (config_.dim == 0) throw ConfigError("embedder dim must be positive");
}

Embedding HttpEmbedder::embed(std::string_view input) const {
    std::vector<std::string> one{std::string(input)};
    return std::move(embed_batch(one).front());
}

std::vector<Embedding> HttpEmbedder::embed_batch(std::span<const std::string> texts) const {
    if (texts.empty()) return {};
    nlohmann::json body = {{"input", std::vector<std::string>(texts.begin(), texts.end())}};
    if (!config_.model.empty()) body["model"] = config_.model;
    http::Headers headers;
    if (auto key = http::env_or_empty(config_.api_key_env); !key.empty()) {
        headers.emplace_back("Authorization", "Bearer " + key);
    }
    auto reply = http::post_json(config_.endpoint, headers, body, config_.timeout);

    std::vector<Embedding> out;
    try {
        if (reply.contains("data")) {
            for (const auto& item : reply.at("data")) {
                out.push_back({item.at("embedding").get<std::vector<double>>()});
            }
        } else {
            for (const auto& v : reply.at("embeddings")) out.push_back({v.get<std::vector<double>>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw TransportError("embedder reply has unexpected shape: " + std::string(e.what()));
    }
    if (out.size() != texts.size()) {
        throw TransportError("embedder returned " + std::to_string(out.size()) + " vectors for " +
                             std::to_string(texts.size()) + " texts");
    }
    for (const auto& e : out) {
        if (e.dim() != config_.dim) {
            throw TransportError("embedder returned dim " + std::to_string(e.dim()) +
                                 ", configured " + std::to_string(config_.dim));
        }
    }
    return out;
}

std::string HttpEmbedder::describe() const {
    return "http:" + config_.endpoint + "/" + std::to_string(config_.dim);
}

}  // namespace hirag
