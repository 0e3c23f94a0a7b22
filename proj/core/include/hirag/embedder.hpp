#pragma once

#include <chrono>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hirag {

struct Embedding {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
    bool operator==(const Embedding&) const = default;
};

double dot(const Embedding& a, const Embedding& b);
double l2_norm(const Embedding& e);

/// Text-to-vector backend. Implementations are pure functions of their input
/// for a fixed configuration and are safe to call concurrently.
class Embedder {
public:
    virtual ~Embedder() = default;

    virtual std::size_t dim() const = 0;
    virtual Embedding embed(std::string_view text) const = 0;
    virtual std::vector<Embedding> embed_batch(std::span<const std::string> texts) const;
    virtual std::string describe() const = 0;
};

/// Deterministic hashed bag-of-words: each lowercased token increments the
/// bucket fnv1a64(token) % dim, then the vector is L2-normalized. Text with no
/// tokens maps to the zero vector.
class HashEmbedder final : public Embedder {
public:
    static constexpr std::size_t kDefaultDim = 256;

    explicit HashEmbedder(std::size_t dim = kDefaultDim);

    std::size_t dim() const override { return dim_; }
    Embedding embed(std::string_view text) const override;
    std::string describe() const override;

private:
    std::size_t dim_;
};

struct HttpEmbedderConfig {
    std::string endpoint;  // full URL, e.g. http://localhost:8080/v1/embeddings
    std::string model;
    std::string api_key_env;  // optional; sent as a bearer token when set
    std::size_t dim = 768;
    std::chrono::milliseconds timeout{30000};
};

/// Calls an embeddings endpoint. Request body: {"model", "input": [texts]}.
/// Accepts either {"data": [{"embedding": [...]}, ...]} or
/// {"embeddings": [[...], ...]} in the response. Vectors are used as returned.
class HttpEmbedder final : public Embedder {
public:
    explicit HttpEmbedder(HttpEmbedderConfig config);

    std::size_t dim() const override { return config_.dim; }
    Embedding embed(std::string_view text) const override;
    std::vector<Embedding> embed_batch(std::span<const std::string> texts) const override;
    std::string describe() const override;

private:
    HttpEmbedderConfig config_;
};

}  // namespace hirag
