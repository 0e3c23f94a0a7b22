#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "hirag/corpus.hpp"
#include "hirag/embedder.hpp"
#include "hirag/llm.hpp"
#include "hirag/pipeline.hpp"
#include "hirag/search.hpp"
#include "hirag/sparse_index.hpp"

namespace hirag {

struct LlmBackendSpec {
    std::string kind = "scripted";  // scripted | http
    std::filesystem::path script;
    HttpChatConfig http;
};

struct EmbedderSpec {
    std::string kind = "hash";  // hash | http
    HttpEmbedderConfig http;
    std::size_t dim = HashEmbedder::kDefaultDim;
};

struct SearchSpec {
    std::string kind = "none";  // none | scripted | serper
    std::filesystem::path script;
    SerperConfig serper;
};

/// Everything a command needs, parsed from a JSON config file and then
/// overridden by command-line flags. Relative paths resolve against the
/// config file's directory.
///
/// {
///   "corpus": "corpus/", "index": "index/", "mode": "local", "seed": 0,
///   "concurrency": 4,
///   "pipeline": {"th1": 3, "th2": 2, "th3": 4, "m": 5, "max_turns": 5,
///                "epsilon": 0.05, "chunk_size": 100},
///   "generation": {"temperature": 0, "max_tokens": 256},
///   "retry": {"max_attempts": 3, "initial_backoff_ms": 500, "multiplier": 2},
///   "llm": {"kind": "http", "endpoint": "...", "model": "...", "api_key_env": "...",
///           "timeout_ms": 60000, "roles": {"decomposer": {...}}},
///   "embedder": {"kind": "hash", "dim": 256},
///   "search": {"kind": "serper", "endpoint": "...", "api_key_env": "...",
///              "requests_per_second": 5}
/// }
struct RunConfig {
    std::filesystem::path corpus_dir;
    std::filesystem::path index_dir;
    PipelineConfig pipeline;
    std::size_t concurrency = 1;
    GenerationParams generation;
    RetryPolicy retry;
    LlmBackendSpec llm;
    std::map<PromptRole, LlmBackendSpec> llm_roles;
    EmbedderSpec embedder;
    SearchSpec search;

    static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
    static RunConfig load(const std::filesystem::path& path);

    /// Throws ConfigError on bad thresholds, missing paths or backend settings.
    void validate() const;
};

/// Loaded corpus, index and backends for one command invocation.
class Runtime {
public:
    explicit Runtime(const RunConfig& config);

    const Corpus& corpus() const { return corpus_; }
    const SparseIndex& index() const { return index_; }
    const Embedder& embedder() const { return *embedder_; }
    const LlmClient& llm() const { return *llm_; }
    SearchClient* search() const { return search_.get(); }

    Pipeline pipeline(const PipelineConfig& config) const;

private:
    Corpus corpus_;
    SparseIndex index_;
    std::unique_ptr<Embedder> embedder_;
    std::unique_ptr<LlmClient> llm_;
    std::shared_ptr<SearchClient> search_;
};

std::unique_ptr<Embedder> make_embedder(const EmbedderSpec& spec);

}  // namespace hirag
