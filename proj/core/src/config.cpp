#include "hirag/config.hpp"

#include "hirag/errors.hpp"
#include "hirag/scripted_backend.hpp"

#include <fstream>
#include <set>

namespace hirag {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    if (p.empty()) return {};
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const char* where) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string(where) + "." + key + " has the wrong type");
    }
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const char* where) {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, _] : j.items()) {
        if (!ok.contains(k)) throw ConfigError(std::string("unknown key '") + k + "' in " + where);
    }
}

LlmBackendSpec parse_llm(const json& j, const fs::path& base, const char* where) {
    if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
    LlmBackendSpec s;
    s.kind = get_or<std::string>(j, "kind", "scripted", where);
    s.script = resolve(base, get_or<std::string>(j, "script", "", where));
    s.http.endpoint = get_or<std::string>(j, "endpoint", "", where);
    s.http.model = get_or<std::string>(j, "model", "", where);
    s.http.api_key_env = get_or<std::string>(j, "api_key_env", s.http.api_key_env, where);
    s.http.timeout = std::chrono::milliseconds(get_or<long long>(j, "timeout_ms", 60000, where));
    return s;
}

void validate_llm(const LlmBackendSpec& s, const std::string& where) {
    if (s.kind == "scripted") {
        if (s.script.empty()) throw ConfigError(where + ": scripted backend needs 'script'");
        if (!fs::exists(s.script)) throw ConfigError(where + ": script not found: " + s.script.string());
    } else if (s.kind == "http") {
        if (s.http.endpoint.empty() || s.http.model.empty()) {
            throw ConfigError(where + ": http backend needs 'endpoint' and 'model'");
        }
    } else {
        throw ConfigError(where + ": unknown backend kind '" + s.kind + "'");
    }
}

std::shared_ptr<CompletionBackend> make_llm_backend(
    const LlmBackendSpec& s, std::map<fs::path, std::shared_ptr<ScriptedBackend>>& scripts) {
    if (s.kind == "http") return std::make_shared<HttpChatBackend>(s.http);
    auto key = fs::weakly_canonical(s.script);
    auto& slot = scripts[key];
    if (!slot) slot = ScriptedBackend::load(s.script);
    return slot;
}

}  // namespace

RunConfig RunConfig::from_json(const json& j, const fs::path& base) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(j,
                   {"corpus", "index", "mode", "seed", "concurrency", "pipeline", "generation",
                    "retry", "llm", "embedder", "search"},
                   "config");
    RunConfig c;
    c.corpus_dir = resolve(base, get_or<std::string>(j, "corpus", "", "config"));
    c.index_dir = resolve(base, get_or<std::string>(j, "index", "", "config"));
    auto mode = get_or<std::string>(j, "mode", "local", "config");
    auto parsed_mode = parse_retrieval_mode(mode);
    if (!parsed_mode) throw ConfigError("mode must be 'local' or 'online', got '" + mode + "'");
    c.pipeline.mode = *parsed_mode;
    c.pipeline.seed = get_or<std::uint64_t>(j, "seed", 0, "config");
    c.concurrency = get_or<std::size_t>(j, "concurrency", 1, "config");

    if (auto it = j.find("pipeline"); it != j.end()) {
        const auto& p = *it;
        reject_unknown(p, {"th1", "th2", "th3", "m", "max_turns", "epsilon", "chunk_size"}, "pipeline");
        c.pipeline.th1 = get_or<std::size_t>(p, "th1", c.pipeline.th1, "pipeline");
        c.pipeline.th2 = get_or<std::size_t>(p, "th2", c.pipeline.th2, "pipeline");
        c.pipeline.th3 = get_or<std::size_t>(p, "th3", c.pipeline.th3, "pipeline");
        c.pipeline.m = get_or<std::size_t>(p, "m", c.pipeline.m, "pipeline");
        c.pipeline.max_turns = get_or<std::size_t>(p, "max_turns", c.pipeline.max_turns, "pipeline");
        c.pipeline.epsilon = get_or<double>(p, "epsilon", c.pipeline.epsilon, "pipeline");
        c.pipeline.chunk_size = get_or<std::size_t>(p, "chunk_size", c.pipeline.chunk_size, "pipeline");
    }
    if (auto it = j.find("generation"); it != j.end()) {
        c.generation.temperature = get_or<double>(*it, "temperature", 0.0, "generation");
        c.generation.max_tokens = get_or<int>(*it, "max_tokens", c.generation.max_tokens, "generation");
    }
    if (auto it = j.find("retry"); it != j.end()) {
        c.retry.max_attempts = get_or<int>(*it, "max_attempts", c.retry.max_attempts, "retry");
        c.retry.initial_backoff = std::chrono::milliseconds(
            get_or<long long>(*it, "initial_backoff_ms", c.retry.initial_backoff.count(), "retry"));
        c.retry.multiplier = get_or<double>(*it, "multiplier", c.retry.multiplier, "retry");
    }
    if (auto it = j.find("llm"); it != j.end()) {
        c.llm = parse_llm(*it, base, "llm");
        if (auto roles = it->find("roles"); roles != it->end()) {
            for (const auto& [name, spec] : roles->items()) {
                auto role = parse_prompt_role(name);
                if (!role) throw ConfigError("llm.roles: unknown role '" + name + "'");
                c.llm_roles[*role] = parse_llm(spec, base, "llm.roles");
            }
        }
    }
    if (auto it = j.find("embedder"); it != j.end()) {
        const auto& e = *it;
        c.embedder.kind = get_or<std::string>(e, "kind", "hash", "embedder");
        c.embedder.dim = get_or<std::size_t>(e, "dim", c.embedder.dim, "embedder");
        c.embedder.http.endpoint = get_or<std::string>(e, "endpoint", "", "embedder");
        c.embedder.http.model = get_or<std::string>(e, "model", "", "embedder");
        c.embedder.http.api_key_env = get_or<std::string>(e, "api_key_env", "", "embedder");
        c.embedder.http.dim = c.embedder.dim;
        c.embedder.http.timeout =
            std::chrono::milliseconds(get_or<long long>(e, "timeout_ms", 30000, "embedder"));
    }
    if (auto it = j.find("search"); it != j.end()) {
        const auto& s = *it;
        c.search.kind = get_or<std::string>(s, "kind", "none", "search");
        c.search.script = resolve(base, get_or<std::string>(s, "script", "", "search"));
        c.search.serper.endpoint = get_or<std::string>(s, "endpoint", c.search.serper.endpoint, "search");
        c.search.serper.api_key_env =
            get_or<std::string>(s, "api_key_env", c.search.serper.api_key_env, "search");
        c.search.serper.timeout = std::chrono::milliseconds(
            get_or<long long>(s, "timeout_ms", c.search.serper.timeout.count(), "search"));
        c.search.serper.requests_per_second = get_or<double>(
            s, "requests_per_second", c.search.serper.requests_per_second, "search");
    }
    return c;
}

RunConfig RunConfig::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return from_json(j, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

void RunConfig::validate() const {
    pipeline.validate();
    if (concurrency < 1) throw ConfigError("concurrency must be >= 1");
    if (corpus_dir.empty()) throw ConfigError("no corpus directory configured (--corpus)");
    if (!fs::is_directory(corpus_dir)) throw ConfigError("corpus directory not found: " + corpus_dir.string());
    if (index_dir.empty()) throw ConfigError("no index directory configured (--index)");
    if (!fs::is_directory(index_dir)) throw ConfigError("index directory not found: " + index_dir.string());
    validate_llm(llm, "llm");
    for (const auto& [role, spec] : llm_roles) validate_llm(spec, "llm.roles." + std::string(to_string(role)));
    if (embedder.kind != "hash" && embedder.kind != "http") {
        throw ConfigError("embedder.kind must be 'hash' or 'http'");
    }
    if (embedder.dim == 0) throw ConfigError("embedder.dim must be positive");
    if (embedder.kind == "http" && embedder.http.endpoint.empty()) {
        throw ConfigError("http embedder needs 'endpoint'");
    }
    if (search.kind == "scripted") {
        if (!fs::exists(search.script)) throw ConfigError("search script not found: " + search.script.string());
    } else if (search.kind != "none" && search.kind != "serper") {
        throw ConfigError("search.kind must be 'none', 'scripted' or 'serper'");
    }
    if (pipeline.mode == RetrievalMode::online && search.kind == "none") {
        throw ConfigError("online mode needs a search backend");
    }
    if (retry.max_attempts < 1 || retry.max_attempts > 3) {
        throw ConfigError("retry.max_attempts must be between 1 and 3");
    }
}

std::unique_ptr<Embedder> make_embedder(const EmbedderSpec& spec) {
    if (spec.kind == "http") {
        auto cfg = spec.http;
        cfg.dim = spec.dim;
        return std::make_unique<HttpEmbedder>(cfg);
    }
    return std::make_unique<HashEmbedder>(spec.dim);
}

Runtime::Runtime(const RunConfig& config) {
    config.validate();
    corpus_ = Corpus::load(config.corpus_dir);
    index_ = SparseIndex::load(config.index_dir);
    if (index_.fingerprint() != SparseIndex::fingerprint_of(corpus_)) {
        throw IndexError("index " + config.index_dir.string() + " was not built from corpus " +
                         config.corpus_dir.string());
    }
    embedder_ = make_embedder(config.embedder);

    std::map<fs::path, std::shared_ptr<ScriptedBackend>> scripts;
    llm_ = std::make_unique<LlmClient>(make_llm_backend(config.llm, scripts), config.generation,
                                       config.retry);
    for (const auto& [role, spec] : config.llm_roles) {
        llm_->set_backend(role, make_llm_backend(spec, scripts));
    }

    if (config.search.kind == "scripted") {
        search_ = ScriptedSearch::load(config.search.script);
    } else if (config.search.kind == "serper") {
        search_ = std::make_shared<SerperSearch>(config.search.serper);
    }
}

Pipeline Runtime::pipeline(const PipelineConfig& config) const {
    PipelineDeps deps{&corpus_, &index_, embedder_.get(), llm_.get(), search_.get()};
    return Pipeline(deps, config);
}

}  // namespace hirag
