#include "hirag/llm.hpp"

#include "hirag/errors.hpp"
#include "hirag/prompts.hpp"
#include "hirag/text.hpp"
#include "http.hpp"

#include <spdlog/spdlog.h>

#include <thread>

namespace hirag {

std::string_view to_string(PromptRole role) {
    switch (role) {
        case PromptRole::decomposer: return "decomposer";
        case PromptRole::entity: return "entity";
        case PromptRole::rewriter: return "rewriter";
        case PromptRole::filter: return "filter";
        case PromptRole::internal: return "internal";
        case PromptRole::summarizer: return "summarizer";
    }
    return "unknown";
}

std::optional<PromptRole> parse_prompt_role(std::string_view name) {
    for (auto r : kAllRoles) {
        if (to_string(r) == name) return r;
    }
    return std::nullopt;
}

std::string_view to_string(ChatRole role) {
    switch (role) {
        case ChatRole::system: return "system";
        case ChatRole::user: return "user";
        case ChatRole::assistant: return "assistant";
    }
    return "user";
}

std::string_view to_string(Judgement::Reason reason) {
    switch (reason) {
        case Judgement::Reason::marker: return "marker";
        case Judgement::Reason::duplicate: return "duplicate";
        case Judgement::Reason::fresh: return "fresh";
    }
    return "fresh";
}

std::string ChatRequest::prompt_text() const {
    std::string out;
    for (std::size_t i = 0; i < messages.size(); ++i) {
        if (i) out.push_back('\n');
        out += messages[i].content;
    }
    return out;
}

// ---------------------------------------------------------------------------

HttpChatBackend::HttpChatBackend(HttpChatConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) throw ConfigError("chat endpoint is required");
    if (config_.model.empty()) throw ConfigError("chat model name is required");
}

std::string HttpChatBackend::complete(const ChatRequest& request) {
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& turn : request.messages) {
        messages.push_back({{"role", to_string(turn.role)}, {"content", turn.content}});
    }
    nlohmann::json body = {{"model", config_.model},
                           {"messages", messages},
                           {"temperature", request.params.temperature},
                           {"max_tokens", request.params.max_tokens}};
    http::Headers headers;
    if (auto key = http::env_or_empty(config_.api_key_env); !key.empty()) {
        headers.emplace_back("Authorization", "Bearer " + key);
    }
    auto reply = http::post_json(config_.endpoint, headers, body, config_.timeout);
    try {
        const auto& content = reply.at("choices").at(0).at("message").at("content");
        return content.is_null() ? std::string() : content.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw TransportError("chat reply has unexpected shape: " + std::string(e.what()));
    }
}

std::string HttpChatBackend::describe() const {
    return "http:" + config_.model + "@" + config_.endpoint;
}

// ---------------------------------------------------------------------------

DecomposerOutput classify_decomposer_output(std::string raw) {
    DecomposerOutput out;
    auto trimmed = text::trim(raw);
    if (trimmed.empty()) {
        spdlog::warn("decomposer returned an empty completion; treating as done");
        out.kind = DecomposerOutput::Kind::done;
    } else if (trimmed == kTerminationMarker) {
        out.kind = DecomposerOutput::Kind::done;
    } else {
        out.kind = DecomposerOutput::Kind::sub_question;
        out.question = std::string(trimmed);
    }
    out.raw = std::move(raw);
    return out;
}

Judgement judge(const DecomposerOutput& output, std::span<const std::string> asked) {
    if (output.done()) return {true, Judgement::Reason::marker, {}};
    auto q = text::trim(output.question);
    for (const auto& prior : asked) {
        if (text::trim(prior) == q) return {true, Judgement::Reason::duplicate, {}};
    }
    return {false, Judgement::Reason::fresh, std::string(q)};
}

FilterVerdict parse_filter_response(std::string_view completion, bool* well_formed) {
    std::optional<bool> solvable;
    std::string answer;
    std::size_t pos = 0;
    while (pos <= completion.size()) {
        auto end = completion.find('\n', pos);
        if (end == std::string_view::npos) end = completion.size();
        auto line = text::trim(completion.substr(pos, end - pos));
        pos = end + 1;
        auto colon = line.find(':');
        if (colon == std::string_view::npos) continue;
        auto key = text::to_lower_ascii(text::trim(line.substr(0, colon)));
        auto value = text::trim(line.substr(colon + 1));
        if (key == "solvable" && !solvable) {
            auto v = text::to_lower_ascii(value);
            while (!v.empty() && (v.back() == '.' || v.back() == '!')) v.pop_back();
            if (v == "yes") solvable = true;
            else if (v == "no") solvable = false;
        } else if (key == "answer" && answer.empty()) {
            answer = std::string(value);
        }
    }
    if (well_formed) *well_formed = solvable.has_value();
    if (!solvable || !*solvable) return {false, {}};
    if (answer.empty()) {
        if (well_formed) *well_formed = false;
        return {false, {}};
    }
    return {true, std::move(answer)};
}

// ---------------------------------------------------------------------------

LlmClient::LlmClient(std::shared_ptr<CompletionBackend> default_backend, GenerationParams params,
                     RetryPolicy retry)
    : default_(std::move(default_backend)), params_(params), retry_(retry) {
    if (!default_) throw ConfigError("LlmClient needs a default backend");
    if (retry_.max_attempts < 1) throw ConfigError("retry budget must allow at least one attempt");
}

void LlmClient::set_backend(PromptRole role, std::shared_ptr<CompletionBackend> backend) {
    if (backend) per_role_[role] = std::move(backend);
}

const CompletionBackend& LlmClient::backend(PromptRole role) const {
    auto it = per_role_.find(role);
    return it == per_role_.end() ? *default_ : *it->second;
}

std::string LlmClient::complete(PromptRole role, std::string_view conversation,
                                std::vector<ChatTurn> messages) const {
    ChatRequest request{role, std::string(conversation), std::move(messages), params_};
    auto it = per_role_.find(role);
    auto& backend = it == per_role_.end() ? *default_ : *it->second;

    auto backoff = retry_.initial_backoff;
    for (int attempt = 1;; ++attempt) {
        try {
            return backend.complete(request);
        } catch (const TransportError& e) {
            if (attempt >= retry_.max_attempts) {
                throw TransportError(std::string(to_string(role)) + ": giving up after " +
                                     std::to_string(attempt) + " attempts: " + e.what());
            }
            spdlog::warn("{} request failed (attempt {}/{}): {}", to_string(role), attempt,
                         retry_.max_attempts, e.what());
            std::this_thread::sleep_for(backoff);
            backoff = std::chrono::milliseconds(
                static_cast<long long>(static_cast<double>(backoff.count()) * retry_.multiplier));
        }
    }
}

DecomposerOutput LlmClient::decompose(std::string_view conversation, std::string_view question,
                                      std::size_t turn, std::span<const std::string> answers) const {
    auto raw = complete(PromptRole::decomposer, conversation,
                        prompts::decomposer(question, turn, answers));
    return classify_decomposer_output(std::move(raw));
}

std::string LlmClient::extract_entity(std::string_view conversation,
                                      std::string_view sub_question) const {
    auto raw = complete(PromptRole::entity, conversation, prompts::entity(sub_question));
    auto entity = text::trim(raw);
    if (entity.empty()) {
        spdlog::warn("entity extraction returned nothing; using the question itself");
        return std::string(text::trim(sub_question));
    }
    return std::string(entity);
}

std::string LlmClient::rewrite_question(std::string_view conversation,
                                        std::string_view sub_question,
                                        std::string_view supplement) const {
    auto raw = complete(PromptRole::rewriter, conversation,
                        prompts::rewriter(sub_question, supplement));
    auto rewritten = text::trim(raw);
    if (rewritten.empty()) {
        return std::string(sub_question) + " (context: " + std::string(supplement) + ")";
    }
    return std::string(rewritten);
}

FilterVerdict LlmClient::filter_answer(std::string_view conversation, std::string_view sub_question,
                                       std::string_view chunk,
                                       std::optional<std::string_view> profile) const {
    auto raw = complete(PromptRole::filter, conversation,
                        prompts::filter(sub_question, chunk, profile));
    bool well_formed = false;
    auto verdict = parse_filter_response(raw, &well_formed);
    if (!well_formed) {
        spdlog::warn("unparseable filter completion treated as a rejection: '{}'",
                     raw.substr(0, 120));
    }
    return verdict;
}

std::string LlmClient::answer_internal(std::string_view conversation,
                                       std::string_view sub_question) const {
    auto raw = complete(PromptRole::internal, conversation, prompts::internal(sub_question));
    return std::string(text::trim(raw));
}

std::string LlmClient::summarize(std::string_view conversation, std::string_view question,
                                 std::span<const std::string> answers) const {
    auto raw = complete(PromptRole::summarizer, conversation, prompts::summarizer(question, answers));
    return std::string(text::trim(raw));
}

}  // namespace hirag
