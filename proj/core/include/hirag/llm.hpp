#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hirag {

/// The model-backed roles of the pipeline. The Definer is not a model call;
/// see judge().
enum class PromptRole { decomposer, entity, rewriter, filter, internal, summarizer };

std::string_view to_string(PromptRole role);
std::optional<PromptRole> parse_prompt_role(std::string_view name);
inline constexpr PromptRole kAllRoles[] = {PromptRole::decomposer, PromptRole::entity,
                                           PromptRole::rewriter,   PromptRole::filter,
                                           PromptRole::internal,   PromptRole::summarizer};

enum class ChatRole { system, user, assistant };
std::string_view to_string(ChatRole role);

struct ChatTurn {
    ChatRole role;
    std::string content;
};

struct GenerationParams {
    double temperature = 0.0;
    int max_tokens = 256;
};

struct ChatRequest {
    PromptRole role;
    std::string conversation;  // groups requests that belong to one question
    std::vector<ChatTurn> messages;
    GenerationParams params;

    /// All message contents joined by newlines; what scripted matchers see.
    std::string prompt_text() const;
};

class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;

    /// Returns the first choice's message content. Throws TransportError on
    /// retryable failures.
    virtual std::string complete(const ChatRequest& request) = 0;
    virtual std::string describe() const = 0;
};

struct HttpChatConfig {
    std::string endpoint;  // e.g. https://api.openai.com/v1/chat/completions
    std::string model;
    std::string api_key_env = "OPENAI_API_KEY";
    std::chrono::milliseconds timeout{60000};
};

/// Chat-completions style HTTP backend.
class HttpChatBackend final : public CompletionBackend {
public:
    explicit HttpChatBackend(HttpChatConfig config);

    std::string complete(const ChatRequest& request) override;
    std::string describe() const override;

private:
    HttpChatConfig config_;
};

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    double multiplier = 2.0;
};

inline constexpr std::string_view kTerminationMarker = "That's enough";

struct DecomposerOutput {
    enum class Kind { sub_question, done };

    Kind kind = Kind::done;
    std::string question;  // trimmed; empty when done
    std::string raw;       // verbatim completion

    bool done() const { return kind == Kind::done; }
};

/// Classify a raw decomposer completion. Done iff the trimmed text equals the
/// termination marker; an empty completion is also treated as done.
DecomposerOutput classify_decomposer_output(std::string raw);

struct Judgement {
    enum class Reason { marker, duplicate, fresh };

    bool solvable = false;
    Reason reason = Reason::fresh;
    std::string sub_question;  // set when !solvable
};

std::string_view to_string(Judgement::Reason reason);

/// The Definer: solvable when the decomposer is done or repeats a prior
/// sub-question exactly (after trimming).
Judgement judge(const DecomposerOutput& output, std::span<const std::string> asked);

struct FilterVerdict {
    bool can_solve = false;
    std::string response;
};

/// Parse the two-line `solvable: yes|no` / `answer: ...` contract. Keys are
/// matched case-insensitively. Anything unparseable, or "yes" without an
/// answer, is a rejection.
FilterVerdict parse_filter_response(std::string_view completion, bool* well_formed = nullptr);

/// One completion interface with a backend per role, retries, and the
/// prompt/parse logic for each role.
///
/// Thread-safe as long as the backends are.
class LlmClient {
public:
    LlmClient(std::shared_ptr<CompletionBackend> default_backend, GenerationParams params = {},
              RetryPolicy retry = {});

    void set_backend(PromptRole role, std::shared_ptr<CompletionBackend> backend);
    const CompletionBackend& backend(PromptRole role) const;

    /// Raw completion with bounded retries and exponential backoff. Throws
    /// TransportError once the retry budget is spent.
    std::string complete(PromptRole role, std::string_view conversation,
                         std::vector<ChatTurn> messages) const;

    DecomposerOutput decompose(std::string_view conversation, std::string_view question,
                               std::size_t turn, std::span<const std::string> answers) const;

    /// Falls back to the sub-question itself when the model returns nothing.
    std::string extract_entity(std::string_view conversation, std::string_view sub_question) const;

    /// Falls back to "q (context: supplement)" on an empty completion.
    std::string rewrite_question(std::string_view conversation, std::string_view sub_question,
                                 std::string_view supplement) const;

    FilterVerdict filter_answer(std::string_view conversation, std::string_view sub_question,
                                std::string_view chunk, std::optional<std::string_view> profile) const;

    std::string answer_internal(std::string_view conversation, std::string_view sub_question) const;

    std::string summarize(std::string_view conversation, std::string_view question,
                          std::span<const std::string> answers) const;

private:
    std::shared_ptr<CompletionBackend> default_;
    std::map<PromptRole, std::shared_ptr<CompletionBackend>> per_role_;
    GenerationParams params_;
    RetryPolicy retry_;
};

}  // namespace hirag
