#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hirag/llm.hpp"

namespace hirag {

/// One scripted rule: requests for `role` whose prompt text contains `match`
/// are answered with `completions` in order. With `cycle` set the list
/// repeats instead of running out.
struct ScriptEntry {
    std::optional<PromptRole> role;  // nullopt matches every role
    std::string match;               // substring of ChatRequest::prompt_text(); empty matches all
    std::vector<std::string> completions;
    bool cycle = false;
};

/// Deterministic completion backend for tests and offline runs.
///
/// Entries are tried in file order; the first entry that matches and still
/// has a completion left for the request's conversation wins. Cursors are
/// tracked per conversation, so concurrent questions never consume each
/// other's completions. No match, or every match exhausted, raises
/// ScriptError.
///
/// Script file: {"entries": [{"role", "match", "completions", "cycle"}]}
/// or a bare array of entries.
class ScriptedBackend final : public CompletionBackend {
public:
    explicit ScriptedBackend(std::vector<ScriptEntry> entries);

    static std::shared_ptr<ScriptedBackend> from_json(const nlohmann::json& script);
    static std::shared_ptr<ScriptedBackend> load(const std::filesystem::path& path);

    std::string complete(const ChatRequest& request) override;
    std::string describe() const override;

    /// Every request seen so far, in arrival order.
    std::vector<ChatRequest> captured() const;
    void clear_captured();

private:
    std::vector<ScriptEntry> entries_;
    mutable std::mutex mu_;
    std::map<std::pair<std::string, std::size_t>, std::size_t> cursors_;
    std::vector<ChatRequest> captured_;
};

std::vector<ScriptEntry> parse_script_entries(const nlohmann::json& script);

}  // namespace hirag
