#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hirag/llm.hpp"

// Prompt construction for each model role. Kept separate from LlmClient so
// tests can assert on exact prompt contents.
namespace hirag::prompts {

/// Label the summarizer sees for sub-questions that produced no answer.
inline constexpr std::string_view kUnknownAnswer = "unknown";

std::vector<ChatTurn> decomposer(std::string_view question, std::size_t turn,
                                 std::span<const std::string> answers);
std::vector<ChatTurn> entity(std::string_view sub_question);
std::vector<ChatTurn> rewriter(std::string_view sub_question, std::string_view supplement);
std::vector<ChatTurn> filter(std::string_view sub_question, std::string_view chunk,
                             std::optional<std::string_view> profile);
std::vector<ChatTurn> internal(std::string_view sub_question);
std::vector<ChatTurn> summarizer(std::string_view question, std::span<const std::string> answers);

const std::string& decomposer_system_prompt();

}  // namespace hirag::prompts
