#include "hirag/prompts.hpp"

#include <sstream>

namespace hirag::prompts {

namespace {

ChatTurn system(std::string s) { return {ChatRole::system, std::move(s)}; }
ChatTurn user(std::string s) { return {ChatRole::user, std::move(s)}; }

}  // namespace

const std::string& decomposer_system_prompt() {
    static const std::string prompt = R"(## Background
- You are an expert at breaking complicated questions into a chain of simple, single-fact questions.
- Each simple question will be answered by a separate retrieval step, and the answers are given back to you.

## Goal
Guide the user through the original question one simple question at a time, and say when the known answers are enough to answer it.

## Constraint
- Only decompose; never answer the original question yourself.
- Ask exactly one simple question per reply, mentioning the entity it is about by name.
- Use the answers you have already received to fill in names in later questions.
- Reply with the question text only, no numbering or explanation.
- When the known answers are sufficient, reply with exactly: That's enough

## Workflow
1. Read the original question and the answers received so far.
2. Identify the next missing fact that the original question depends on.
3. Ask for that fact as one simple question, or reply "That's enough" if nothing is missing.

## Example
Original question: Who is the spouse of the director of the film Titanic?
Known answers: (none)
Reply: Who directed the film Titanic?
Known answers: 1. James Cameron
Reply: Who is the spouse of James Cameron?
Known answers: 1. James Cameron 2. Amis Cameron
Reply: That's enough

## Initialization
Now, a first simple question.)";
    return prompt;
}

std::vector<ChatTurn> decomposer(std::string_view question, std::size_t turn,
                                 std::span<const std::string> answers) {
    std::ostringstream u;
    u << "Original question: " << question << "\n";
    u << "Round: " << turn << "\n";
    u << "Known answers:";
    if (answers.empty()) {
        u << " (none)";
    } else {
        for (std::size_t i = 0; i < answers.size(); ++i) {
            u << "\n" << (i + 1) << ". " << (answers[i].empty() ? kUnknownAnswer : answers[i]);
        }
    }
    return {system(decomposer_system_prompt()), user(u.str())};
}

std::vector<ChatTurn> entity(std::string_view sub_question) {
    return {system("Extract the name of the main entity the question is about, exactly as it "
                   "would appear as the title of an encyclopedia article. Reply with the name only."),
            user("Question: " + std::string(sub_question))};
}

std::vector<ChatTurn> rewriter(std::string_view sub_question, std::string_view supplement) {
    return {system("The question below is ambiguous on its own. Using the context, rewrite it as a "
                   "single self-contained question that names its entity unambiguously. Reply with "
                   "the rewritten question only."),
            user("Question: " + std::string(sub_question) + "\nContext: " + std::string(supplement))};
}

std::vector<ChatTurn> filter(std::string_view sub_question, std::string_view chunk,
                             std::optional<std::string_view> profile) {
    std::ostringstream u;
    u << "Question: " << sub_question << "\n";
    if (profile) u << "Profile: " << *profile << "\n";
    u << "Passage: " << chunk;
    return {system("Decide whether the question can be answered from the passage and profile alone. "
                   "Reply in exactly two lines:\n"
                   "solvable: yes or no\n"
                   "answer: the short answer if solvable, otherwise leave empty"),
            user(u.str())};
}

std::vector<ChatTurn> internal(std::string_view sub_question) {
    return {system("Answer the question from your own knowledge. Reply with a short answer only."),
            user("Question: " + std::string(sub_question))};
}

std::vector<ChatTurn> summarizer(std::string_view question, std::span<const std::string> answers) {
    std::ostringstream u;
    u << "Question: " << question;
    if (!answers.empty()) {
        u << "\nAnswers to sub-questions:";
        for (std::size_t i = 0; i < answers.size(); ++i) {
            u << "\n" << (i + 1) << ". " << (answers[i].empty() ? kUnknownAnswer : answers[i]);
        }
    }
    return {system("Answer the question using the sub-question answers when given. Reply with a "
                   "short answer only, no explanation."),
            user(u.str())};
}

}  // namespace hirag::prompts
