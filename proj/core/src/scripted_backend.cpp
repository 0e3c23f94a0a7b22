#include "hirag/scripted_backend.hpp"

#include "hirag/errors.hpp"

#include <fstream>

namespace hirag {

std::vector<ScriptEntry> parse_script_entries(const nlohmann::json& script) {
    const nlohmann::json* list = &script;
    if (script.is_object()) {
        if (!script.contains("entries")) throw ConfigError("script object needs an 'entries' array");
        list = &script.at("entries");
    }
    if (!list->is_array()) throw ConfigError("script entries must be an array");

    std::vector<ScriptEntry> entries;
    for (std::size_t i = 0; i < list->size(); ++i) {
        const auto& e = (*list)[i];
        auto where = "script entry " + std::to_string(i) + ": ";
        if (!e.is_object()) throw ConfigError(where + "not an object");
        ScriptEntry entry;
        auto role = e.value("role", std::string("*"));
        if (role != "*") {
            entry.role = parse_prompt_role(role);
            if (!entry.role) throw ConfigError(where + "unknown role '" + role + "'");
        }
        entry.match = e.value("match", std::string());
        entry.cycle = e.value("cycle", false);
        if (!e.contains("completions") || !e.at("completions").is_array()) {
            throw ConfigError(where + "needs a 'completions' array");
        }
        for (const auto& c : e.at("completions")) {
            if (!c.is_string()) throw ConfigError(where + "completions must be strings");
            entry.completions.push_back(c.get<std::string>());
        }
        if (entry.cycle && entry.completions.empty()) {
            throw ConfigError(where + "a cycling entry needs at least one completion");
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

ScriptedBackend::ScriptedBackend(std::vector<ScriptEntry> entries) : entries_(std::move(entries)) {}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_json(const nlohmann::json& script) {
    return std::make_shared<ScriptedBackend>(parse_script_entries(script));
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open script " + path.string());
    nlohmann::json script;
    try {
        script = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("script " + path.string() + " is not valid JSON: " + e.what());
    }
    return std::make_shared<ScriptedBackend>(parse_script_entries(script));
}

std::string ScriptedBackend::complete(const ChatRequest& request) {
    auto prompt = request.prompt_text();
    std::lock_guard lock(mu_);
    captured_.push_back(request);

    bool matched = false;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        if (e.role && *e.role != request.role) continue;
        if (!e.match.empty() && prompt.find(e.match) == std::string::npos) continue;
        matched = true;
        auto& cursor = cursors_[{request.conversation, i}];
        if (e.cycle) {
            return e.completions[cursor++ % e.completions.size()];
        }
        if (cursor < e.completions.size()) return e.completions[cursor++];
    }
    auto head = prompt.substr(prompt.size() > 160 ? prompt.size() - 160 : 0);
    throw ScriptError(std::string(matched ? "script exhausted" : "no script entry") + " for role " +
                      std::string(to_string(request.role)) + " in conversation '" +
                      request.conversation + "': ..." + head);
}

std::string ScriptedBackend::describe() const {
    return "scripted/" + std::to_string(entries_.size()) + " entries";
}

std::vector<ChatRequest> ScriptedBackend::captured() const {
    std::lock_guard lock(mu_);
    return captured_;
}

void ScriptedBackend::clear_captured() {
    std::lock_guard lock(mu_);
    captured_.clear();
}

}  // namespace hirag
