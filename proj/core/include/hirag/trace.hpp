#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace hirag {

enum class TraceKind {
    decompose,
    judge,
    entity,
    sparse_hit,
    ambiguity,
    rewrite,
    dense_hit,
    filter,
    gate,
    escalate_doc,
    internal_answer,
    online_answer,
    give_up,
    sub_answer,  // terminal event for one sub-question
    summarize,
};

std::string_view to_string(TraceKind kind);
std::optional<TraceKind> parse_trace_kind(std::string_view name);

/// `ts` is a logical clock (the event's position in the log), not wall time,
/// so traces from identical runs compare byte-for-byte.
struct TraceEvent {
    std::uint64_t ts = 0;
    TraceKind kind;
    nlohmann::json payload;
};

/// Append-only event log for one question.
class Trace {
public:
    void record(TraceKind kind, nlohmann::json payload = nlohmann::json::object());

    const std::vector<TraceEvent>& events() const { return events_; }
    std::size_t count(TraceKind kind) const;
    bool empty() const { return events_.empty(); }

    /// One JSON object per line: {"ts", "kind", ...payload}.
    std::string to_jsonl() const;
    void write(const std::filesystem::path& path) const;

private:
    std::vector<TraceEvent> events_;
};

}  // namespace hirag
