#include "hirag/trace.hpp"

#include "hirag/errors.hpp"

#include <algorithm>
#include <array>
#include <fstream>

namespace hirag {

namespace {

constexpr std::array<std::pair<TraceKind, std::string_view>, 15> kNames{{
    {TraceKind::decompose, "decompose"},
    {TraceKind::judge, "judge"},
    {TraceKind::entity, "entity"},
    {TraceKind::sparse_hit, "sparse_hit"},
    {TraceKind::ambiguity, "ambiguity"},
    {TraceKind::rewrite, "rewrite"},
    {TraceKind::dense_hit, "dense_hit"},
    {TraceKind::filter, "filter"},
    {TraceKind::gate, "gate"},
    {TraceKind::escalate_doc, "escalate_doc"},
    {TraceKind::internal_answer, "internal_answer"},
    {TraceKind::online_answer, "online_answer"},
    {TraceKind::give_up, "give_up"},
    {TraceKind::sub_answer, "sub_answer"},
    {TraceKind::summarize, "summarize"},
}};

}  // namespace

std::string_view to_string(TraceKind kind) {
    for (const auto& [k, name] : kNames) {
        if (k == kind) return name;
    }
    return "unknown";
}

std::optional<TraceKind> parse_trace_kind(std::string_view name) {
    for (const auto& [k, n] : kNames) {
        if (n == name) return k;
    }
    return std::nullopt;
}

void Trace::record(TraceKind kind, nlohmann::json payload) {
    events_.push_back({events_.size(), kind, std::move(payload)});
}

std::size_t Trace::count(TraceKind kind) const {
    return static_cast<std::size_t>(std::count_if(
        events_.begin(), events_.end(), [kind](const TraceEvent& e) { return e.kind == kind; }));
}

std::string Trace::to_jsonl() const {
    std::string out;
    for (const auto& e : events_) {
        nlohmann::ordered_json row;
        row["ts"] = e.ts;
        row["kind"] = to_string(e.kind);
        if (e.payload.is_object()) {
            for (const auto& [k, v] : e.payload.items()) row[k] = v;
        }
        out += row.dump();
        out.push_back('\n');
    }
    return out;
}

void Trace::write(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw Error("cannot write trace " + path.string());
    out << to_jsonl();
    if (!out) throw Error("write failed: " + path.string());
}

}  // namespace hirag
