#include "hirag/pipeline.hpp"

#include "hirag/dense.hpp"
#include "hirag/text.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>

namespace hirag {

using nlohmann::json;

std::string_view to_string(RetrievalMode mode) {
    return mode == RetrievalMode::online ? "online" : "local";
}

std::optional<RetrievalMode> parse_retrieval_mode(std::string_view name) {
    if (name == "local") return RetrievalMode::local;
    if (name == "online") return RetrievalMode::online;
    return std::nullopt;
}

std::string_view to_string(AnswerSource::Kind kind) {
    switch (kind) {
        case AnswerSource::Kind::retrieved: return "retrieved";
        case AnswerSource::Kind::internal: return "internal";
        case AnswerSource::Kind::online: return "online";
        case AnswerSource::Kind::empty: return "empty";
    }
    return "empty";
}

void PipelineConfig::validate() const {
    if (th2 < 1) throw ConfigError("th2 must be >= 1");
    if (th3 < 1) throw ConfigError("th3 must be >= 1");
    if (m < 1) throw ConfigError("m must be >= 1");
    if (max_turns < 1) throw ConfigError("max_turns must be >= 1");
    if (chunk_size < 1) throw ConfigError("chunk_size must be >= 1");
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must be in [0, 1)");
}

Rng question_rng(std::uint64_t global_seed, std::string_view question_id) {
    auto h = text::fnv1a64(std::to_string(global_seed));
    h = text::fnv1a64(std::string_view("\x1f", 1), h);
    h = text::fnv1a64(question_id, h);
    return Rng(h);
}

double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double gate_probability(std::size_t t, std::size_t m) {
    const double r = static_cast<double>(t) / static_cast<double>(m);
    return std::min(r * r, 1.0);
}

bool internal_gate(std::size_t t, std::size_t m, Rng& rng) {
    return uniform01(rng) < gate_probability(t, m);
}

RethinkState RethinkState::from(const PipelineConfig& config) {
    RethinkState s;
    s.th1 = config.th1;
    s.th2 = config.th2;
    s.th3 = config.th3;
    s.m = config.m;
    return s;
}

bool RethinkState::advance() {
    if (t % th2 == 0) {
        ++doc_rank;
        chunk_rank = 0;
        return true;
    }
    ++chunk_rank;
    return false;
}

QaState::QaState(std::string id_, std::string question_, std::uint64_t seed)
    : id(std::move(id_)), question(std::move(question_)), rng(question_rng(seed, id)) {}

std::string select_supplement(std::span<const std::string> answers, std::string_view entity,
                              std::string_view question) {
    for (auto it = answers.rbegin(); it != answers.rend(); ++it) {
        if (!it->empty() && text::contains_case_insensitive(*it, entity)) return *it;
    }
    return std::string(question);
}

// ---------------------------------------------------------------------------

namespace {

SubAnswer empty_answer(std::string_view q, std::size_t rethinks) {
    SubAnswer a;
    a.question = std::string(q);
    a.rethinks_used = rethinks;
    return a;
}

json source_json(const AnswerSource& s) {
    json j = {{"kind", to_string(s.kind)}};
    if (!s.title.empty()) j["title"] = s.title;
    if (s.chunk) j["chunk"] = *s.chunk;
    if (!s.url.empty()) j["url"] = s.url;
    return j;
}

}  // namespace

Pipeline::Pipeline(PipelineDeps deps, PipelineConfig config) : deps_(deps), config_(config) {
    config_.validate();
    if (!deps_.corpus || !deps_.index || !deps_.embedder || !deps_.llm) {
        throw ConfigError("pipeline needs a corpus, index, embedder and LLM client");
    }
    if (config_.mode == RetrievalMode::online && !deps_.search) {
        throw ConfigError("online mode needs a search client");
    }
}

SubAnswer Pipeline::retrieve_with_rethink(std::string_view q, QaState& st, RethinkState rs) const {
    const auto& llm = *deps_.llm;
    auto entity = llm.extract_entity(st.id, q);
    st.trace.record(TraceKind::entity, {{"question", q}, {"entity", entity}});

    std::string ranked_title;
    std::vector<ScoredChunk> ranked;
    bool ambiguity_checked = false;

    for (;;) {
        auto hit = deps_.index->retrieve(entity, rs.doc_rank);
        if (!hit) {
            st.trace.record(TraceKind::give_up, {{"reason", "documents_exhausted"},
                                                 {"doc_rank", rs.doc_rank},
                                                 {"t", rs.t}});
            return empty_answer(q, rs.t);
        }
        st.trace.record(TraceKind::sparse_hit, {{"entity", entity},
                                                {"title", hit->title},
                                                {"score", hit->score},
                                                {"doc_rank", rs.doc_rank}});

        if (rs.allow_ambiguity && !ambiguity_checked) {
            ambiguity_checked = true;
            auto n = deps_.index->ambiguity_count(entity, config_.epsilon);
            bool triggered = n > rs.th1;
            st.trace.record(TraceKind::ambiguity, {{"entity", entity},
                                                   {"count", n},
                                                   {"th1", rs.th1},
                                                   {"triggered", triggered}});
            if (triggered) return rewrite_and_answer(q, entity, st);
        }

        const Document* doc = deps_.corpus->find(hit->title);
        if (!doc) {
            throw PipelineError("index title '" + hit->title + "' is not in the corpus", st.trace);
        }
        if (ranked_title != doc->title) {
            auto chunks = split_document(*doc, config_.chunk_size);
            ranked = rank_chunks(*deps_.embedder, q, chunks);
            ranked_title = doc->title;
        }
        if (rs.chunk_rank >= ranked.size()) {
            st.trace.record(TraceKind::escalate_doc, {{"reason", "chunks_exhausted"},
                                                      {"from_doc_rank", rs.doc_rank},
                                                      {"t", rs.t}});
            ++rs.doc_rank;
            rs.chunk_rank = 0;
            continue;
        }
        const auto& chunk = ranked[rs.chunk_rank];
        st.trace.record(TraceKind::dense_hit, {{"title", doc->title},
                                               {"ordinal", chunk.chunk.ordinal},
                                               {"score", chunk.score},
                                               {"doc_rank", rs.doc_rank},
                                               {"chunk_rank", rs.chunk_rank}});

        const Profile* profile = deps_.corpus->lookup_profile(doc->title);
        std::optional<std::string_view> profile_text;
        if (profile) profile_text = profile->text;
        auto verdict = llm.filter_answer(st.id, q, chunk.chunk.text, profile_text);
        st.trace.record(TraceKind::filter, {{"question", q},
                                            {"title", doc->title},
                                            {"ordinal", chunk.chunk.ordinal},
                                            {"candidates", 1},
                                            {"has_profile", profile != nullptr},
                                            {"can_solve", verdict.can_solve},
                                            {"answer", verdict.response},
                                            {"doc_rank", rs.doc_rank},
                                            {"chunk_rank", rs.chunk_rank},
                                            {"t", rs.t}});
        if (verdict.can_solve) {
            SubAnswer a;
            a.question = std::string(q);
            a.answer = std::move(verdict.response);
            a.source = {AnswerSource::Kind::retrieved, doc->title, chunk.chunk.ordinal, {}};
            a.rethinks_used = rs.t;
            a.chunk_text = chunk.chunk.text;
            if (profile) a.profile_text = profile->text;
            return a;
        }

        ++rs.t;
        const bool fired = internal_gate(rs.t, rs.m, st.rng);
        st.trace.record(TraceKind::gate, {{"t", rs.t},
                                          {"m", rs.m},
                                          {"probability", gate_probability(rs.t, rs.m)},
                                          {"fired", fired}});
        if (fired) {
            auto answer = llm.answer_internal(st.id, q);
            st.trace.record(TraceKind::internal_answer, {{"question", q}, {"answer", answer}});
            SubAnswer a = empty_answer(q, rs.t);
            if (!answer.empty()) {
                a.answer = std::move(answer);
                a.source.kind = AnswerSource::Kind::internal;
            }
            return a;
        }
        if (rs.t >= rs.th3) {
            st.trace.record(TraceKind::give_up, {{"reason", "rethink_budget"}, {"t", rs.t}});
            return empty_answer(q, rs.t);
        }
        auto from = rs.doc_rank;
        if (rs.advance()) {
            st.trace.record(TraceKind::escalate_doc, {{"reason", "chunk_rethinks_spent"},
                                                      {"from_doc_rank", from},
                                                      {"t", rs.t}});
        }
    }
}

SubAnswer Pipeline::rewrite_and_answer(std::string_view q, std::string_view entity,
                                       QaState& st) const {
    const auto& llm = *deps_.llm;
    auto supplement = select_supplement(st.answers, entity, st.question);
    bool from_question = supplement == st.question;
    auto rewritten = llm.rewrite_question(st.id, q, supplement);
    st.trace.record(TraceKind::rewrite, {{"question", q},
                                         {"entity", entity},
                                         {"supplement", supplement},
                                         {"supplement_source", from_question ? "question" : "answer"},
                                         {"rewritten", rewritten}});

    if (config_.mode == RetrievalMode::online) {
        try {
            auto result = deps_.search->search(rewritten);
            if (result) {
                auto verdict = llm.filter_answer(st.id, q, result->text, std::nullopt);
                st.trace.record(TraceKind::online_answer, {{"query", rewritten},
                                                           {"url", result->source_url},
                                                           {"can_solve", verdict.can_solve},
                                                           {"answer", verdict.response}});
                if (!verdict.can_solve) {
                    st.trace.record(TraceKind::give_up, {{"reason", "online_rejected"}});
                    return empty_answer(q, 0);
                }
                SubAnswer a = empty_answer(q, 0);
                a.answer = std::move(verdict.response);
                a.source.kind = AnswerSource::Kind::online;
                a.source.url = result->source_url;
                a.chunk_text = result->text;
                return a;
            }
            st.trace.record(TraceKind::online_answer,
                            {{"query", rewritten}, {"result", "none"}, {"fallback", "local"}});
        } catch (const TransportError& e) {
            spdlog::warn("web search failed, falling back to local retrieval: {}", e.what());
            st.trace.record(TraceKind::online_answer,
                            {{"query", rewritten}, {"error", e.what()}, {"fallback", "local"}});
        }
    }

    auto inner = RethinkState::from(config_);
    inner.allow_ambiguity = false;
    auto a = retrieve_with_rethink(rewritten, st, inner);
    a.question = std::string(q);
    return a;
}

SubAnswer Pipeline::answer_sub_question(std::string_view sub_question, QaState& st) const {
    SubAnswer a;
    try {
        a = retrieve_with_rethink(sub_question, st, RethinkState::from(config_));
    } catch (const TransportError& e) {
        throw PipelineError(e.what(), st.trace);
    } catch (const ScriptError& e) {
        throw PipelineError(e.what(), st.trace);
    }
    st.trace.record(TraceKind::sub_answer, {{"index", st.answers.size()},
                                            {"question", a.question},
                                            {"answer", a.answer},
                                            {"source", source_json(a.source)},
                                            {"rethinks", a.rethinks_used}});
    return a;
}

AnswerResult Pipeline::answer_question(std::string_view question,
                                       std::string_view question_id) const {
    const auto& llm = *deps_.llm;
    QaState st(std::string(question_id), std::string(question), config_.seed);
    AnswerResult result;

    try {
        for (;;) {
            if (st.turn >= config_.max_turns) {
                st.trace.record(TraceKind::judge, {{"solvable", true}, {"reason", "turn_cap"}});
                result.stop_reason = "turn_cap";
                break;
            }
            auto out = llm.decompose(st.id, st.question, st.turn, st.answers);
            ++result.turns;
            st.trace.record(TraceKind::decompose, {{"turn", st.turn},
                                                   {"raw", out.raw},
                                                   {"done", out.done()},
                                                   {"question", out.question}});
            auto verdict = judge(out, st.asked);
            st.trace.record(TraceKind::judge,
                            {{"solvable", verdict.solvable}, {"reason", to_string(verdict.reason)}});
            if (verdict.solvable) {
                result.stop_reason = std::string(to_string(verdict.reason));
                break;
            }
            st.asked.push_back(verdict.sub_question);
            ++st.turn;
            auto sub = answer_sub_question(st.asked.back(), st);
            st.answers.push_back(sub.answer);
            result.sub_qa.push_back(std::move(sub));
        }
        result.final_answer = llm.summarize(st.id, st.question, st.answers);
    } catch (const TransportError& e) {
        throw PipelineError(e.what(), st.trace);
    } catch (const ScriptError& e) {
        throw PipelineError(e.what(), st.trace);
    }
    st.trace.record(TraceKind::summarize,
                    {{"answers", st.answers.size()}, {"final", result.final_answer}});
    result.trace = std::move(st.trace);
    return result;
}

}  // namespace hirag
