#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hirag/corpus.hpp"
#include "hirag/embedder.hpp"
#include "hirag/errors.hpp"
#include "hirag/llm.hpp"
#include "hirag/search.hpp"
#include "hirag/sparse_index.hpp"
#include "hirag/trace.hpp"

namespace hirag {

enum class RetrievalMode { local, online };

std::string_view to_string(RetrievalMode mode);
std::optional<RetrievalMode> parse_retrieval_mode(std::string_view name);

/// Thresholds and knobs of the question-answering loop.
///
///   th1         ambiguity: more than th1 near-top titles triggers a rewrite
///   th2         chunk rethinks per document before moving to the next title
///   th3         rethink budget per sub-question
///   m           denominator of the internal-knowledge probability (t/m)^2
///   max_turns   cap on decomposed sub-questions
///   epsilon     relative score window for the ambiguity count
struct PipelineConfig {
    std::size_t th1 = 3;
    std::size_t th2 = 2;
    std::size_t th3 = 4;
    std::size_t m = 5;
    std::size_t max_turns = 5;
    double epsilon = 0.05;
    std::size_t chunk_size = kDefaultChunkSize;
    RetrievalMode mode = RetrievalMode::local;
    std::uint64_t seed = 0;

    /// Throws ConfigError when a value is out of range.
    void validate() const;
};

using Rng = std::mt19937_64;

/// Per-question random source, independent of scheduling order.
Rng question_rng(std::uint64_t global_seed, std::string_view question_id);

/// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(Rng& rng);

/// min((t/m)^2, 1).
double gate_probability(std::size_t t, std::size_t m);

/// Consumes exactly one uniform draw; true with probability gate_probability(t, m).
bool internal_gate(std::size_t t, std::size_t m, Rng& rng);

/// Counters of the two-tier rethink loop for one sub-question.
///
/// With no chunk exhaustion along the way, after r rejections
/// doc_rank == r / th2 and chunk_rank == r % th2.
struct RethinkState {
    std::size_t t = 0;
    std::size_t doc_rank = 0;
    std::size_t chunk_rank = 0;
    std::size_t th1 = 3;
    std::size_t th2 = 2;
    std::size_t th3 = 4;
    std::size_t m = 5;
    bool allow_ambiguity = true;

    static RethinkState from(const PipelineConfig& config);

    /// Move to the next candidate after t has been incremented: next title
    /// every th2 rounds, next chunk otherwise. Returns true on a title move.
    bool advance();
};

struct AnswerSource {
    enum class Kind { retrieved, internal, online, empty };

    Kind kind = Kind::empty;
    std::string title;                  // retrieved
    std::optional<std::size_t> chunk;   // retrieved
    std::string url;                    // online
};

std::string_view to_string(AnswerSource::Kind kind);

struct SubAnswer {
    std::string question;
    std::string answer;
    AnswerSource source;
    std::size_t rethinks_used = 0;
    std::string chunk_text;    // the accepted passage, when retrieved
    std::string profile_text;  // profile shown with it, if any
};

/// Decomposition loop state for one question.
struct QaState {
    std::string id;
    std::string question;
    std::size_t turn = 0;
    std::vector<std::string> asked;
    std::vector<std::string> answers;
    Trace trace;
    Rng rng;

    QaState(std::string id, std::string question, std::uint64_t seed);
};

struct AnswerResult {
    std::string final_answer;
    std::vector<SubAnswer> sub_qa;
    std::size_t turns = 0;  // decomposer calls
    std::string stop_reason;  // marker | duplicate | turn_cap
    Trace trace;
};

/// Raised when a model call cannot be completed; carries the trace so far.
class PipelineError : public Error {
public:
    PipelineError(const std::string& what, Trace partial)
        : Error(what), partial_(std::move(partial)) {}

    const Trace& partial_trace() const { return partial_; }

private:
    Trace partial_;
};

/// Latest answer containing the entity (case-insensitive), else the question.
std::string select_supplement(std::span<const std::string> answers, std::string_view entity,
                              std::string_view question);

/// Everything the pipeline reads. All members must outlive the Pipeline.
struct PipelineDeps {
    const Corpus* corpus = nullptr;
    const SparseIndex* index = nullptr;
    const Embedder* embedder = nullptr;
    const LlmClient* llm = nullptr;
    SearchClient* search = nullptr;  // required only in online mode
};

/// Decompose, retrieve with verification and rethinking, and summarize.
///
/// One question runs as a single sequential state machine; distinct
/// questions may run concurrently on one Pipeline.
class Pipeline {
public:
    Pipeline(PipelineDeps deps, PipelineConfig config);

    const PipelineConfig& config() const { return config_; }

    AnswerResult answer_question(std::string_view question, std::string_view question_id) const;

    /// Retrieval for one sub-question with a fresh RethinkState, recording
    /// the terminal sub_answer event. Used directly for single-hop queries.
    SubAnswer answer_sub_question(std::string_view sub_question, QaState& state) const;

    SubAnswer retrieve_with_rethink(std::string_view sub_question, QaState& state,
                                    RethinkState rethink) const;

    SubAnswer rewrite_and_answer(std::string_view sub_question, std::string_view entity,
                                 QaState& state) const;

private:
    PipelineDeps deps_;
    PipelineConfig config_;
};

}  // namespace hirag
