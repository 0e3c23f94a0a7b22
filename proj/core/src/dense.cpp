#include "hirag/dense.hpp"

#include <algorithm>

namespace hirag {

std::vector<ScoredChunk> rank_chunks(const Embedder& embedder, std::string_view question,
                                     std::span<const Chunk> chunks) {
    if (chunks.empty()) return {};
    auto q = embedder.embed(question);
    std::vector<std::string> texts;
    texts.reserve(chunks.size());
    for (const auto& c : chunks) texts.push_back(c.text);
    auto vectors = embedder.embed_batch(texts);

    std::vector<ScoredChunk> ranked;
    ranked.reserve(chunks.size());
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        ranked.push_back({chunks[i], dot(q, vectors[i]), 0});
    }
    std::sort(ranked.begin(), ranked.end(), [](const ScoredChunk& a, const ScoredChunk& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.chunk.ordinal < b.chunk.ordinal;
    });
    for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i].rank = i;
    return ranked;
}

std::optional<ScoredChunk> dense_rank_chunks(const Embedder& embedder, std::string_view question,
                                             std::span<const Chunk> chunks,
                                             std::size_t rank_offset) {
    if (rank_offset >= chunks.size()) return std::nullopt;
    auto ranked = rank_chunks(embedder, question, chunks);
    return std::move(ranked[rank_offset]);
}

}  // namespace hirag
