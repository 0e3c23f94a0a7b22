#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hirag/corpus.hpp"
#include "hirag/embedder.hpp"

namespace hirag {

struct ScoredChunk {
    Chunk chunk;
    double score = 0.0;
    std::size_t rank = 0;
};

/// Rank chunks by raw dot product with the question embedding, descending,
/// ties broken by ascending ordinal.
std::vector<ScoredChunk> rank_chunks(const Embedder& embedder, std::string_view question,
                                     std::span<const Chunk> chunks);

/// The rank_offset-th entry of rank_chunks, or nullopt when exhausted.
std::optional<ScoredChunk> dense_rank_chunks(const Embedder& embedder, std::string_view question,
                                             std::span<const Chunk> chunks,
                                             std::size_t rank_offset);

}  // namespace hirag
