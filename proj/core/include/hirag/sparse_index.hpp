#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hirag/corpus.hpp"

namespace hirag {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct RankedTitle {
    std::string title;
    double score = 0.0;
    std::size_t rank = 0;
};

/// Okapi BM25 over document titles.
///
/// idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5)), which stays positive for
/// every df, so any title sharing a query token scores > 0. Query tokens are
/// deduplicated. Ranking is total: score descending, then title ascending.
class SparseIndex {
public:
    static constexpr std::uint32_t kFormatVersion = 1;

    /// Throws IndexError on an empty corpus.
    static SparseIndex build(const Corpus& corpus, Bm25Params params = {});
    static SparseIndex build(std::span<const std::string> titles, Bm25Params params = {});

    /// Titles with score > 0, fully ranked.
    std::vector<RankedTitle> rank(std::string_view query) const;

    /// The rank_offset-th entry of rank(query), or nullopt when exhausted.
    std::optional<RankedTitle> retrieve(std::string_view query, std::size_t rank_offset) const;

    /// Number of titles scoring at least (1 - epsilon) * top score.
    std::size_t ambiguity_count(std::string_view query, double epsilon) const;

    void save(const std::filesystem::path& dir) const;
    static SparseIndex load(const std::filesystem::path& dir);

    /// Hash of the indexed titles in order; ties an index to the corpus it was built from.
    std::uint64_t fingerprint() const { return fingerprint_; }
    static std::uint64_t fingerprint_of(const Corpus& corpus);

    std::size_t size() const { return titles_.size(); }
    double average_length() const { return avg_length_; }
    const Bm25Params& params() const { return params_; }

private:
    struct Posting {
        std::uint32_t doc;
        std::uint32_t tf;
    };

    std::vector<std::string> titles_;
    std::vector<std::uint32_t> lengths_;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
    double avg_length_ = 0.0;
    Bm25Params params_;
    std::uint64_t fingerprint_ = 0;
};

}  // namespace hirag
