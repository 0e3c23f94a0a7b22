#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hirag {

/// One entity article. The title is the corpus key.
struct Document {
    std::string id;
    std::string title;
    std::string body;
};

/// Summary paragraph for an entity, stored in a sidecar file.
struct Profile {
    std::string title;
    std::string text;
};

struct Chunk {
    std::string doc_id;
    std::size_t ordinal = 0;
    std::string text;
};

struct CorpusStats {
    std::uint64_t entity_count = 0;
    std::uint64_t word_count = 0;

    bool operator==(const CorpusStats&) const = default;
};

namespace detail {
struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
        return std::hash<std::string_view>{}(s);
    }
};
}  // namespace detail

/// Immutable, title-keyed view of an ingested corpus and its profiles.
///
/// Record files are line-delimited JSON. Corpus lines carry `title` and
/// `text` (and optionally `id`); profile lines carry `title` and `profile`.
/// Once constructed a Corpus is never mutated, so concurrent reads are safe.
class Corpus {
public:
    static constexpr int kFormatVersion = 1;

    Corpus() = default;

    /// Parse and validate record files. Throws IngestError naming the line
    /// for malformed records and naming the title for duplicates.
    static Corpus ingest(const std::filesystem::path& records_path,
                         const std::optional<std::filesystem::path>& profiles_path = std::nullopt);

    /// Validate in-memory records under the same rules as ingest().
    static Corpus from_records(std::vector<Document> documents, std::vector<Profile> profiles = {});

    /// Load a corpus directory written by save().
    static Corpus load(const std::filesystem::path& dir);
    void save(const std::filesystem::path& dir) const;

    const Document* find(std::string_view title) const;

    /// Exact, case-sensitive title match; nullptr when there is no profile.
    const Profile* lookup_profile(std::string_view title) const;

    CorpusStats stats() const;

    std::span<const Document> documents() const { return documents_; }
    std::span<const Profile> profiles() const { return profiles_; }
    std::size_t size() const { return documents_.size(); }
    bool empty() const { return documents_.empty(); }

private:
    std::vector<Document> documents_;
    std::vector<Profile> profiles_;
    std::unordered_map<std::string, std::size_t, detail::StringHash, std::equal_to<>> by_title_;
    std::unordered_map<std::string, std::size_t, detail::StringHash, std::equal_to<>> profile_by_title_;
};

inline constexpr std::size_t kDefaultChunkSize = 100;

/// Split a document body into consecutive chunks of `chunk_size` words.
/// Every chunk but the last holds exactly chunk_size words; an empty body
/// yields no chunks. Throws std::invalid_argument when chunk_size is 0.
std::vector<Chunk> split_document(const Document& doc, std::size_t chunk_size = kDefaultChunkSize);

}  // namespace hirag
