#include "hirag/corpus.hpp"

#include "hirag/errors.hpp"
#include "hirag/text.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <stdexcept>

namespace hirag {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kDocumentsFile = "documents.jsonl";
constexpr const char* kProfilesFile = "profiles.jsonl";
constexpr const char* kManifestFile = "manifest.json";

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open " + path.string(), 0);
    return in;
}

std::string required_string(const json& record, const char* field, const fs::path& path,
                            std::size_t line) {
    auto it = record.find(field);
    if (it == record.end() || !it->is_string()) {
        throw IngestError(path.string() + ":" + std::to_string(line) + ": missing string field '" +
                              field + "'",
                          line);
    }
    return it->get<std::string>();
}

// Calls fn(record, line) for every non-blank line of a JSONL file.
template <typename Fn>
void for_each_record(const fs::path& path, Fn&& fn) {
    auto in = open_input(path);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (text::trim(raw).empty()) continue;
        json record;
        try {
            record = json::parse(raw);
        } catch (const json::parse_error& e) {
            throw IngestError(path.string() + ":" + std::to_string(line) + ": " + e.what(), line);
        }
        if (!record.is_object()) {
            throw IngestError(path.string() + ":" + std::to_string(line) + ": record is not an object",
                              line);
        }
        fn(record, line);
    }
}

void write_jsonl_atomically(const fs::path& target, const std::vector<json>& rows) {
    auto tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        for (const auto& row : rows) out << row.dump() << '\n';
        if (!out) throw Error("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

}  // namespace

Corpus Corpus::from_records(std::vector<Document> documents, std::vector<Profile> profiles) {
    Corpus c;
    c.by_title_.reserve(documents.size());
    for (std::size_t i = 0; i < documents.size(); ++i) {
        auto& doc = documents[i];
        if (text::trim(doc.title).empty()) throw IngestError("document has empty title", i + 1);
        if (text::count_words(doc.body) == 0) {
            throw IngestError("document '" + doc.title + "' has empty body", i + 1);
        }
        if (doc.id.empty()) doc.id = std::to_string(i);
        if (!c.by_title_.emplace(doc.title, i).second) {
            throw IngestError("duplicate title: " + doc.title, i + 1);
        }
    }
    c.profile_by_title_.reserve(profiles.size());
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        const auto& p = profiles[i];
        if (text::trim(p.title).empty()) throw IngestError("profile has empty title", i + 1);
        if (!c.profile_by_title_.emplace(p.title, i).second) {
            throw IngestError("duplicate profile title: " + p.title, i + 1);
        }
    }
    c.documents_ = std::move(documents);
    c.profiles_ = std::move(profiles);
    return c;
}

Corpus Corpus::ingest(const fs::path& records_path, const std::optional<fs::path>& profiles_path) {
    Corpus c;
    for_each_record(records_path, [&](const json& record, std::size_t line) {
        Document doc;
        doc.title = required_string(record, "title", records_path, line);
        doc.body = required_string(record, "text", records_path, line);
        if (auto it = record.find("id"); it != record.end()) {
            doc.id = it->is_string() ? it->get<std::string>() : it->dump();
        } else {
            doc.id = std::to_string(c.documents_.size());
        }
        auto where = records_path.string() + ":" + std::to_string(line) + ": ";
        if (text::trim(doc.title).empty()) throw IngestError(where + "empty title", line);
        if (text::count_words(doc.body) == 0) throw IngestError(where + "empty text", line);
        if (!c.by_title_.emplace(doc.title, c.documents_.size()).second) {
            throw IngestError(where + "duplicate title: " + doc.title, line);
        }
        c.documents_.push_back(std::move(doc));
    });

    if (profiles_path) {
        for_each_record(*profiles_path, [&](const json& record, std::size_t line) {
            Profile p;
            p.title = required_string(record, "title", *profiles_path, line);
            p.text = required_string(record, "profile", *profiles_path, line);
            auto where = profiles_path->string() + ":" + std::to_string(line) + ": ";
            if (text::trim(p.title).empty()) throw IngestError(where + "empty title", line);
            if (!c.profile_by_title_.emplace(p.title, c.profiles_.size()).second) {
                throw IngestError(where + "duplicate profile title: " + p.title, line);
            }
            c.profiles_.push_back(std::move(p));
        });
    }
    return c;
}

Corpus Corpus::load(const fs::path& dir) {
    auto manifest_path = dir / kManifestFile;
    if (!fs::exists(manifest_path)) {
        throw IngestError("not a corpus directory (no manifest): " + dir.string(), 0);
    }
    json manifest;
    {
        std::ifstream in(manifest_path);
        try {
            manifest = json::parse(in);
        } catch (const json::exception& e) {
            throw IngestError("corrupt manifest " + manifest_path.string() + ": " + e.what(), 0);
        }
    }
    if (manifest.value("format", "") != "hirag-corpus" ||
        manifest.value("version", 0) != kFormatVersion) {
        throw IngestError("unsupported corpus format in " + manifest_path.string(), 0);
    }
    std::optional<fs::path> profiles;
    if (fs::exists(dir / kProfilesFile)) profiles = dir / kProfilesFile;
    return ingest(dir / kDocumentsFile, profiles);
}

void Corpus::save(const fs::path& dir) const {
    fs::create_directories(dir);
    std::vector<json> rows;
    rows.reserve(documents_.size());
    for (const auto& d : documents_) rows.push_back({{"id", d.id}, {"title", d.title}, {"text", d.body}});
    write_jsonl_atomically(dir / kDocumentsFile, rows);

    rows.clear();
    for (const auto& p : profiles_) rows.push_back({{"title", p.title}, {"profile", p.text}});
    write_jsonl_atomically(dir / kProfilesFile, rows);

    auto s = stats();
    json manifest = {{"format", "hirag-corpus"},
                     {"version", kFormatVersion},
                     {"entity_count", s.entity_count},
                     {"word_count", s.word_count},
                     {"profile_count", profiles_.size()}};
    std::ofstream out(dir / kManifestFile, std::ios::trunc);
    out << manifest.dump(2) << '\n';
    if (!out) throw Error("cannot write manifest in " + dir.string());
}

const Document* Corpus::find(std::string_view title) const {
    auto it = by_title_.find(title);
    return it == by_title_.end() ? nullptr : &documents_[it->second];
}

const Profile* Corpus::lookup_profile(std::string_view title) const {
    auto it = profile_by_title_.find(title);
    return it == profile_by_title_.end() ? nullptr : &profiles_[it->second];
}

CorpusStats Corpus::stats() const {
    CorpusStats s;
    s.entity_count = documents_.size();
    for (const auto& d : documents_) s.word_count += text::count_words(d.body);
    return s;
}

std::vector<Chunk> split_document(const Document& doc, std::size_t chunk_size) {
    if (chunk_size == 0) throw std::invalid_argument("chunk_size must be >= 1");
    auto words = text::split_words(doc.body);
    std::vector<Chunk> chunks;
    chunks.reserve((words.size() + chunk_size - 1) / chunk_size);
    for (std::size_t begin = 0; begin < words.size(); begin += chunk_size) {
        auto end = std::min(words.size(), begin + chunk_size);
        Chunk c{doc.id, chunks.size(), {}};
        for (auto i = begin; i < end; ++i) {
            if (i > begin) c.text.push_back(' ');
            c.text.append(words[i]);
        }
        chunks.push_back(std::move(c));
    }
    return chunks;
}

}  // namespace hirag
