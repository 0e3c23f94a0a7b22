#include "hirag/sparse_index.hpp"

#include "hirag/errors.hpp"
#include "hirag/text.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>

namespace hirag {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[8] = {'H', 'I', 'R', 'A', 'G', 'S', 'P', 'X'};
constexpr const char* kIndexFile = "sparse.idx";

std::uint64_t titles_fingerprint(std::span<const std::string> titles) {
    std::uint64_t h = text::fnv1a64("hirag-titles");
    for (const auto& t : titles) {
        h = text::fnv1a64(t, h);
        h = text::fnv1a64(std::string_view("\0", 1), h);
    }
    return h;
}

class Writer {
public:
    explicit Writer(std::ofstream& out) : out_(out) {}
    template <typename T>
    void pod(const T& v) {
        out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }
    void str(const std::string& s) {
        pod(static_cast<std::uint32_t>(s.size()));
        out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }

private:
    std::ofstream& out_;
};

class Reader {
public:
    Reader(std::ifstream& in, const fs::path& path) : in_(in), path_(path) {}
    template <typename T>
    T pod() {
        T v{};
        in_.read(reinterpret_cast<char*>(&v), sizeof(T));
        if (!in_) throw IndexError("truncated index file " + path_.string());
        return v;
    }
    std::string str() {
        auto n = pod<std::uint32_t>();
        std::string s(n, '\0');
        in_.read(s.data(), n);
        if (!in_) throw IndexError("truncated index file " + path_.string());
        return s;
    }

private:
    std::ifstream& in_;
    const fs::path& path_;
};

}  // namespace

SparseIndex SparseIndex::build(const Corpus& corpus, Bm25Params params) {
    std::vector<std::string> titles;
    titles.reserve(corpus.size());
    for (const auto& d : corpus.documents()) titles.push_back(d.title);
    return build(titles, params);
}

SparseIndex SparseIndex::build(std::span<const std::string> titles, Bm25Params params) {
    if (titles.empty()) throw IndexError("cannot build an index over an empty corpus");
    SparseIndex idx;
    idx.params_ = params;
    idx.titles_.assign(titles.begin(), titles.end());
    idx.lengths_.reserve(titles.size());
    std::uint64_t total = 0;
    for (std::uint32_t doc = 0; doc < titles.size(); ++doc) {
        auto tokens = text::lexical_tokens(titles[doc]);
        idx.lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
        total += tokens.size();
        std::map<std::string, std::uint32_t> tf;
        for (auto& t : tokens) ++tf[std::move(t)];
        for (auto& [term, count] : tf) idx.postings_[term].push_back({doc, count});
    }
    idx.avg_length_ = static_cast<double>(total) / static_cast<double>(titles.size());
    idx.fingerprint_ = titles_fingerprint(idx.titles_);
    return idx;
}

std::uint64_t SparseIndex::fingerprint_of(const Corpus& corpus) {
    std::vector<std::string> titles;
    for (const auto& d : corpus.documents()) titles.push_back(d.title);
    return titles_fingerprint(titles);
}

std::vector<RankedTitle> SparseIndex::rank(std::string_view query) const {
    auto tokens = text::lexical_tokens(query);
    // Sorted unique terms give a fixed summation order per document.
    std::set<std::string> terms(tokens.begin(), tokens.end());

    const double n = static_cast<double>(titles_.size());
    const double k1 = params_.k1;
    const double b = params_.b;
    std::unordered_map<std::uint32_t, double> scores;
    for (const auto& term : terms) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const double df = static_cast<double>(it->second.size());
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        for (const auto& p : it->second) {
            const double tf = p.tf;
            const double len = lengths_[p.doc];
            const double norm = k1 * (1.0 - b + b * len / avg_length_);
            scores[p.doc] += idf * (tf * (k1 + 1.0)) / (tf + norm);
        }
    }

    std::vector<RankedTitle> ranked;
    ranked.reserve(scores.size());
    for (const auto& [doc, score] : scores) {
        if (score > 0.0) ranked.push_back({titles_[doc], score, 0});
    }
    std::sort(ranked.begin(), ranked.end(), [](const RankedTitle& a, const RankedTitle& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.title < b.title;
    });
    for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i].rank = i;
    return ranked;
}

std::optional<RankedTitle> SparseIndex::retrieve(std::string_view query,
                                                 std::size_t rank_offset) const {
    auto ranked = rank(query);
    if (rank_offset >= ranked.size()) return std::nullopt;
    return std::move(ranked[rank_offset]);
}

std::size_t SparseIndex::ambiguity_count(std::string_view query, double epsilon) const {
    auto ranked = rank(query);
    if (ranked.empty()) return 0;
    const double cutoff = (1.0 - epsilon) * ranked.front().score;
    return static_cast<std::size_t>(
        std::count_if(ranked.begin(), ranked.end(),
                      [cutoff](const RankedTitle& r) { return r.score >= cutoff; }));
}

void SparseIndex::save(const fs::path& dir) const {
    fs::create_directories(dir);
    auto tmp = dir / (std::string(kIndexFile) + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IndexError("cannot write " + tmp.string());
        Writer w(out);
        out.write(kMagic, sizeof(kMagic));
        w.pod(kFormatVersion);
        w.pod(params_.k1);
        w.pod(params_.b);
        w.pod(fingerprint_);
        w.pod(static_cast<std::uint64_t>(titles_.size()));
        for (std::size_t i = 0; i < titles_.size(); ++i) {
            w.str(titles_[i]);
            w.pod(lengths_[i]);
        }
        // Sorted term order keeps the file byte-stable across runs.
        std::vector<const std::string*> terms;
        terms.reserve(postings_.size());
        for (const auto& [term, _] : postings_) terms.push_back(&term);
        std::sort(terms.begin(), terms.end(), [](auto* a, auto* b) { return *a < *b; });
        w.pod(static_cast<std::uint64_t>(terms.size()));
        for (const auto* term : terms) {
            const auto& list = postings_.at(*term);
            w.str(*term);
            w.pod(static_cast<std::uint32_t>(list.size()));
            for (const auto& p : list) {
                w.pod(p.doc);
                w.pod(p.tf);
            }
        }
        out.write(kMagic, sizeof(kMagic));
        if (!out) throw IndexError("write failed: " + tmp.string());
    }
    fs::rename(tmp, dir / kIndexFile);
}

SparseIndex SparseIndex::load(const fs::path& dir) {
    auto path = dir / kIndexFile;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IndexError("index not found: " + path.string());
    char magic[sizeof(kMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw IndexError("not a hirag sparse index: " + path.string());
    }
    Reader r(in, path);
    auto version = r.pod<std::uint32_t>();
    if (version != kFormatVersion) {
        throw IndexError("index version " + std::to_string(version) + " is not supported (expected " +
                         std::to_string(kFormatVersion) + ")");
    }
    SparseIndex idx;
    idx.params_.k1 = r.pod<double>();
    idx.params_.b = r.pod<double>();
    idx.fingerprint_ = r.pod<std::uint64_t>();
    auto n = r.pod<std::uint64_t>();
    if (n == 0) throw IndexError("index has no titles: " + path.string());
    std::uint64_t total = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
        idx.titles_.push_back(r.str());
        idx.lengths_.push_back(r.pod<std::uint32_t>());
        total += idx.lengths_.back();
    }
    auto terms = r.pod<std::uint64_t>();
    for (std::uint64_t i = 0; i < terms; ++i) {
        auto term = r.str();
        auto count = r.pod<std::uint32_t>();
        auto& list = idx.postings_[term];
        list.reserve(count);
        for (std::uint32_t j = 0; j < count; ++j) {
            Posting p{r.pod<std::uint32_t>(), r.pod<std::uint32_t>()};
            if (p.doc >= n) throw IndexError("corrupt posting in " + path.string());
            list.push_back(p);
        }
    }
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw IndexError("index trailer missing (truncated?): " + path.string());
    }
    idx.avg_length_ = static_cast<double>(total) / static_cast<double>(n);
    if (idx.fingerprint_ != titles_fingerprint(idx.titles_)) {
        throw IndexError("index fingerprint mismatch: " + path.string());
    }
    return idx;
}

}  // namespace hirag
