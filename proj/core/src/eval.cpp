#include "hirag/eval.hpp"

#include "hirag/errors.hpp"
#include "hirag/text.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

namespace hirag::eval {

namespace fs = std::filesystem;
using nlohmann::json;

std::optional<DatasetFormat> parse_dataset_format(std::string_view name) {
    if (name == "hotpotqa") return DatasetFormat::hotpotqa;
    if (name == "2wiki" || name == "2wikimultihopqa") return DatasetFormat::twowiki;
    if (name == "musique") return DatasetFormat::musique;
    if (name == "bamboogle") return DatasetFormat::bamboogle;
    if (name == "generic") return DatasetFormat::generic;
    return std::nullopt;
}

std::string_view to_string(DatasetFormat format) {
    switch (format) {
        case DatasetFormat::hotpotqa: return "hotpotqa";
        case DatasetFormat::twowiki: return "2wiki";
        case DatasetFormat::musique: return "musique";
        case DatasetFormat::bamboogle: return "bamboogle";
        case DatasetFormat::generic: return "generic";
    }
    return "generic";
}

// ---------------------------------------------------------------------------
// Scoring

namespace {

bool is_ascii_punct(unsigned char c) {
    return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
           (c >= 123 && c <= 126);
}

std::vector<std::string> normalized_tokens(std::string_view s) {
    auto norm = normalize_answer(s);
    std::vector<std::string> out;
    for (auto w : text::split_words(norm)) out.emplace_back(w);
    return out;
}

Prf prf_single(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
    if (pred.empty() || gold.empty()) return {};
    std::unordered_map<std::string, int> counts;
    for (const auto& t : gold) ++counts[t];
    int overlap = 0;
    for (const auto& t : pred) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return {};
    Prf r;
    r.precision = static_cast<double>(overlap) / static_cast<double>(pred.size());
    r.recall = static_cast<double>(overlap) / static_cast<double>(gold.size());
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    return r;
}

}  // namespace

std::string normalize_answer(std::string_view s) {
    std::string stripped;
    stripped.reserve(s.size());
    for (char c : s) {
        auto u = static_cast<unsigned char>(c);
        if (is_ascii_punct(u)) continue;
        stripped.push_back(static_cast<char>(std::tolower(u)));
    }
    std::string out;
    for (auto w : text::split_words(stripped)) {
        if (w == "a" || w == "an" || w == "the") continue;
        if (!out.empty()) out.push_back(' ');
        out.append(w);
    }
    return out;
}

int exact_match(std::string_view prediction, std::span<const std::string> golds) {
    auto p = normalize_answer(prediction);
    for (const auto& g : golds) {
        if (normalize_answer(g) == p) return 1;
    }
    return 0;
}

Prf token_prf(std::string_view prediction, std::span<const std::string> golds) {
    auto pred = normalized_tokens(prediction);
    Prf best;
    bool first = true;
    for (const auto& g : golds) {
        auto r = prf_single(pred, normalized_tokens(g));
        if (first || r.f1 > best.f1) {
            best = r;
            first = false;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Datasets

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError("cannot open dataset " + path.string(), 0);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> answers_from(const json& value) {
    std::vector<std::string> out;
    if (value.is_string()) {
        out.push_back(value.get<std::string>());
    } else if (value.is_array()) {
        for (const auto& v : value) {
            if (v.is_string()) out.push_back(v.get<std::string>());
        }
    } else if (value.is_number()) {
        out.push_back(value.dump());
    }
    return out;
}

std::string id_from(const json& value) {
    return value.is_string() ? value.get<std::string>() : value.dump();
}

// Maps one JSON record to an example; `fallback_id` is used when the format
// has no id field. Returns nullopt with `why` set when fields are missing.
std::optional<QaExample> map_record(const json& r, DatasetFormat format, const std::string& fallback_id,
                                    std::string& why) {
    if (!r.is_object()) {
        why = "record is not an object";
        return std::nullopt;
    }
    QaExample ex;
    const char* id_key = nullptr;
    const char* q_key = "question";
    const char* a_key = "answer";
    switch (format) {
        case DatasetFormat::hotpotqa:
        case DatasetFormat::twowiki: id_key = "_id"; break;
        case DatasetFormat::musique: id_key = "id"; break;
        case DatasetFormat::generic: id_key = "id"; break;
        case DatasetFormat::bamboogle:
            q_key = r.contains("Question") ? "Question" : "question";
            a_key = r.contains("Answer") ? "Answer" : "answer";
            break;
    }
    if (id_key) {
        if (!r.contains(id_key) && format == DatasetFormat::hotpotqa && r.contains("id")) id_key = "id";
        if (!r.contains(id_key)) {
            why = std::string("missing field '") + id_key + "'";
            return std::nullopt;
        }
        ex.id = id_from(r.at(id_key));
    } else {
        ex.id = r.contains("id") ? id_from(r.at("id")) : fallback_id;
    }
    if (!r.contains(q_key) || !r.at(q_key).is_string()) {
        why = std::string("missing string field '") + q_key + "'";
        return std::nullopt;
    }
    ex.question = r.at(q_key).get<std::string>();
    if (r.contains(a_key)) ex.gold_answers = answers_from(r.at(a_key));
    if (format == DatasetFormat::generic && ex.gold_answers.empty() && r.contains("answers")) {
        ex.gold_answers = answers_from(r.at("answers"));
    }
    if (format == DatasetFormat::musique && r.contains("answer_aliases")) {
        for (auto& alias : answers_from(r.at("answer_aliases"))) ex.gold_answers.push_back(alias);
    }
    if (ex.gold_answers.empty()) {
        why = "no answer";
        return std::nullopt;
    }
    return ex;
}

// Minimal RFC 4180 reader: quoted fields, doubled quotes, embedded newlines.
// Each row is returned with the 1-based line it started on.
std::vector<std::pair<std::size_t, std::vector<std::string>>> parse_csv(const std::string& data) {
    std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    std::size_t line = 1, row_line = 1;
    for (std::size_t i = 0; i < data.size(); ++i) {
        char c = data[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < data.size() && data[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < data.size() && data[i + 1] == '\n') ++i;
            if (any || !field.empty()) {
                row.push_back(std::move(field));
                rows.emplace_back(row_line, std::move(row));
            }
            row.clear();
            field.clear();
            any = false;
            ++line;
            row_line = line;
        } else {
            field.push_back(c);
            any = true;
        }
    }
    if (quoted) throw DatasetError("unterminated quoted CSV field", row_line);
    if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.emplace_back(row_line, std::move(row));
    }
    return rows;
}

std::vector<QaExample> load_csv(const std::string& data) {
    auto rows = parse_csv(data);
    if (rows.empty()) return {};
    const auto& header = rows.front().second;
    std::optional<std::size_t> qcol, acol;
    for (std::size_t i = 0; i < header.size(); ++i) {
        auto h = text::to_lower_ascii(text::trim(header[i]));
        if (h == "question") qcol = i;
        if (h == "answer") acol = i;
    }
    if (!qcol || !acol) throw DatasetError("CSV header needs Question and Answer columns", 1);
    std::vector<QaExample> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& [line, cells] = rows[r];
        if (cells.size() <= std::max(*qcol, *acol)) {
            throw DatasetError("line " + std::to_string(line) + ": too few CSV columns", line);
        }
        QaExample ex{std::to_string(out.size()), cells[*qcol], {cells[*acol]}};
        if (text::trim(ex.question).empty()) {
            throw DatasetError("line " + std::to_string(line) + ": empty question", line);
        }
        out.push_back(std::move(ex));
    }
    return out;
}

}  // namespace

std::vector<QaExample> load_dataset(const fs::path& path, DatasetFormat format) {
    auto data = read_file(path);
    auto first = data.find_first_not_of(" \t\r\n");
    std::vector<QaExample> out;

    if (first == std::string::npos) return out;

    if (format == DatasetFormat::bamboogle && data[first] != '[' && data[first] != '{') {
        out = load_csv(data);
    } else if (data[first] == '[' && format != DatasetFormat::generic &&
               format != DatasetFormat::musique) {
        json arr;
        try {
            arr = json::parse(data);
        } catch (const json::parse_error& e) {
            throw DatasetError(path.string() + ": " + e.what(), 0);
        }
        for (std::size_t i = 0; i < arr.size(); ++i) {
            std::string why;
            auto ex = map_record(arr[i], format, std::to_string(i), why);
            if (!ex) throw DatasetError("record " + std::to_string(i) + ": " + why, i);
            out.push_back(std::move(*ex));
        }
    } else {
        std::istringstream in(data);
        std::string raw;
        std::size_t line = 0;
        while (std::getline(in, raw)) {
            ++line;
            if (text::trim(raw).empty()) continue;
            json r;
            try {
                r = json::parse(raw);
            } catch (const json::parse_error& e) {
                throw DatasetError("line " + std::to_string(line) + ": " + e.what(), line);
            }
            std::string why;
            auto ex = map_record(r, format, std::to_string(out.size()), why);
            if (!ex) throw DatasetError("line " + std::to_string(line) + ": " + why, line);
            out.push_back(std::move(*ex));
        }
    }

    std::set<std::string> seen;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!seen.insert(out[i].id).second) {
            throw DatasetError("duplicate example id '" + out[i].id + "'", i);
        }
    }
    return out;
}

namespace {

// Unbiased integer in [0, bound) by rejection; stable across standard libraries.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

}  // namespace

std::vector<QaExample> subsample(std::span<const QaExample> examples, std::size_t n,
                                 std::uint64_t seed) {
    if (n >= examples.size()) return {examples.begin(), examples.end()};
    std::vector<std::size_t> idx(examples.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        auto j = i + bounded(rng, idx.size() - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(n);
    std::sort(idx.begin(), idx.end());
    std::vector<QaExample> out;
    out.reserve(n);
    for (auto i : idx) out.push_back(examples[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Reports

MetricsReport evaluate_run(const std::map<std::string, std::string>& predictions,
                           std::span<const QaExample> examples) {
    MetricsReport report;
    report.n = examples.size();
    for (const auto& ex : examples) {
        ExampleScore row;
        row.id = ex.id;
        row.gold_answers = ex.gold_answers;
        auto it = predictions.find(ex.id);
        if (it == predictions.end()) {
            row.missing = true;
            ++report.missing;
        } else {
            row.prediction = it->second;
        }
        row.em = exact_match(row.prediction, ex.gold_answers);
        row.prf = token_prf(row.prediction, ex.gold_answers);
        report.em += row.em;
        report.f1 += row.prf.f1;
        report.precision += row.prf.precision;
        report.recall += row.prf.recall;
        report.rows.push_back(std::move(row));
    }
    if (report.n > 0) {
        const double scale = 100.0 / static_cast<double>(report.n);
        report.em *= scale;
        report.f1 *= scale;
        report.precision *= scale;
        report.recall *= scale;
    }
    return report;
}

json MetricsReport::to_json() const {
    json rows_json = json::array();
    for (const auto& r : rows) {
        rows_json.push_back({{"id", r.id},
                             {"prediction", r.prediction},
                             {"gold", r.gold_answers},
                             {"em", r.em},
                             {"f1", r.prf.f1},
                             {"precision", r.prf.precision},
                             {"recall", r.prf.recall},
                             {"missing", r.missing}});
    }
    return {{"n", n},
            {"em", em},
            {"f1", f1},
            {"precision", precision},
            {"recall", recall},
            {"missing", missing},
            {"rows", rows_json}};
}

std::string MetricsReport::table() const {
    char buf[256];
    std::string out = "     n      EM      F1  Precision  Recall\n";
    std::snprintf(buf, sizeof(buf), "%6zu  %6.2f  %6.2f  %9.2f  %6.2f\n", n, em, f1, precision,
                  recall);
    out += buf;
    if (missing > 0) {
        std::snprintf(buf, sizeof(buf), "(%zu example(s) had no prediction and were scored as empty)\n",
                      missing);
        out += buf;
    }
    return out;
}

std::map<std::string, std::string> load_predictions(const fs::path& path) {
    std::map<std::string, std::string> out;
    auto data = read_file(path);
    std::istringstream in(data);
    std::string raw;
    std::size_t line = 0;
    const bool terminated = !data.empty() && data.back() == '\n';
    while (std::getline(in, raw)) {
        ++line;
        if (text::trim(raw).empty()) continue;
        json r;
        try {
            r = json::parse(raw);
        } catch (const json::parse_error& e) {
            // A run killed mid-write can leave one unterminated final line.
            if (!terminated && in.peek() == std::char_traits<char>::eof()) break;
            throw DatasetError("line " + std::to_string(line) + ": " + e.what(), line);
        }
        if (!r.is_object() || !r.contains("id") || !r.contains("answer") || !r.at("answer").is_string()) {
            throw DatasetError("line " + std::to_string(line) + ": expected {id, answer}", line);
        }
        out[id_from(r.at("id"))] = r.at("answer").get<std::string>();
    }
    return out;
}

}  // namespace hirag::eval
