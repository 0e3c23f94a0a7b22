#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace hirag::eval {

struct QaExample {
    std::string id;
    std::string question;
    std::vector<std::string> gold_answers;
};

enum class DatasetFormat { hotpotqa, twowiki, musique, bamboogle, generic };

std::optional<DatasetFormat> parse_dataset_format(std::string_view name);
std::string_view to_string(DatasetFormat format);

/// SQuAD-style normalization: lowercase (ASCII), drop ASCII punctuation,
/// drop the articles a/an/the, collapse whitespace.
std::string normalize_answer(std::string_view s);

/// 1 when the normalized prediction equals some normalized gold answer.
int exact_match(std::string_view prediction, std::span<const std::string> golds);

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Multiset token overlap against each gold; returns the scores of the gold
/// with the highest F1. All zero when either side normalizes to nothing.
Prf token_prf(std::string_view prediction, std::span<const std::string> golds);

/// Loads id, question and answers only; context/supporting fields are ignored.
/// Throws DatasetError naming the 1-based line (line formats) or the 0-based
/// record index (JSON arrays).
///
///   generic    JSONL {id, question, answer | answers}
///   hotpotqa   JSON array or JSONL {_id, question, answer}
///   2wiki      JSON array or JSONL {_id, question, answer}
///   musique    JSONL {id, question, answer, answer_aliases}
///   bamboogle  CSV with Question,Answer header, or JSON/JSONL {Question, Answer}
std::vector<QaExample> load_dataset(const std::filesystem::path& path, DatasetFormat format);

/// Seeded sample of n examples without replacement, kept in original order.
/// n >= size returns everything.
std::vector<QaExample> subsample(std::span<const QaExample> examples, std::size_t n,
                                 std::uint64_t seed);

struct ExampleScore {
    std::string id;
    std::string prediction;
    std::vector<std::string> gold_answers;
    int em = 0;
    Prf prf;
    bool missing = false;
};

struct MetricsReport {
    double em = 0.0;  // each metric is a mean x 100
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    std::size_t n = 0;
    std::size_t missing = 0;
    std::vector<ExampleScore> rows;

    nlohmann::json to_json() const;
    std::string table() const;
};

/// Scores every example; ids without a prediction are scored as "" and counted.
MetricsReport evaluate_run(const std::map<std::string, std::string>& predictions,
                           std::span<const QaExample> examples);

/// Reads a predictions file: JSONL records {id, answer}. Later lines win.
std::map<std::string, std::string> load_predictions(const std::filesystem::path& path);

}  // namespace hirag::eval
