#include "commands.hpp"

#include "hirag/config.hpp"
#include "hirag/corpus.hpp"
#include "hirag/errors.hpp"
#include "hirag/eval.hpp"
#include "hirag/pipeline.hpp"
#include "hirag/sparse_index.hpp"
#include "hirag/text.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

namespace hirag::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kPredictionsFile = "predictions.jsonl";
constexpr const char* kReportJson = "report.json";
constexpr const char* kReportText = "report.txt";
constexpr const char* kErrorsFile = "errors.jsonl";
constexpr const char* kTracesDir = "traces";

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const IngestError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const IndexError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const DatasetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const PipelineError& e) {
        std::cerr << "error: pipeline aborted: " << e.what() << "\n";
        return kRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
}

RunConfig resolve_config(const RunFlags& flags) {
    RunConfig cfg;
    if (!flags.config.empty()) cfg = RunConfig::load(flags.config);
    if (!flags.corpus.empty()) cfg.corpus_dir = flags.corpus;
    if (!flags.index.empty()) cfg.index_dir = flags.index;
    if (!flags.mode.empty()) cfg.pipeline.mode = *parse_retrieval_mode(flags.mode);
    if (flags.seed) cfg.pipeline.seed = *flags.seed;
    if (flags.concurrency) cfg.concurrency = *flags.concurrency;
    cfg.validate();
    return cfg;
}

json source_record(const SubAnswer& a) {
    json j = {{"kind", to_string(a.source.kind)}};
    if (!a.source.title.empty()) j["title"] = a.source.title;
    if (a.source.chunk) j["chunk"] = *a.source.chunk;
    if (!a.source.url.empty()) j["url"] = a.source.url;
    return j;
}

std::string describe_source(const SubAnswer& a) {
    switch (a.source.kind) {
        case AnswerSource::Kind::retrieved:
            return "retrieved: " + a.source.title + " #" + std::to_string(a.source.chunk.value_or(0));
        case AnswerSource::Kind::online: return "online: " + a.source.url;
        case AnswerSource::Kind::internal: return "internal knowledge";
        case AnswerSource::Kind::empty: return "no answer";
    }
    return "";
}

// Trace file name for a question id: safe characters kept, anything else
// replaced, with a hash suffix when the id had to be altered.
std::string trace_file_name(const std::string& id) {
    std::string safe;
    for (char c : id) {
        bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
        safe.push_back(ok ? c : '_');
    }
    if (safe != id || safe.empty() || safe.front() == '.') {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(text::fnv1a64(id)));
        safe += "-";
        safe += buf;
    }
    return safe + ".jsonl";
}

void write_text(const fs::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        if (!out) throw Error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

}  // namespace

int cmd_ingest(const IngestArgs& args) {
    return guarded([&] {
        if (!fs::exists(args.corpus)) throw ConfigError("corpus file not found: " + args.corpus);
        if (!args.profiles.empty() && !fs::exists(args.profiles)) {
            throw ConfigError("profiles file not found: " + args.profiles);
        }
        fs::path out(args.out);
        if (fs::exists(out / "manifest.json") && !args.force) {
            throw ConfigError("corpus directory " + out.string() + " already exists (use --force)");
        }
        std::optional<fs::path> profiles;
        if (!args.profiles.empty()) profiles = args.profiles;
        auto corpus = Corpus::ingest(args.corpus, profiles);
        corpus.save(out);
        auto s = corpus.stats();
        std::cout << "ingested " << s.entity_count << " entities, " << s.word_count << " words, "
                  << corpus.profiles().size() << " profiles -> " << out.string() << "\n";
        return kOk;
    });
}

int cmd_stats(const StatsArgs& args) {
    return guarded([&] {
        if (!fs::is_directory(args.corpus)) throw ConfigError("corpus directory not found: " + args.corpus);
        auto corpus = Corpus::load(args.corpus);
        auto s = corpus.stats();
        if (args.json) {
            std::cout << json{{"entity_count", s.entity_count},
                              {"word_count", s.word_count},
                              {"profile_count", corpus.profiles().size()}}
                             .dump()
                      << "\n";
        } else {
            std::cout << "entities: " << s.entity_count << "\n"
                      << "words:    " << s.word_count << "\n"
                      << "profiles: " << corpus.profiles().size() << "\n";
        }
        return kOk;
    });
}

int cmd_build_index(const BuildIndexArgs& args) {
    return guarded([&] {
        if (!fs::is_directory(args.corpus)) throw ConfigError("corpus directory not found: " + args.corpus);
        fs::path out(args.out);
        if (fs::exists(out / "sparse.idx") && !args.force) {
            throw ConfigError("index " + out.string() + " already exists (use --force)");
        }
        auto corpus = Corpus::load(args.corpus);
        if (corpus.empty()) throw ConfigError("corpus " + args.corpus + " is empty; nothing to index");
        auto index = SparseIndex::build(corpus);
        index.save(out);
        std::cout << "indexed " << index.size() << " titles (avg length "
                  << index.average_length() << ") -> " << out.string() << "\n";
        return kOk;
    });
}

int cmd_ask(const AskArgs& args) {
    return guarded([&] {
        auto cfg = resolve_config(args.run);
        Runtime runtime(cfg);
        auto pipeline = runtime.pipeline(cfg.pipeline);
        AnswerResult result;
        try {
            result = pipeline.answer_question(args.question, args.id);
        } catch (const PipelineError& e) {
            if (!args.trace.empty()) e.partial_trace().write(args.trace);
            throw;
        }
        if (!args.trace.empty()) result.trace.write(args.trace);

        if (args.json) {
            json subqa = json::array();
            for (const auto& s : result.sub_qa) {
                subqa.push_back({{"question", s.question},
                                 {"answer", s.answer},
                                 {"source", source_record(s)},
                                 {"rethinks", s.rethinks_used}});
            }
            std::cout << json{{"question", args.question},
                              {"answer", result.final_answer},
                              {"turns", result.turns},
                              {"stop_reason", result.stop_reason},
                              {"sub_qa", subqa}}
                             .dump()
                      << "\n";
            return kOk;
        }
        if (args.show_subqa) {
            for (std::size_t i = 0; i < result.sub_qa.size(); ++i) {
                const auto& s = result.sub_qa[i];
                std::cout << "Q" << (i + 1) << ": " << s.question << "\n";
                std::cout << "A" << (i + 1) << ": " << (s.answer.empty() ? "(none)" : s.answer) << "  ["
                          << describe_source(s) << ", rethinks " << s.rethinks_used << "]\n";
            }
            std::cout << "Final: ";
        }
        std::cout << result.final_answer << "\n";
        return kOk;
    });
}

int cmd_retrieve(const RetrieveArgs& args) {
    return guarded([&] {
        auto cfg = resolve_config(args.run);
        Runtime runtime(cfg);
        auto pipeline = runtime.pipeline(cfg.pipeline);
        QaState state(args.id, args.question, cfg.pipeline.seed);
        SubAnswer a;
        try {
            a = pipeline.answer_sub_question(args.question, state);
        } catch (const PipelineError& e) {
            if (!args.trace.empty()) e.partial_trace().write(args.trace);
            throw;
        }
        if (!args.trace.empty()) state.trace.write(args.trace);

        if (args.json) {
            std::cout << json{{"question", args.question},
                              {"answer", a.answer},
                              {"source", source_record(a)},
                              {"chunk", a.chunk_text},
                              {"profile", a.profile_text},
                              {"rethinks", a.rethinks_used}}
                             .dump()
                      << "\n";
            return kOk;
        }
        std::cout << "answer:  " << (a.answer.empty() ? "(none)" : a.answer) << "\n";
        std::cout << "source:  " << describe_source(a) << "\n";
        std::cout << "rethinks: " << a.rethinks_used << "\n";
        if (!a.profile_text.empty()) std::cout << "profile: " << a.profile_text << "\n";
        if (!a.chunk_text.empty()) std::cout << "chunk:   " << a.chunk_text << "\n";
        return kOk;
    });
}

int cmd_eval(const EvalArgs& args) {
    return guarded([&] {
        auto cfg = resolve_config(args.run);
        auto format = eval::parse_dataset_format(args.format);
        if (!format) throw ConfigError("unknown dataset format '" + args.format + "'");
        if (!fs::exists(args.dataset)) throw ConfigError("dataset not found: " + args.dataset);

        fs::path run_dir(args.run_dir);
        auto predictions_path = run_dir / kPredictionsFile;
        if (fs::exists(predictions_path) && !args.resume && !args.force) {
            throw ConfigError("run directory " + run_dir.string() +
                              " already has predictions (use --resume or --force)");
        }
        if (args.force && !args.resume) {
            fs::remove(predictions_path);
            fs::remove(run_dir / kErrorsFile);
            fs::remove_all(run_dir / kTracesDir);
        }
        fs::create_directories(run_dir / kTracesDir);

        auto all = eval::load_dataset(args.dataset, *format);
        auto examples = args.n ? eval::subsample(all, *args.n, cfg.pipeline.seed) : all;

        std::map<std::string, std::string> predictions;
        if (args.resume && fs::exists(predictions_path)) {
            predictions = eval::load_predictions(predictions_path);
            // Drop a torn final line before appending to the file again.
            std::string kept;
            for (const auto& [id, answer] : predictions) {
                kept += json{{"id", id}, {"answer", answer}}.dump() + '\n';
            }
            write_text(predictions_path, kept);
        }
        std::vector<const eval::QaExample*> todo;
        for (const auto& ex : examples) {
            if (!predictions.contains(ex.id)) todo.push_back(&ex);
        }
        spdlog::info("{} questions, {} already answered, {} to run", examples.size(),
                     examples.size() - todo.size(), todo.size());

        Runtime runtime(cfg);
        auto pipeline = runtime.pipeline(cfg.pipeline);

        std::mutex mu;
        std::ofstream pred_out(predictions_path, std::ios::app | std::ios::binary);
        std::ofstream err_out(run_dir / kErrorsFile, std::ios::app | std::ios::binary);
        if (!pred_out || !err_out) throw Error("cannot write to run directory " + run_dir.string());
        std::atomic<std::size_t> next{0};
        std::atomic<std::size_t> failures{0};

        auto worker = [&] {
            for (;;) {
                auto i = next.fetch_add(1);
                if (i >= todo.size()) return;
                const auto& ex = *todo[i];
                auto trace_path = run_dir / kTracesDir / trace_file_name(ex.id);
                try {
                    auto result = pipeline.answer_question(ex.question, ex.id);
                    result.trace.write(trace_path);
                    std::lock_guard lock(mu);
                    predictions[ex.id] = result.final_answer;
                    pred_out << json{{"id", ex.id}, {"answer", result.final_answer}}.dump() << '\n';
                    pred_out.flush();
                } catch (const PipelineError& e) {
                    e.partial_trace().write(trace_path);
                    ++failures;
                    std::lock_guard lock(mu);
                    spdlog::error("question {} aborted: {}", ex.id, e.what());
                    err_out << json{{"id", ex.id}, {"error", e.what()}}.dump() << '\n';
                    err_out.flush();
                }
            }
        };
        const auto width = std::min<std::size_t>(cfg.concurrency, std::max<std::size_t>(todo.size(), 1));
        std::vector<std::thread> threads;
        for (std::size_t i = 1; i < width; ++i) threads.emplace_back(worker);
        worker();
        for (auto& t : threads) t.join();
        pred_out.close();
        err_out.close();

        // Rewrite predictions in dataset order so the file is independent of scheduling.
        std::string ordered;
        for (const auto& ex : examples) {
            auto it = predictions.find(ex.id);
            if (it != predictions.end()) {
                ordered += json{{"id", ex.id}, {"answer", it->second}}.dump();
                ordered += '\n';
            }
        }
        write_text(predictions_path, ordered);

        auto report = eval::evaluate_run(predictions, examples);
        auto report_json = report.to_json();
        report_json["dataset"] = fs::path(args.dataset).filename().string();
        report_json["format"] = eval::to_string(*format);
        report_json["seed"] = cfg.pipeline.seed;
        report_json["failures"] = failures.load();
        write_text(run_dir / kReportJson, report_json.dump(2) + "\n");
        write_text(run_dir / kReportText, report.table());
        std::cout << report.table();
        return failures.load() == 0 ? kOk : kRuntime;
    });
}

}  // namespace hirag::cli
