#include "commands.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>

namespace {

void add_run_flags(CLI::App* cmd, hirag::cli::RunFlags& run) {
    cmd->add_option("--config", run.config, "JSON run configuration");
    cmd->add_option("--corpus", run.corpus, "Corpus directory (overrides config)");
    cmd->add_option("--index", run.index, "Index directory (overrides config)");
    cmd->add_option("--mode", run.mode, "Rewrite-path retrieval: local or online")
        ->check(CLI::IsMember({"local", "online"}));
    cmd->add_option("--seed", run.seed, "Global random seed");
    cmd->add_option("--concurrency", run.concurrency, "Questions answered in parallel")
        ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    using namespace hirag::cli;

    // Diagnostics go to stderr so stdout stays machine-readable.
    spdlog::set_default_logger(spdlog::stderr_color_mt("hirag"));
    spdlog::set_level(spdlog::level::warn);

    CLI::App app{"hirag: multi-hop question answering over an entity-indexed corpus"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Log progress at info level");

    IngestArgs ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Validate record files and write a corpus directory");
    c_ingest->add_option("--corpus", ingest.corpus, "Line-delimited JSON records {title, text}")->required();
    c_ingest->add_option("--profiles", ingest.profiles, "Line-delimited JSON profiles {title, profile}");
    c_ingest->add_option("--out", ingest.out, "Output corpus directory")->required();
    c_ingest->add_flag("--force", ingest.force, "Overwrite an existing corpus directory");

    StatsArgs stats;
    auto* c_stats = app.add_subcommand("stats", "Print entity and word counts of a corpus directory");
    c_stats->add_option("--corpus", stats.corpus, "Corpus directory")->required();
    c_stats->add_flag("--json", stats.json, "Print a JSON record");

    BuildIndexArgs build;
    auto* c_build = app.add_subcommand("build-index", "Build the title BM25 index for a corpus");
    c_build->add_option("--corpus", build.corpus, "Corpus directory")->required();
    c_build->add_option("--out", build.out, "Output index directory")->required();
    c_build->add_flag("--force", build.force, "Overwrite an existing index");

    AskArgs ask;
    auto* c_ask = app.add_subcommand("ask", "Answer one multi-hop question");
    c_ask->add_option("question", ask.question, "The question")->required();
    add_run_flags(c_ask, ask.run);
    c_ask->add_option("--id", ask.id, "Question id (seeds the per-question RNG)");
    c_ask->add_option("--trace", ask.trace, "Write the event trace to this file");
    c_ask->add_flag("--show-subqa", ask.show_subqa, "Print the sub-question/answer chain");
    c_ask->add_flag("--json", ask.json, "Print a JSON record");

    EvalArgs eval;
    auto* c_eval = app.add_subcommand("eval", "Run a dataset and score EM/F1/precision/recall");
    c_eval->add_option("--dataset", eval.dataset, "Dataset file")->required();
    c_eval->add_option("--format", eval.format, "hotpotqa | 2wiki | musique | bamboogle | generic")
        ->check(CLI::IsMember({"hotpotqa", "2wiki", "2wikimultihopqa", "musique", "bamboogle", "generic"}));
    c_eval->add_option("--n", eval.n, "Sub-sample this many questions");
    c_eval->add_option("--run-dir", eval.run_dir, "Run directory for predictions, report and traces")
        ->required();
    c_eval->add_flag("--resume", eval.resume, "Skip questions that already have predictions");
    c_eval->add_flag("--force", eval.force, "Discard an existing run in --run-dir");
    add_run_flags(c_eval, eval.run);

    RetrieveArgs retrieve;
    auto* c_retrieve =
        app.add_subcommand("retrieve", "Single-hop retrieval with verification (no decomposition)");
    c_retrieve->add_option("question", retrieve.question, "The single-hop question")->required();
    add_run_flags(c_retrieve, retrieve.run);
    c_retrieve->add_option("--id", retrieve.id, "Question id (seeds the per-question RNG)");
    c_retrieve->add_option("--trace", retrieve.trace, "Write the event trace to this file");
    c_retrieve->add_flag("--json", retrieve.json, "Print a JSON record");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }
    if (verbose) spdlog::set_level(spdlog::level::info);

    if (*c_ingest) return cmd_ingest(ingest);
    if (*c_stats) return cmd_stats(stats);
    if (*c_build) return cmd_build_index(build);
    if (*c_ask) return cmd_ask(ask);
    if (*c_eval) return cmd_eval(eval);
    if (*c_retrieve) return cmd_retrieve(retrieve);
    return kUsage;
}
