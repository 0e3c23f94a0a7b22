#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace hirag::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 2,    // bad flags, config, paths, or input files
    kRuntime = 3,  // pipeline failure after a valid start
};

// Flags shared by the commands that run the pipeline. Unset values fall back
// to the config file, then to built-in defaults.
struct RunFlags {
    std::string config;
    std::string corpus;
    std::string index;
    std::string mode;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> concurrency;
};

struct IngestArgs {
    std::string corpus;
    std::string profiles;
    std::string out;
    bool force = false;
};

struct StatsArgs {
    std::string corpus;
    bool json = false;
};

struct BuildIndexArgs {
    std::string corpus;
    std::string out;
    bool force = false;
};

struct AskArgs {
    RunFlags run;
    std::string question;
    std::string id = "ask";
    std::string trace;
    bool show_subqa = false;
    bool json = false;
};

struct EvalArgs {
    RunFlags run;
    std::string dataset;
    std::string format = "generic";
    std::optional<std::size_t> n;
    std::string run_dir;
    bool resume = false;
    bool force = false;
};

struct RetrieveArgs {
    RunFlags run;
    std::string question;
    std::string id = "retrieve";
    std::string trace;
    bool json = false;
};

int cmd_ingest(const IngestArgs& args);
int cmd_stats(const StatsArgs& args);
int cmd_build_index(const BuildIndexArgs& args);
int cmd_ask(const AskArgs& args);
int cmd_eval(const EvalArgs& args);
int cmd_retrieve(const RetrieveArgs& args);

}  // namespace hirag::cli
