#include "support.hpp"

#include "hirag/config.hpp"
#include "hirag/sparse_index.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace hirag::testing {

namespace fs = std::filesystem;
using nlohmann::json;

TempDir::TempDir(const std::string& prefix) {
    static std::atomic<int> counter{0};
    auto base = fs::temp_directory_path();
    for (;;) {
        auto candidate = base / (prefix + "-" + std::to_string(::getpid()) + "-" +
                                 std::to_string(counter.fetch_add(1)));
        if (fs::create_directories(candidate)) {
            path_ = candidate;
            return;
        }
    }
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ScriptBuilder& ScriptBuilder::add(std::string role, std::string match,
                                  std::vector<std::string> completions, bool cycle) {
    entries_.push_back({{"role", std::move(role)},
                        {"match", std::move(match)},
                        {"completions", std::move(completions)},
                        {"cycle", cycle}});
    return *this;
}

std::string filter_yes(const std::string& answer) { return "solvable: yes\nanswer: " + answer; }
std::string filter_no() { return "solvable: no\nanswer:"; }

namespace {

std::vector<std::string> oracle_tokens(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : s) {
        bool keep = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    c >= 0x80;
        if (keep) {
            cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace

std::vector<std::pair<std::string, double>> bm25_oracle(const std::vector<std::string>& titles,
                                                        const std::string& query, double k1,
                                                        double b) {
    std::vector<std::vector<std::string>> docs;
    double total = 0;
    for (const auto& t : titles) {
        docs.push_back(oracle_tokens(t));
        total += static_cast<double>(docs.back().size());
    }
    const double n = static_cast<double>(titles.size());
    const double avgdl = total / n;

    auto q = oracle_tokens(query);
    std::set<std::string> terms(q.begin(), q.end());

    std::vector<std::pair<std::string, double>> out;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        double score = 0;
        for (const auto& term : terms) {
            double df = 0;
            for (const auto& d : docs) {
                if (std::find(d.begin(), d.end(), term) != d.end()) df += 1;
            }
            double tf = static_cast<double>(std::count(docs[i].begin(), docs[i].end(), term));
            if (tf == 0) continue;
            double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
            double dl = static_cast<double>(docs[i].size());
            score += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl));
        }
        if (score > 0) out.emplace_back(titles[i], score);
    }
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
        if (x.second != y.second) return x.second > y.second;
        return x.first < y.first;
    });
    return out;
}

namespace {

constexpr std::array kFillerWords = {
    "harvest", "copper",  "pebble", "quartz",  "ripple", "saddle", "timber", "walnut",
    "basalt",  "cinder",  "dune",   "fjord",   "glacier", "hazel", "juniper", "kelp",
    "lichen",  "mossy",   "nectar", "oak",     "pine",   "reef",   "sable",  "thistle",
    "umber",   "vine",    "willow", "yarrow",  "zinc",   "acorn",  "birch",  "cedar",
    "delta",   "fern",    "gravel", "heath",   "inlet",  "jasper", "knoll",  "loam",
    "marsh",   "nook",    "opal",   "prairie", "quarry", "ridge",  "slate",  "tundra",
};

}  // namespace

std::string filler(std::size_t n, std::uint64_t seed) {
    std::uint64_t state = seed * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL;
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        if (i) out += ' ';
        out += kFillerWords[(state >> 33) % kFillerWords.size()];
    }
    return out;
}

std::string segment(const std::string& sentence, std::size_t words, std::uint64_t seed) {
    std::istringstream in(sentence);
    std::size_t n = 0;
    for (std::string w; in >> w;) ++n;
    if (n > words) throw std::invalid_argument("sentence longer than segment: " + sentence);
    if (n == words) return sentence;
    return sentence + " " + filler(words - n, seed);
}

namespace {

constexpr std::array kFilms = {
    "Ember Falls",    "Silent Harbor",  "Glass Orchard",  "Iron Meadow",   "Paper Comet",
    "Velvet Storm",   "Hollow Crown",   "Amber Tide",     "Frozen Lantern", "Crimson Valley",
    "Distant Bells",  "Golden Sparrow", "Marble Coast",   "Neon Desert",   "Quiet Thunder",
    "Rusty Anchor",   "Shadow Garden",  "Twilight Ferry", "Wild Orchid",   "Broken Compass",
    "Lunar Canyon",   "Scarlet Bridge", "Winter Kite",
};

constexpr std::array kDirectors = {
    "Dana Moore",  "Elias Grant", "Nora Quill",  "Victor Hale",  "Ivy Lambert", "Alan Reed",
    "Owen Pike",   "Clara Voss",  "Milo Hart",   "Lena Brooks",  "Hugo Stern",  "Tessa Crane",
    "Felix Ward",  "Greta Lund",  "Simon Kaye",  "Rosa Ibarra",  "Jonah Bell",  "Petra Novak",
    "Caleb Frost", "Wanda Ellis", "Igor Platt",  "Maya Torres",
};

constexpr std::array kSpouses = {
    "Rita Bloom",   "Paul Ashby",   "Irene Castle", "Gordon Pryce", "Helen Marsh",  "Sofia Reed",
    "Martin Cole",  "Agnes Wolfe",  "Bruno Silva",  "Nadia Fell",   "Oscar Lind",   "Yara Quinn",
    "Edith Shore",  "Lars Berg",    "Tara Vance",   "Diego Ramos",  "Celia Moss",   "Karl Weber",
    "Vera Holt",    "Arthur Penn",  "Olga Sato",    "Noel Fisher",
};

constexpr std::size_t kAlanReed = 5;
constexpr std::array<std::size_t, 2> kSecondChunkSpouse = {7, 11};
constexpr std::array<std::size_t, 4> kNoSpouseFact = {3, 8, 14, 17};

bool contains(auto const& arr, std::size_t v) {
    return std::find(arr.begin(), arr.end(), v) != arr.end();
}

std::string director_title(std::size_t d) {
    return d == kAlanReed ? std::string(kDirectors[d]) + " (director)" : std::string(kDirectors[d]);
}

}  // namespace

Scenario Scenario::two_hop() {
    Scenario s;
    const std::size_t cs = s.chunk_size;
    std::uint64_t seed = 1;
    auto seg = [&](const std::string& sentence) { return segment(sentence, cs, seed++); };
    auto body = [](std::initializer_list<std::string> parts) {
        std::string out;
        for (const auto& p : parts) out += (out.empty() ? "" : " ") + p;
        return out;
    };
    auto add_doc = [&](std::string title, std::string text, std::string profile) {
        s.documents.push_back({"d" + std::to_string(s.documents.size()), title, std::move(text)});
        s.profiles.push_back({std::move(title), std::move(profile)});
    };

    // Film k -> director k % 22. Film 23 is the ambiguous "Mercury (film)".
    constexpr std::size_t kFilmCount = kFilms.size() + 1;
    auto film_title = [&](std::size_t k) {
        return k < kFilms.size() ? std::string(kFilms[k]) : std::string("Mercury (film)");
    };
    auto director_of = [&](std::size_t k) { return k % kDirectors.size(); };

    for (std::size_t k = 0; k < kFilmCount; ++k) {
        auto title = film_title(k);
        auto director = std::string(kDirectors[director_of(k)]);
        add_doc(title,
                body({seg(title + " is a drama. " + title + " was directed by " + director + "."),
                      seg("Production notes:"), seg("Reception:")}),
                title + " is a motion picture.");
    }
    for (const char* decoy : {"Mercury (planet)", "Mercury (element)", "Mercury (mythology)"}) {
        add_doc(decoy, body({seg(std::string(decoy) + " is unrelated to cinema."), seg("Notes:")}),
                std::string(decoy) + " is not a film.");
    }
    add_doc("Alan Reed",
            body({seg("Alan Reed is a retired footballer who played as a defender."),
                  seg("Club career:")}),
            "Alan Reed is a footballer.");

    for (std::size_t d = 0; d < kDirectors.size(); ++d) {
        auto name = std::string(kDirectors[d]);
        auto spouse = std::string(kSpouses[d]);
        auto title = director_title(d);
        std::string text;
        if (contains(kNoSpouseFact, d)) {
            text = body({seg(name + " is a film director from the coast."), seg("Filmography:"),
                         seg("Style:")});
        } else if (contains(kSecondChunkSpouse, d)) {
            // The first chunk shares more words with "Who is the spouse of X?"
            // than the chunk holding the fact.
            text = body({seg("Who is the spouse of " + name + "? The spouse of " + name +
                             " is the question of who " + name + " is."),
                          seg(name + " is married to " + spouse + "."), seg("Filmography:")});
        } else {
            text = body({seg(name + " is a film director. " + name + " is married to " + spouse + "."),
                         seg("Filmography:"), seg("Style:")});
        }
        add_doc(title, text, name + " is a film director.");
    }

    ScriptBuilder llm;
    json search = {{"results", json::object()}, {"failures", json::array()}};

    // Filter: the fact sentences are the only "yes" triggers.
    for (std::size_t k = 0; k < kFilmCount; ++k) {
        auto director = std::string(kDirectors[director_of(k)]);
        llm.add("filter", "was directed by " + director + ".", {filter_yes(director)}, true);
    }
    for (std::size_t d = 0; d < kDirectors.size(); ++d) {
        if (contains(kNoSpouseFact, d)) continue;
        auto name = std::string(kDirectors[d]);
        llm.add("filter", name + " is married to " + std::string(kSpouses[d]) + ".",
                {filter_yes(std::string(kSpouses[d]))}, true);
    }

    auto add_question = [&](const std::string& id, std::size_t k, const std::string& x,
                            const std::string& q1) {
        auto director = std::string(kDirectors[director_of(k)]);
        auto spouse = std::string(kSpouses[director_of(k)]);
        auto q2 = "Who is the spouse of " + director + "?";
        llm.add("decomposer", "Original question: " + x + "\n", {q1, q2, "That's enough"});
        llm.add("entity", "Question: " + q2, {director}, true);
        llm.add("internal", "Question: " + q2, {spouse}, true);
        llm.add("internal", "Question: " + q1, {director}, true);
        llm.add("summarizer", "Question: " + x, {spouse}, true);
        s.examples.push_back({id, x, {spouse}});
    };

    for (std::size_t k = 0; k < kFilmCount; ++k) {
        auto title = film_title(k);
        char id[8];
        std::snprintf(id, sizeof id, "q%02zu", k + 1);
        if (k < kFilms.size()) {
            auto q1 = "Who directed " + title + "?";
            llm.add("entity", "Question: " + q1, {title}, true);
            add_question(id, k, "Who is the spouse of the director of " + title + "?", q1);
        } else {
            // Online: the rewritten question has a scripted search snippet.
            auto x = std::string("Who is the spouse of the director of the film Mercury?");
            auto q1 = std::string("Who directed Mercury?");
            auto rewritten = std::string("Who directed the film Mercury (film)?");
            auto director = std::string(kDirectors[director_of(k)]);
            llm.add("entity", "Question: " + q1, {"Mercury"}, true);
            llm.add("rewriter", "Context: " + x, {rewritten}, true);
            llm.add("entity", "Question: " + rewritten, {"Mercury (film)"}, true);
            search["results"][rewritten] = {
                {"snippet", "The 1999 thriller Mercury was directed by " + director + "."},
                {"link", "https://example.org/wiki/Mercury_(film)"}};
            add_question(id, k, x, q1);

            // Local fallback: no snippet for this rewrite.
            auto x2 = std::string("Who is married to the person who directed the film Mercury?");
            auto rewritten2 = std::string("Which director made the film Mercury (film)?");
            llm.add("rewriter", "Context: " + x2, {rewritten2}, true);
            llm.add("entity", "Question: " + rewritten2, {"Mercury (film)"}, true);
            add_question("q25", k, x2, q1);
        }
    }
    llm.add("filter", "", {filter_no()}, true);

    s.llm_script = llm.json();
    s.search_script = std::move(search);
    return s;
}

fs::path Scenario::materialize(const fs::path& dir, const std::string& mode,
                               std::size_t concurrency) const {
    fs::create_directories(dir);
    std::string records, profs, dataset;
    for (const auto& d : documents) {
        records += json{{"id", d.id}, {"title", d.title}, {"text", d.body}}.dump() + "\n";
    }
    for (const auto& p : profiles) profs += json{{"title", p.title}, {"profile", p.text}}.dump() + "\n";
    for (const auto& e : examples) {
        dataset += json{{"id", e.id}, {"question", e.question}, {"answers", e.gold_answers}}.dump() + "\n";
    }
    write_file(dir / "records.jsonl", records);
    write_file(dir / "profiles.jsonl", profs);
    write_file(dir / "dataset.jsonl", dataset);
    write_file(dir / "llm_script.json", llm_script.dump(2));
    write_file(dir / "search_script.json", search_script.dump(2));

    auto corpus = Corpus::ingest(dir / "records.jsonl", dir / "profiles.jsonl");
    fs::remove_all(dir / "corpus");
    fs::remove_all(dir / "index");
    corpus.save(dir / "corpus");
    SparseIndex::build(corpus).save(dir / "index");

    json config = {{"corpus", "corpus"},
                   {"index", "index"},
                   {"mode", mode},
                   {"seed", 0},
                   {"concurrency", concurrency},
                   {"pipeline", {{"chunk_size", chunk_size}}},
                   {"retry", {{"max_attempts", 3}, {"initial_backoff_ms", 1}}},
                   {"llm", {{"kind", "scripted"}, {"script", "llm_script.json"}}},
                   {"embedder", {{"kind", "hash"}, {"dim", 256}}},
                   {"search", {{"kind", "scripted"}, {"script", "search_script.json"}}}};
    write_file(dir / "config.json", config.dump(2));
    return dir / "config.json";
}

Harness::Harness(std::vector<Document> documents, std::vector<Profile> profiles,
                 const json& llm_script, const json& search_script)
    : corpus_(Corpus::from_records(std::move(documents), std::move(profiles))),
      index_(SparseIndex::build(corpus_)),
      backend_(ScriptedBackend::from_json(llm_script)),
      search_(search_script.is_null() ? std::make_shared<ScriptedSearch>()
                                      : ScriptedSearch::from_json(search_script)),
      llm_(std::make_unique<LlmClient>(backend_, GenerationParams{},
                                       RetryPolicy{3, std::chrono::milliseconds(0), 2.0})) {}

Pipeline Harness::pipeline(const PipelineConfig& config) const {
    return Pipeline(PipelineDeps{&corpus_, &index_, &embedder_, llm_.get(), search_.get()}, config);
}

ReferenceOutcome reference_rethink(std::size_t th2, std::size_t th3, std::size_t rejections) {
    ReferenceOutcome out;
    std::size_t t = 0, doc = 0, chunk = 0;
    for (;;) {
        out.steps.push_back({doc, chunk, t});
        if (out.steps.size() > rejections) {
            out.answered = true;
            break;
        }
        t = t + 1;
        if (t >= th3) break;
        if (t >= th2 && t % th2 == 0) {
            doc = doc + 1;
            chunk = 0;
        } else {
            chunk = chunk + 1;
        }
    }
    out.rethinks = t;
    return out;
}

std::vector<RethinkStep> filter_steps(const Trace& trace) {
    std::vector<RethinkStep> out;
    for (const auto& e : trace.events()) {
        if (e.kind != TraceKind::filter) continue;
        out.push_back({e.payload.at("doc_rank").get<std::size_t>(),
                       e.payload.at("chunk_rank").get<std::size_t>(),
                       e.payload.at("t").get<std::size_t>()});
    }
    return out;
}

BranchCoverage coverage_of(const Trace& trace) {
    BranchCoverage c;
    for (const auto& e : trace.events()) {
        switch (e.kind) {
            case TraceKind::filter:
                if (e.payload.at("chunk_rank").get<std::size_t>() > 0) ++c.chunk_rethinks;
                break;
            case TraceKind::escalate_doc: ++c.doc_escalations; break;
            case TraceKind::rewrite: ++c.rewrites; break;
            case TraceKind::gate:
                if (e.payload.at("fired").get<bool>()) ++c.gate_firings;
                break;
            case TraceKind::online_answer: ++c.online_answers; break;
            default: break;
        }
    }
    return c;
}

ScenarioRun run_examples(const fs::path& config, const std::vector<eval::QaExample>& examples) {
    auto rc = RunConfig::load(config);
    Runtime runtime(rc);
    auto pipeline = runtime.pipeline(rc.pipeline);
    ScenarioRun run;
    for (const auto& ex : examples) {
        auto r = pipeline.answer_question(ex.question, ex.id);
        run.predictions[ex.id] = r.final_answer;
        run.traces[ex.id] = r.trace.to_jsonl();
        auto c = coverage_of(r.trace);
        run.coverage.chunk_rethinks += c.chunk_rethinks;
        run.coverage.doc_escalations += c.doc_escalations;
        run.coverage.rewrites += c.rewrites;
        run.coverage.gate_firings += c.gate_firings;
        run.coverage.online_answers += c.online_answers;
    }
    run.report = eval::evaluate_run(run.predictions, examples);
    return run;
}

std::string gate_closed_id(std::uint64_t seed, std::size_t m, std::size_t draws,
                           const std::string& prefix) {
    for (std::size_t n = 0;; ++n) {
        auto id = prefix + std::to_string(n);
        auto rng = question_rng(seed, id);
        bool closed = true;
        for (std::size_t t = 1; t <= draws && closed; ++t) {
            double p = std::min(static_cast<double>(t * t) / static_cast<double>(m * m), 1.0);
            closed = static_cast<double>(rng() >> 11) * 0x1.0p-53 >= p;
        }
        if (closed) return id;
    }
}

std::vector<Document> rethink_documents(std::size_t chunk_size) {
    std::vector<Document> docs;
    const char* names[] = {"One", "Two", "Three", "Four", "Five", "Six", "Seven", "Eight"};
    std::uint64_t seed = 100;
    for (const char* n : names) {
        std::string body;
        for (int c = 0; c < 3; ++c) {
            body += (body.empty() ? "" : " ") + filler(chunk_size, seed++);
        }
        docs.push_back({std::string("a") + n, std::string("Alpha ") + n, body});
    }
    return docs;
}

}  // namespace hirag::testing
