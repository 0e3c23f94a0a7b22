#include "hirag/corpus.hpp"
#include "hirag/embedder.hpp"
#include "hirag/eval.hpp"
#include "hirag/sparse_index.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

namespace {

const std::vector<std::string> kVocab = {"river", "film", "the",    "of",   "paris", "mercury",
                                         "planet", "song", "alpha", "beta", "house", "north"};

std::string words(std::mt19937_64& rng, std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + kVocab[rng() % kVocab.size()];
    return s;
}

void BM_Bm25Rank(benchmark::State& state) {
    std::mt19937_64 rng(1);
    std::vector<std::string> titles;
    for (int i = 0; i < state.range(0); ++i) titles.push_back(words(rng, 1 + rng() % 4) + " " + std::to_string(i));
    auto index = hirag::SparseIndex::build(std::span<const std::string>(titles));
    for (auto _ : state) benchmark::DoNotOptimize(index.rank("mercury planet film"));
}
BENCHMARK(BM_Bm25Rank)->Arg(1'000)->Arg(100'000);

void BM_SplitDocument(benchmark::State& state) {
    std::mt19937_64 rng(2);
    hirag::Document doc{"1", "Doc", words(rng, static_cast<std::size_t>(state.range(0)))};
    for (auto _ : state) benchmark::DoNotOptimize(hirag::split_document(doc, 100));
}
BENCHMARK(BM_SplitDocument)->Arg(1'000)->Arg(10'000);

void BM_HashEmbed(benchmark::State& state) {
    std::mt19937_64 rng(3);
    hirag::HashEmbedder embedder;
    auto text = words(rng, 100);
    for (auto _ : state) benchmark::DoNotOptimize(embedder.embed(text));
}
BENCHMARK(BM_HashEmbed);

void BM_NormalizeAnswer(benchmark::State& state) {
    const std::string answer = "The  Quick, brown fox: an answer (with punctuation)!";
    for (auto _ : state) benchmark::DoNotOptimize(hirag::eval::normalize_answer(answer));
}
BENCHMARK(BM_NormalizeAnswer);

}  // namespace
BENCHMARK_MAIN();
