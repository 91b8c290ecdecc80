#include "bugloc/bm25.hpp"
#include "bugloc/corpus.hpp"
#include "bugloc/tokenizer.hpp"

#include <benchmark/benchmark.h>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

namespace {

const std::vector<std::string>& vocabulary() {
    static const std::vector<std::string> words = [] {
        const char* stems[] = {"order",  "cart",   "stock",  "price", "coupon", "request", "parse",
                               "config", "logger", "cache",  "token", "session", "user",   "query",
                               "index",  "buffer", "stream", "retry", "handler", "payload"};
        std::vector<std::string> out;
        for (const char* a : stems)
            for (const char* b : stems) out.push_back(std::string(a) + "_" + b);
        return out;
    }();
    return words;
}

std::string synthetic_source(std::mt19937& rng, std::size_t words) {
    const auto& vocab = vocabulary();
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
    std::string text;
    for (std::size_t i = 0; i < words; ++i) {
        text += vocab[pick(rng)];
        text += (i % 8 == 7) ? "\n" : " ";
    }
    return text;
}

bugloc::FileManifest synthetic_manifest(std::size_t files, std::size_t words) {
    std::mt19937 rng(1234);
    bugloc::FileManifest manifest;
    for (std::size_t i = 0; i < files; ++i)
        manifest.files.push_back({"pkg/mod_" + std::to_string(i) + ".py", bugloc::Language::python,
                                  synthetic_source(rng, words)});
    std::ranges::sort(manifest.files, {}, &bugloc::SourceFile::relative_path);
    return manifest;
}

void BM_Tokenize(benchmark::State& state) {
    std::mt19937 rng(7);
    const auto text = synthetic_source(rng, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(bugloc::tokenize(text));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_Tokenize)->Arg(256)->Arg(4096);

void BM_IndexBuild(benchmark::State& state) {
    const auto manifest = synthetic_manifest(static_cast<std::size_t>(state.range(0)), 400);
    for (auto _ : state) benchmark::DoNotOptimize(bugloc::Bm25Index::build(manifest));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IndexBuild)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Search(benchmark::State& state) {
    const auto index = bugloc::Bm25Index::build(synthetic_manifest(static_cast<std::size_t>(state.range(0)), 400));
    const std::string query = "coupon price applied twice in cart_order when stock_cache retry fails";
    for (auto _ : state) benchmark::DoNotOptimize(index.search(query, 10));
}
BENCHMARK(BM_Search)->Arg(100)->Arg(1000)->Arg(5000);

}  // namespace
BENCHMARK_MAIN();
