#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace fpph {

// Worker cap: FPP_THREADS env var, else hardware concurrency.
inline int max_threads() {
    if (const char* env = std::getenv("FPP_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs fn(i) for i in [0, n). Each index is independent and results must be
// written to index-addressed slots, so scheduling cannot change the output.
template <class Fn>
void parallel_for_index(int n, Fn&& fn) {
    int workers = std::min(max_threads(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

struct MeanStderr {
    double mean = 0;
    double stderr_ = 0;
};

inline MeanStderr mean_stderr(std::span<const double> xs) {
    MeanStderr out;
    if (xs.empty()) return out;
    double sum = 0;
    for (double x : xs) sum += x;
    out.mean = sum / static_cast<double>(xs.size());
    if (xs.size() >= 2) {
        double ss = 0;
        for (double x : xs) ss += (x - out.mean) * (x - out.mean);
        double var = ss / static_cast<double>(xs.size() - 1);
        out.stderr_ = std::sqrt(var / static_cast<double>(xs.size()));
    }
    return out;
}

// FNV-1a, for stable content hashes in result records.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace fpph
