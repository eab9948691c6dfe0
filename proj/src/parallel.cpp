#include "xsdist/parallel.hpp"

#include <atomic>
#include <thread>

namespace xsdist {

namespace {
std::atomic<int> g_thread_budget{0};

template <class Partial>
std::vector<Partial> run_blocks_impl(std::size_t n_blocks,
                                     const std::function<Partial(std::size_t)>& block_fn) {
    std::vector<Partial> partials(n_blocks);
    int workers = thread_budget();
    workers = std::min<int>(workers, static_cast<int>(n_blocks));
    if (workers <= 1 || n_blocks <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) partials[b] = block_fn(b);
        return partials;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t b = next.fetch_add(1);
                if (b >= n_blocks) return;
                partials[b] = block_fn(b);
            }
        });
    }
    for (auto& th : pool) th.join();
    return partials;
}
}  // namespace

void set_thread_budget(int threads) { g_thread_budget.store(threads); }

int thread_budget() {
    const int t = g_thread_budget.load();
    if (t > 0) return t;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace detail {

std::vector<double> run_blocks(std::size_t n_blocks,
                               const std::function<double(std::size_t)>& block_fn) {
    return run_blocks_impl<double>(n_blocks, block_fn);
}

std::vector<std::pair<double, double>> run_blocks_pair(
    std::size_t n_blocks,
    const std::function<std::pair<double, double>(std::size_t)>& block_fn) {
    return run_blocks_impl<std::pair<double, double>>(n_blocks, block_fn);
}

double tree_reduce(std::vector<double> partials) {
    // Pairwise reduction in index order: the summation tree depends only on
    // the block count, never on scheduling.
    std::size_t n = partials.size();
    while (n > 1) {
        const std::size_t half = (n + 1) / 2;
        for (std::size_t i = 0; i + half < n; ++i) partials[i] += partials[i + half];
        n = half;
    }
    return partials.empty() ? 0.0 : partials[0];
}

}  // namespace detail

}  // namespace xsdist
