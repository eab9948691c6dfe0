#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace xsdist {

/// Worker cap for block-parallel loops (0 = hardware default).
void set_thread_budget(int threads);
int thread_budget();

namespace detail {
std::vector<double> run_blocks(std::size_t n_blocks,
                               const std::function<double(std::size_t)>& block_fn);
std::vector<std::pair<double, double>> run_blocks_pair(
    std::size_t n_blocks,
    const std::function<std::pair<double, double>(std::size_t)>& block_fn);
double tree_reduce(std::vector<double> partials);
}  // namespace detail

/// Sums per_item(i) for i in [0, n) over fixed-size blocks. Block partials
/// are combined by pairwise tree reduction in index order, so the result is
/// bit-identical for any worker count.
template <class F>
double block_sum(std::size_t n, F&& per_item, std::size_t block_size = 1024) {
    if (n == 0) return 0.0;
    const std::size_t n_blocks = (n + block_size - 1) / block_size;
    auto partials = detail::run_blocks(n_blocks, [&](std::size_t b) {
        const std::size_t lo = b * block_size;
        const std::size_t hi = std::min(n, lo + block_size);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += per_item(i);
        return s;
    });
    return detail::tree_reduce(std::move(partials));
}

/// One-pass (sum x_i, sum x_i^2) with the same deterministic reduction.
template <class F>
std::pair<double, double> block_sum_sq(std::size_t n, F&& per_item,
                                       std::size_t block_size = 1024) {
    if (n == 0) return {0.0, 0.0};
    const std::size_t n_blocks = (n + block_size - 1) / block_size;
    auto partials = detail::run_blocks_pair(n_blocks, [&](std::size_t b) {
        const std::size_t lo = b * block_size;
        const std::size_t hi = std::min(n, lo + block_size);
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            const double v = per_item(i);
            s += v;
            s2 += v * v;
        }
        return std::pair{s, s2};
    });
    std::vector<double> sums(partials.size()), sqs(partials.size());
    for (std::size_t i = 0; i < partials.size(); ++i) {
        sums[i] = partials[i].first;
        sqs[i] = partials[i].second;
    }
    return {detail::tree_reduce(std::move(sums)), detail::tree_reduce(std::move(sqs))};
}

}  // namespace xsdist
