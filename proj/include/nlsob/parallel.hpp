#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nlsob::parallel {

std::size_t max_threads();
std::size_t num_threads();
void set_num_threads(std::size_t n);

/// Pairwise (tree) sum in index order. The result depends only on the input
/// values, never on the thread count.
double pairwise_sum(std::span<const double> values);

/// Splits [0, n) into fixed chunks of `chunk` indices, evaluates
/// `chunk_sum(begin, end)` for each chunk across the OpenMP team and combines
/// the partials with pairwise_sum. Chunk boundaries do not depend on the thread
/// count, so the result is bit-identical for any team size.
template <class ChunkSum>
double deterministic_sum(std::size_t n, std::size_t chunk, ChunkSum&& chunk_sum)
{
    if (n == 0) {
        return 0.0;
    }
    if (chunk == 0) {
        chunk = 1;
    }
    const std::size_t n_chunks = (n + chunk - 1) / chunk;
    std::vector<double> partials(n_chunks, 0.0);
    const auto count = static_cast<long long>(n_chunks);

#pragma omp parallel for schedule(dynamic, 1)
    for (long long c = 0; c < count; ++c) {
        const std::size_t begin = static_cast<std::size_t>(c) * chunk;
        const std::size_t end = begin + chunk < n ? begin + chunk : n;
        partials[static_cast<std::size_t>(c)] = chunk_sum(begin, end);
    }
    return pairwise_sum(partials);
}

} // namespace nlsob::parallel
