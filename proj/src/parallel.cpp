#include "nlsob/parallel.hpp"

#include <omp.h>

namespace nlsob::parallel {

std::size_t max_threads()
{
    return static_cast<std::size_t>(omp_get_num_procs());
}

std::size_t num_threads()
{
    return static_cast<std::size_t>(omp_get_max_threads());
}

void set_num_threads(std::size_t n)
{
    omp_set_num_threads(static_cast<int>(n == 0 ? max_threads() : n));
}

double pairwise_sum(std::span<const double> values)
{
    const std::size_t n = values.size();
    if (n == 0) {
        return 0.0;
    }
    if (n <= 8) {
        double s = 0.0;
        for (double v : values) {
            s += v;
        }
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

} // namespace nlsob::parallel
