#pragma once

// Delta sweeps against the Sobolev energy, the band-kernel pathology, and the
// mesh blow-up of step functions.

#include "nlsob/evaluator.hpp"

#include <span>
#include <string>
#include <vector>

namespace nlsob {

struct SweepRow {
    double delta = 0.0;
    double value = 0.0;
    double tail_bound = 0.0;
    double energy = 0.0;
    /// value / energy; NaN when the energy is zero or infinite.
    double ratio = 0.0;
};

struct SweepReport {
    std::vector<SweepRow> rows;
    std::string kernel;
    std::string function;
    double p = 2.0;
    int grid_n = 0;
    Scheme scheme = Scheme::Pair;
    /// max ratio over the rows with a defined ratio (NaN if none).
    double empirical_bound_ratio = 0.0;
};

/// Geometric list 0.4, 0.2, ... down to the smallest delta with h <= delta / 8.
std::vector<double> default_delta_list(double spacing);

/// Smallest grid_n with window extent / grid_n <= delta_min / 8.
int required_grid_n(const Box& window, double delta_min);

/// One row per delta. Throws ResolutionError when the lattice spacing exceeds
/// delta_min / 8, and ParameterError when deltas are not strictly decreasing.
SweepReport delta_sweep(const TestFunction& f, const Kernel& k, const FunctionalParams& params,
                        std::span<const double> deltas, Scheme scheme = Scheme::Pair);

/// u = 1_(0,1) on (-1, 2) with the normalized band kernel 1_[1,2) in d = 1.
/// Every summand vanishes when 1/delta > 2.
SweepReport band_pathology(std::span<const double> deltas, double p = 2.0, int grid_n = 1536);

struct DivergenceRow {
    int n = 0;
    double value = 0.0;
    /// value(n) / value(previous n); 0 for the first row.
    double ratio = 0.0;
};

struct DivergenceTable {
    std::vector<DivergenceRow> rows;
    double p = 2.0;
    double delta = 0.1;
    double threshold = 1.0;
    /// Final doubling ratio exceeds 2^((p-1)/2).
    bool diverging = false;
    bool certified = true;
};

/// Lambda_delta of 1_(0,1) on (-1, 2) with the normalized indicator kernel at
/// increasing lattice sizes. `constant` swaps in u = 1. p = 1 runs in
/// exploration mode.
DivergenceTable step_divergence(double p, double delta, std::span<const int> n_list,
                                bool constant = false);

/// The unit step 1_(0,1) on the bounded interval (-1, 2).
TestFunction unit_step_on_padded_interval();

} // namespace nlsob
