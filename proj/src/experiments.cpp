#include "nlsob/experiments.hpp"

#include "nlsob/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nlsob {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Lattice spacing must resolve the kernel transition: h <= delta / 8.
constexpr double kResolution = 8.0;

double ratio_of(double value, double energy)
{
    return (std::isfinite(energy) && energy > 0.0) ? value / energy : kNaN;
}

void finish(SweepReport& report)
{
    report.empirical_bound_ratio = kNaN;
    for (const auto& row : report.rows) {
        if (!std::isnan(row.ratio) &&
            (std::isnan(report.empirical_bound_ratio) || row.ratio > report.empirical_bound_ratio)) {
            report.empirical_bound_ratio = row.ratio;
        }
    }
}

} // namespace

std::vector<double> default_delta_list(double spacing)
{
    std::vector<double> deltas;
    for (double delta = 0.4; delta >= kResolution * spacing * (1.0 - 1e-12); delta *= 0.5) {
        deltas.push_back(delta);
    }
    return deltas;
}

int required_grid_n(const Box& window, double delta_min)
{
    double extent = window.extent(0);
    if (window.dim == 2) {
        extent = std::max(extent, window.extent(1));
    }
    return static_cast<int>(std::ceil(extent * kResolution / delta_min - 1e-9));
}

SweepReport delta_sweep(const TestFunction& f, const Kernel& k, const FunctionalParams& params,
                        std::span<const double> deltas, Scheme scheme)
{
    if (deltas.empty()) {
        throw ParameterError("delta list is empty");
    }
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (!(deltas[i] > 0.0) || (i > 0 && !(deltas[i] < deltas[i - 1]))) {
            throw ParameterError("delta list must be positive and strictly decreasing");
        }
    }
    const Box window = f.domain().window();
    const Lattice lattice = Lattice::cells(window, params.grid_n);
    const double delta_min = deltas.back();
    if (lattice.max_spacing() > delta_min / kResolution * (1.0 + 1e-12)) {
        const int needed = required_grid_n(window, delta_min);
        throw ResolutionError("lattice too coarse for delta = " + std::to_string(delta_min) +
                                  ": grid_n must be at least " + std::to_string(needed),
                              needed);
    }

    SweepReport report;
    report.kernel = k.name();
    report.function = f.name();
    report.p = params.p;
    report.grid_n = params.grid_n;
    report.scheme = scheme;
    const double energy = sobolev_energy(f, params.p);
    for (double delta : deltas) {
        FunctionalParams row_params = params;
        row_params.delta = delta;
        const EvalResult r =
            scheme == Scheme::Pair ? lambda_pair(f, k, row_params) : lambda_polar(f, k, row_params);
        report.rows.push_back({delta, r.value, r.tail_bound, energy, ratio_of(r.value, energy)});
    }
    finish(report);
    return report;
}

TestFunction unit_step_on_padded_interval()
{
    return TestFunction(fn::Step{{0.0, 1.0}, {0.0, 1.0, 0.0}}, Domain::interval(-1.0, 2.0));
}

SweepReport band_pathology(std::span<const double> deltas, double p, int grid_n)
{
    std::vector<double> sorted(deltas.begin(), deltas.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    const Kernel k = normalize(Kernel::band(), 1, p);
    const TestFunction f = unit_step_on_padded_interval();
    const Lattice lattice = Lattice::cells(f.domain().window(), grid_n);
    const auto values = sample(f, lattice);

    SweepReport report;
    report.kernel = k.name();
    report.function = "step(1_(0,1) on (-1,2))";
    report.p = p;
    report.grid_n = grid_n;
    for (double delta : sorted) {
        if (!(delta > 0.0)) {
            throw ParameterError("delta must be positive");
        }
        const double value = pair_functional(values, lattice, k, p, delta);
        report.rows.push_back({delta, value, 0.0, kInf, kNaN});
    }
    finish(report);
    return report;
}

DivergenceTable step_divergence(double p, double delta, std::span<const int> n_list, bool constant)
{
    if (n_list.empty()) {
        throw ParameterError("grid size list is empty");
    }
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        if (n_list[i] < 16 || (i > 0 && n_list[i] <= n_list[i - 1])) {
            throw ParameterError("grid sizes must be >= 16 and strictly increasing");
        }
    }
    FunctionalParams params;
    params.p = p;
    params.delta = delta;
    params.exploration = p == 1.0;
    params.check();

    const Kernel k = normalize(Kernel::indicator(), 1, p);
    const TestFunction f = constant
                               ? TestFunction(fn::Step{{}, {1.0}}, Domain::interval(-1.0, 2.0))
                               : unit_step_on_padded_interval();

    DivergenceTable table;
    table.p = p;
    table.delta = delta;
    table.threshold = divergence_threshold(p);
    table.certified = p > 1.0;
    double previous = 0.0;
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        const Lattice lattice = Lattice::cells(f.domain().window(), n_list[i]);
        const double value = pair_functional(sample(f, lattice), lattice, k, p, delta);
        double ratio = 0.0;
        if (i > 0) {
            ratio = previous > 0.0 ? value / previous : (value > 0.0 ? kInf : 1.0);
        }
        table.rows.push_back({n_list[i], value, ratio});
        previous = value;
    }
    table.diverging = table.rows.size() > 1 && table.rows.back().ratio > table.threshold;
    return table;
}

} // namespace nlsob
