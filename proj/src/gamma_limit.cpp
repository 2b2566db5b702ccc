#include "nlsob/gamma_limit.hpp"

#include "nlsob/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace nlsob {

namespace {

std::vector<Block> tile(const Lattice& lat, int size)
{
    std::vector<Block> blocks;
    const int nx = lat.n[0];
    const int ny = lat.dim == 2 ? lat.n[1] : 1;
    const int sy = lat.dim == 2 ? size : 1;
    for (int y = 0; y < ny; y += sy) {
        for (int x = 0; x < nx; x += size) {
            blocks.push_back(Block{{x, y}, {std::min(x + size, nx), std::min(y + sy, ny)}});
        }
    }
    return blocks;
}

void apply_shift(std::vector<double>& v, const Lattice& lat, const Block& b, double shift)
{
    const auto nx = static_cast<std::size_t>(lat.n[0]);
    const int y1 = lat.dim == 2 ? b.end[1] : 1;
    const int y0 = lat.dim == 2 ? b.begin[1] : 0;
    for (int y = y0; y < y1; ++y) {
        for (int x = b.begin[0]; x < b.end[0]; ++x) {
            v[static_cast<std::size_t>(y) * nx + static_cast<std::size_t>(x)] += shift;
        }
    }
}

double distance(const std::vector<double>& v, const std::vector<double>& target, double cv, double p)
{
    std::vector<double> diff(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        diff[i] = v[i] - target[i];
    }
    return lp_norm(diff, cv, p);
}

// Radial retraction onto the ball ||v - target||_p <= epsilon.
void retract(std::vector<double>& v, const std::vector<double>& target, double current, double epsilon)
{
    const double factor = epsilon / current * (1.0 - 1e-12);
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = target[i] + factor * (v[i] - target[i]);
    }
}

} // namespace

KappaReport kappa_estimate(const KappaProblem& problem)
{
    const double p = problem.p;
    const double delta = problem.delta;
    if (problem.d != 1 && problem.d != 2) {
        throw ParameterError("kappa estimation supports d = 1 and d = 2");
    }
    if (!(std::isfinite(p) && p > 1.0)) {
        throw ParameterError("kappa estimation needs p > 1");
    }
    if (!(std::isfinite(delta) && delta > 0.0)) {
        throw ParameterError("delta must be positive and finite");
    }
    if (problem.grid_n < 16) {
        throw ParameterError("grid_n must be at least 16");
    }
    if (!(problem.side > 0.0) || !(problem.slope > 0.0)) {
        throw ParameterError("side and slope must be positive");
    }
    if (problem.iterations < 0 || problem.restarts < 1) {
        throw ParameterError("iterations must be >= 0 and restarts >= 1");
    }
    if (problem.epsilon && !(std::isfinite(*problem.epsilon) && *problem.epsilon >= 0.0)) {
        throw ParameterError("epsilon must be finite and positive");
    }
    if (problem.epsilon && *problem.epsilon == 0.0 && problem.iterations > 0) {
        throw ParameterError("epsilon = 0 leaves no room for perturbations; set iterations = 0 or epsilon > 0");
    }

    const Box box{problem.d, {0.0, 0.0}, {problem.side, problem.side}};
    const Lattice lat = Lattice::cells(box, problem.grid_n);
    if (lat.max_spacing() > delta / 8.0 * (1.0 + 1e-12)) {
        const int needed = static_cast<int>(std::ceil(problem.side * 8.0 / delta - 1e-9));
        throw ResolutionError("lattice too coarse for delta: grid_n must be at least " +
                                  std::to_string(needed),
                              needed);
    }
    const double a = problem.slope / std::sqrt(static_cast<double>(problem.d));
    const Domain domain = problem.d == 1 ? Domain::interval(0.0, problem.side)
                                         : Domain::rectangle({0.0, 0.0}, {problem.side, problem.side});
    const TestFunction g(fn::Affine{{a, a}, 0.0}, domain);
    const std::vector<double> target = sample(g, lat);
    const double cv = lat.cell_volume();
    const Kernel& k = problem.kernel;

    KappaReport report;
    report.seed = problem.seed;
    report.epsilon = problem.epsilon ? *problem.epsilon : 0.1 * lp_norm(target, cv, p);
    report.baseline = pair_functional(target, lat, k, p, delta);

    const double step0 = problem.initial_step > 0.0 ? problem.initial_step : 0.5 * delta;
    const double min_step = step0 * problem.min_step_ratio;
    const int restarts = problem.iterations == 0 ? 1 : problem.restarts;

    std::mt19937_64 rng(problem.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    double best = std::numeric_limits<double>::infinity();
    std::vector<double> best_values = target;
    int global_iteration = 0;

    for (int r = 0; r < restarts; ++r) {
        std::vector<double> v = target;
        if (r > 0) {
            // Staircase start: quantize g to levels of height s < delta.
            const double s = delta * (0.5 + 0.45 * unit(rng));
            const double phase = s * unit(rng);
            for (std::size_t i = 0; i < v.size(); ++i) {
                v[i] = s * (std::floor((target[i] + phase) / s) + 0.5) - phase;
            }
        }
        double proximity = distance(v, target, cv, p);
        if (proximity > report.epsilon) {
            retract(v, target, proximity, report.epsilon);
            proximity = distance(v, target, cv, p);
        }
        double objective = r == 0 ? report.baseline : pair_functional(v, lat, k, p, delta);
        if (objective < best) {
            best = objective;
            best_values = v;
            report.best_restart = r;
        }

        int block_size = std::max(1, problem.grid_n / 8);
        double step = step0;
        std::vector<Block> blocks = tile(lat, block_size);
        std::vector<std::size_t> order(blocks.size());
        std::size_t cursor = order.size();
        bool cycle_success = false;

        for (int it = 0; it < problem.iterations; ++it, ++global_iteration) {
            if (cursor == order.size()) {
                if (it > 0 && !cycle_success) {
                    step *= 0.5;
                    if (step < min_step && block_size > 1) {
                        block_size = std::max(1, block_size / 2);
                        blocks = tile(lat, block_size);
                        order.resize(blocks.size());
                        step = step0;
                    }
                }
                std::iota(order.begin(), order.end(), std::size_t{0});
                std::shuffle(order.begin(), order.end(), rng);
                cursor = 0;
                cycle_success = false;
            }
            const Block& block = blocks[order[cursor++]];

            for (double direction : {1.0, -1.0}) {
                const double shift = direction * step;
                const double change = block_shift_delta(v, lat, k, p, delta, block, shift);
                if (!(change < -1e-13 * objective)) {
                    continue;
                }
                std::vector<double> candidate = v;
                apply_shift(candidate, lat, block, shift);
                const double candidate_distance = distance(candidate, target, cv, p);
                if (candidate_distance <= report.epsilon) {
                    v = std::move(candidate);
                    objective += change;
                    proximity = candidate_distance;
                } else {
                    retract(candidate, target, candidate_distance, report.epsilon);
                    const double projected = pair_functional(candidate, lat, k, p, delta);
                    if (!(projected < objective * (1.0 - 1e-13))) {
                        continue;
                    }
                    v = std::move(candidate);
                    objective = projected;
                    proximity = distance(v, target, cv, p);
                }
                cycle_success = true;
                ++report.accepted_moves;
                break;
            }

            if (objective < best) {
                best = objective;
                best_values = v;
                report.best_restart = r;
            }
            report.trace.push_back({global_iteration, r, objective, best, proximity});
        }
    }

    report.best_values = std::move(best_values);
    report.objective = pair_functional(report.best_values, lat, k, p, delta);
    report.proximity = distance(report.best_values, target, cv, p);
    report.kappa_hat = report.objective / (std::pow(problem.slope, p) * box.volume());
    report.in_range = report.kappa_hat > 0.0 && report.kappa_hat <= 1.0 + kKappaTolerance;
    return report;
}

RecoveryReport recovery_upper_bound(const TestFunction& f, const Kernel& k, double p,
                                    std::span<const double> deltas, int grid_n)
{
    FunctionalParams params;
    params.p = p;
    params.grid_n = grid_n;
    RecoveryReport report;
    report.sweep = delta_sweep(f, k, params, deltas);
    report.limit_energy = sobolev_energy(f, p);
    const auto& rows = report.sweep.rows;
    const std::size_t first = rows.size() > 3 ? rows.size() - 3 : 0;
    for (std::size_t i = first; i < rows.size(); ++i) {
        report.limsup_proxy = std::max(report.limsup_proxy, rows[i].value);
    }
    return report;
}

PerturbationFamily constant_family()
{
    return PerturbationFamily{
        "constant",
        [](double, const Lattice& lat) { return std::vector<double>(lat.size(), 0.0); },
        [](double) { return 0.0; },
    };
}

PerturbationFamily sawtooth_family(double amplitude_factor, double period_factor)
{
    if (!(period_factor > 0.0) || !std::isfinite(amplitude_factor)) {
        throw ParameterError("sawtooth family needs a positive period factor and finite amplitude");
    }
    return PerturbationFamily{
        "sawtooth",
        [=](double delta, const Lattice& lat) {
            const double amplitude = amplitude_factor * delta * delta;
            const double period = period_factor * delta;
            std::vector<double> out(lat.size());
            for (std::size_t i = 0; i < out.size(); ++i) {
                const double t = lat.center(i)[0] / period;
                out[i] = amplitude * 2.0 * (t - std::floor(t + 0.5));
            }
            return out;
        },
        // Sup-norm bound; the probe multiplies by |window|^(1/p).
        [=](double delta) { return std::abs(amplitude_factor) * delta * delta; },
    };
}

LowerBoundReport lower_bound_probe(const TestFunction& g, std::span<const PerturbationFamily> families,
                                   const Kernel& k, double p, std::span<const double> deltas,
                                   int grid_n, double kappa_hat, double tolerance)
{
    if (deltas.empty()) {
        throw ParameterError("delta list is empty");
    }
    for (std::size_t i = 1; i < deltas.size(); ++i) {
        if (!(deltas[i] < deltas[i - 1])) {
            throw ParameterError("delta list must be strictly decreasing");
        }
    }
    const Box window = g.domain().window();
    const Lattice lat = Lattice::cells(window, grid_n);
    const auto base = sample(g, lat);
    const double volume_factor = std::pow(window.volume(), 1.0 / p);

    LowerBoundReport report;
    report.kappa_hat = kappa_hat;
    report.energy = sobolev_energy(g, p);
    report.tolerance = tolerance;

    for (const auto& family : families) {
        FamilyProbe probe;
        probe.name = family.name;
        probe.min_value = std::numeric_limits<double>::infinity();
        double previous_budget = std::numeric_limits<double>::infinity();
        for (double delta : deltas) {
            const double budget = family.budget(delta) * volume_factor;
            if (budget > previous_budget) {
                throw ParameterError("family '" + family.name +
                                     "' does not shrink its proximity budget as delta decreases");
            }
            previous_budget = budget;
            const auto perturbation = family.perturbation(delta, lat);
            if (perturbation.size() != base.size()) {
                throw ParameterError("family '" + family.name + "' returned a mis-sized perturbation");
            }
            const double proximity = lp_norm(perturbation, lat.cell_volume(), p);
            if (proximity > budget * (1.0 + 1e-12)) {
                throw ParameterError("family '" + family.name + "' violates its proximity schedule");
            }
            std::vector<double> v(base.size());
            for (std::size_t i = 0; i < v.size(); ++i) {
                v[i] = base[i] + perturbation[i];
            }
            const double value = pair_functional(v, lat, k, p, delta);
            probe.rows.push_back({delta, value, proximity});
            probe.min_value = std::min(probe.min_value, value);
        }
        probe.consistent = probe.min_value >= kappa_hat * report.energy - tolerance;
        report.families.push_back(std::move(probe));
    }
    return report;
}

} // namespace nlsob
