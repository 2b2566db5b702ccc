#pragma once

// Numerical probes of the Gamma-limit constant kappa: the infimum of
// liminf Lambda_delta(v_delta, Q) over families v_delta -> U in L^p(Q).
//
// kappa_estimate fixes delta and the lattice and minimizes Lambda_delta over
// lattice functions v with ||v - g||_p <= epsilon. The result is an upper
// bound on the discretized infimum, not kappa itself.

#include "nlsob/evaluator.hpp"
#include "nlsob/experiments.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nlsob {

struct KappaProblem {
    int d = 1;
    double p = 2.0;
    Kernel kernel = Kernel::indicator();
    double delta = 0.05;
    int grid_n = 2048;
    /// The box is (0, side)^d and the target is g = slope * U.
    double side = 1.0;
    double slope = 1.0;
    /// L^p proximity budget; unset selects 0.1 * ||g||_p.
    std::optional<double> epsilon;
    int iterations = 2000;
    int restarts = 5;
    /// Initial pattern step; <= 0 selects delta / 2.
    double initial_step = 0.0;
    /// The step is reset and the block halved once the step falls below
    /// initial_step * min_step_ratio.
    double min_step_ratio = 1.0 / 16.0;
    std::uint64_t seed = 1;
};

struct KappaTracePoint {
    int iteration = 0;  ///< global index across restarts
    int restart = 0;
    double objective = 0.0;  ///< incumbent of the current restart
    double best = 0.0;       ///< best so far over all restarts
    double proximity = 0.0;  ///< ||v - g||_p of the incumbent
};

struct KappaReport {
    /// Best Lambda_delta(v) found, recomputed from scratch on the best v.
    double objective = 0.0;
    /// objective / (slope^p side^d): the estimate on the scale of kappa.
    double kappa_hat = 0.0;
    double baseline = 0.0;  ///< Lambda_delta(g, box)
    double proximity = 0.0;
    double epsilon = 0.0;
    int best_restart = 0;
    int accepted_moves = 0;
    std::uint64_t seed = 0;
    /// 0 < kappa_hat <= 1 + kKappaTolerance.
    bool in_range = false;
    std::vector<KappaTracePoint> trace;
    std::vector<double> best_values;
};

inline constexpr double kKappaTolerance = 0.02;

KappaReport kappa_estimate(const KappaProblem& problem);

struct RecoveryReport {
    SweepReport sweep;
    /// Max of Lambda_delta(f) over the (up to) three smallest deltas.
    double limsup_proxy = 0.0;
    double limit_energy = 0.0;
};

/// Evaluates the trivial recovery family g_delta = f.
RecoveryReport recovery_upper_bound(const TestFunction& f, const Kernel& k, double p,
                                    std::span<const double> deltas, int grid_n);

/// A family g_delta = g + perturbation(delta) with ||perturbation||_p <= budget(delta).
struct PerturbationFamily {
    std::string name;
    std::function<std::vector<double>(double delta, const Lattice& lattice)> perturbation;
    std::function<double(double delta)> budget;
};

PerturbationFamily constant_family();

/// amplitude_factor * delta^2 * sawtooth(x_1 / (period_factor * delta)).
/// budget(delta) is the sup norm; the probe scales it by |window|^(1/p).
PerturbationFamily sawtooth_family(double amplitude_factor, double period_factor);

struct LowerBoundRow {
    double delta = 0.0;
    double value = 0.0;
    double proximity = 0.0;
};

struct FamilyProbe {
    std::string name;
    std::vector<LowerBoundRow> rows;
    double min_value = 0.0;
    /// min_value >= kappa_hat * energy - tolerance. A false flag means the
    /// kappa_hat upper bound is loose, nothing more.
    bool consistent = true;
};

struct LowerBoundReport {
    double kappa_hat = 0.0;
    double energy = 0.0;
    double tolerance = 0.0;
    std::vector<FamilyProbe> families;
};

LowerBoundReport lower_bound_probe(const TestFunction& g, std::span<const PerturbationFamily> families,
                                   const Kernel& k, double p, std::span<const double> deltas,
                                   int grid_n, double kappa_hat, double tolerance);

} // namespace nlsob
