#pragma once

// Two independent evaluations of
//
//   Lambda_delta(u, Omega) = int int phi_delta(|u(x) - u(y)|) / |x - y|^(p+d) dx dy,
//
// a pair quadrature of the double integral and a quadrature of its polar form
//
//   int dx int_0^inf dh int_{S^{d-1}} phi(|u(x + delta h sigma) - u(x)| / delta) h^-(p+1) dsigma,
//
// which holds on R^d.

#include "nlsob/function_model.hpp"
#include "nlsob/kernels.hpp"
#include "nlsob/pair_kernel.hpp"

#include <optional>

namespace nlsob {

enum class DiagonalPolicy { ExcludeCell, ExcludeAndBound };
enum class Scheme { Pair, Polar };

struct FunctionalParams {
    double p = 2.0;
    double delta = 0.1;
    int grid_n = 256;
    DiagonalPolicy diagonal = DiagonalPolicy::ExcludeAndBound;
    double polar_h_max = 100.0;
    int polar_h_steps = 2000;
    int polar_angle_steps = 64;
    /// Budget for the omitted head h < h_min of the polar h-integral.
    double polar_tolerance = 1e-6;
    /// Allows p = 1; such results are not certified.
    bool exploration = false;
    /// Runs the polar scheme on a bounded domain, extending u by its
    /// nearest-boundary value.
    bool polar_extend_bounded = false;
    /// Unset picks PairRule::Linearized for Sobolev functions and
    /// PairRule::Midpoint otherwise.
    std::optional<PairRule> pair_rule;

    void check() const;
};

struct EvalResult {
    double value = 0.0;
    /// Certified bound on the mass left out by the scheme (diagonal cells,
    /// exterior of the window, polar head and tail). +inf when no bound applies.
    double tail_bound = 0.0;
    Scheme scheme = Scheme::Pair;
    /// Set for non-Sobolev functions when the value grows under mesh doubling
    /// faster than 2^((p-1)/2).
    bool diverging = false;
    double doubling_ratio = 0.0;
    bool certified = true;
};

PairRule pair_rule_for(const TestFunction& f, const FunctionalParams& params);

/// Relative growth threshold separating jump behaviour from convergence.
double divergence_threshold(double p);

EvalResult lambda_pair(const TestFunction& f, const Kernel& k, const FunctionalParams& params);

/// Throws ContractError on a bounded domain unless polar_extend_bounded is set.
EvalResult lambda_polar(const TestFunction& f, const Kernel& k, const FunctionalParams& params);

/// |Lambda_delta(u) - delta^p Lambda_1(u / delta)| / max(Lambda_delta(u), eps),
/// both sides on the same pair lattice.
double scaling_check(const TestFunction& f, const Kernel& k, const FunctionalParams& params);

/// Relative discrepancy between Lambda_delta(u_l, l S) and l^d Lambda_{delta/l}(u, S)
/// where u_l(x) = l u(x / l), on lattices mapped cell to cell.
double dilation_check(const TestFunction& f, const Kernel& k, const FunctionalParams& params,
                      double lambda);

} // namespace nlsob
