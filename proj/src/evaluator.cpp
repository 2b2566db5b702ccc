#include "nlsob/evaluator.hpp"

#include "nlsob/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace nlsob {

namespace {

double sphere_measure(int d)
{
    return d == 1 ? 2.0 : 2.0 * std::numbers::pi;
}

// Mass of the excluded diagonal cells under the growth bound
// phi_delta(|u(x) - u(y)|) <= A L^(p+1) |x - y|^(p+1) / delta, A = max(a, b).
double diagonal_bound(const TestFunction& f, const Kernel& k, const FunctionalParams& params,
                      const Lattice& lattice, const Box& window)
{
    const double lip = f.lipschitz();
    if (lip == 0.0) {
        return 0.0;
    }
    const double a = std::max(growth_constant(k, params.p), k.b_bound());
    if (!std::isfinite(lip) || !std::isfinite(a)) {
        return kInf;
    }
    // Integral of |x - y|^(1-d) over the diagonal cells: h^2 per cell in 1-D,
    // at most h_x h_y * 2 pi * (cell diagonal) per cell in 2-D.
    double kernel_mass = window.volume();
    if (lattice.dim == 1) {
        kernel_mass *= lattice.spacing[0];
    } else {
        kernel_mass *= 2.0 * std::numbers::pi * std::hypot(lattice.spacing[0], lattice.spacing[1]);
    }
    return a * std::pow(lip, params.p + 1.0) / params.delta * kernel_mass;
}

// Pairs with x in the support and y beyond the window: u(y) = 0, |x - y| >= padding.
double exterior_pair_bound(const Domain& domain, const Kernel& k, const FunctionalParams& params)
{
    if (!domain.whole_space()) {
        return 0.0;
    }
    if (domain.padding <= 0.0 || !std::isfinite(k.b_bound())) {
        return kInf;
    }
    const double p = params.p;
    return 2.0 * std::pow(params.delta, p) * k.b_bound() * domain.box.volume() *
           sphere_measure(domain.dim()) * std::pow(domain.padding, -p) / p;
}

} // namespace

void FunctionalParams::check() const
{
    if (!std::isfinite(p) || p < 1.0 || (p == 1.0 && !exploration)) {
        throw ParameterError("p must exceed 1 (p = 1 only in exploration mode)");
    }
    if (!(std::isfinite(delta) && delta > 0.0)) {
        throw ParameterError("delta must be positive and finite");
    }
    if (grid_n < 16) {
        throw ParameterError("grid_n must be at least 16");
    }
    if (!(std::isfinite(polar_h_max) && polar_h_max > 0.0)) {
        throw ParameterError("polar_h_max must be positive and finite");
    }
    if (polar_h_steps < 1 || polar_angle_steps < 1) {
        throw ParameterError("polar step counts must be positive");
    }
    if (!(polar_tolerance > 0.0)) {
        throw ParameterError("polar_tolerance must be positive");
    }
}

PairRule pair_rule_for(const TestFunction& f, const FunctionalParams& params)
{
    if (params.pair_rule) {
        return *params.pair_rule;
    }
    return f.sobolev() ? PairRule::Linearized : PairRule::Midpoint;
}

double divergence_threshold(double p)
{
    return std::pow(2.0, 0.5 * (p - 1.0));
}

EvalResult lambda_pair(const TestFunction& f, const Kernel& k, const FunctionalParams& params)
{
    params.check();
    const Box window = f.domain().window();
    const Lattice lattice = Lattice::cells(window, params.grid_n);
    const auto values = sample(f, lattice);
    const PairRule rule = pair_rule_for(f, params);

    EvalResult result;
    result.scheme = Scheme::Pair;
    result.certified = params.p > 1.0;
    result.value = pair_functional(values, lattice, k, params.p, params.delta, rule);
    if (params.diagonal == DiagonalPolicy::ExcludeAndBound) {
        result.tail_bound = diagonal_bound(f, k, params, lattice, window);
    }
    result.tail_bound += exterior_pair_bound(f.domain(), k, params);

    if (!f.sobolev() && params.grid_n / 2 >= 16) {
        FunctionalParams coarse = params;
        coarse.grid_n = params.grid_n / 2;
        const Lattice coarse_lattice = Lattice::cells(window, coarse.grid_n);
        const double coarse_value =
            pair_functional(sample(f, coarse_lattice), coarse_lattice, k, params.p, params.delta, rule);
        if (coarse_value > 0.0) {
            result.doubling_ratio = result.value / coarse_value;
        } else {
            result.doubling_ratio = result.value > 0.0 ? kInf : 1.0;
        }
        result.diverging = result.doubling_ratio > divergence_threshold(params.p);
    }
    return result;
}

double scaling_check(const TestFunction& f, const Kernel& k, const FunctionalParams& params)
{
    params.check();
    const Lattice lattice = Lattice::cells(f.domain().window(), params.grid_n);
    const auto values = sample(f, lattice);
    std::vector<double> rescaled(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        rescaled[i] = values[i] / params.delta;
    }
    const PairRule rule = pair_rule_for(f, params);
    const double direct = pair_functional(values, lattice, k, params.p, params.delta, rule);
    const double via_unit =
        std::pow(params.delta, params.p) * pair_functional(rescaled, lattice, k, params.p, 1.0, rule);
    return std::abs(direct - via_unit) / std::max(direct, std::numeric_limits<double>::epsilon());
}

double dilation_check(const TestFunction& f, const Kernel& k, const FunctionalParams& params,
                      double lambda)
{
    params.check();
    if (!(std::isfinite(lambda) && lambda > 0.0)) {
        throw ParameterError("dilation factor must be positive and finite");
    }
    const double scaled_n = lambda * params.grid_n;
    if (std::abs(scaled_n - std::round(scaled_n)) > 1e-9 * scaled_n) {
        throw ParameterError("dilated lattice does not match: lambda * grid_n must be an integer");
    }
    const Lattice lattice = Lattice::cells(f.domain().window(), params.grid_n);
    const Lattice big = lattice.dilated(lambda);
    const auto values = sample(f, lattice);
    std::vector<double> dilated(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        dilated[i] = lambda * values[i];
    }
    const PairRule rule = pair_rule_for(f, params);
    const double lhs = pair_functional(dilated, big, k, params.p, params.delta, rule);
    const double rhs = std::pow(lambda, lattice.dim) *
                       pair_functional(values, lattice, k, params.p, params.delta / lambda, rule);
    return std::abs(lhs - rhs) / std::max(lhs, std::numeric_limits<double>::epsilon());
}

} // namespace nlsob
