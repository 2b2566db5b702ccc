#include "nlsob/pair_kernel.hpp"

#include "nlsob/errors.hpp"

#include <algorithm>
#include <cmath>
#include <variant>

#include <boost/math/quadrature/gauss.hpp>

namespace nlsob::reference {

namespace {

// Points where phi is not smooth, unscaled.
std::vector<double> breakpoints(const Kernel& k)
{
    std::vector<double> out = k.discontinuities();
    if (std::holds_alternative<EnvelopeShape>(k.shape())) {
        out.push_back(1.0);
    } else if (const auto* c = std::get_if<PowerCutoffShape>(&k.shape())) {
        if (std::isfinite(c->cutoff)) {
            out.push_back(c->cutoff);
        }
    } else if (const auto* t = std::get_if<TabulatedShape>(&k.shape())) {
        out.insert(out.end(), t->knots.begin(), t->knots.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

// (1/h) int_shell phi_delta(diff * r / (K h)) r^-(p+1) dr by Gauss-Legendre on
// the smooth pieces of the shell.
double shell_average(const Kernel& k, const std::vector<double>& kinks, double p, double delta,
                     double diff, int offset, double h)
{
    const double centre = offset * h;
    const double lo = (offset - 0.5) * h;
    const double hi = (offset + 0.5) * h;
    std::vector<double> cuts{lo};
    if (diff > 0.0) {
        for (double s : kinks) {
            const double r = s * delta * centre / diff;
            if (r > lo && r < hi) {
                cuts.push_back(r);
            }
        }
    }
    cuts.push_back(hi);
    auto integrand = [&](double r) {
        return scaled_kernel_eval(k, p, delta, diff * r / centre) * std::pow(r, -p - 1.0);
    };
    double total = 0.0;
    for (std::size_t i = 1; i < cuts.size(); ++i) {
        total += boost::math::quadrature::gauss<double, 30>::integrate(integrand, cuts[i - 1], cuts[i]);
    }
    return total / h;
}

// Cell average of phi_delta(|dc + g . (z - z_c)|) |z|^-(p+2) by an s x s
// midpoint rule.
double plane_average(const Kernel& k, double p, double delta, double dc, const Point& g, double cx,
                     double cy, double hx, double hy, int s)
{
    double total = 0.0;
    for (int a = 0; a < s; ++a) {
        const double ox = ((a + 0.5) / s - 0.5) * hx;
        for (int b = 0; b < s; ++b) {
            const double oy = ((b + 0.5) / s - 0.5) * hy;
            const double diff = std::abs(dc + g[0] * ox + g[1] * oy);
            total += scaled_kernel_eval(k, p, delta, diff) *
                     std::pow(std::hypot(cx + ox, cy + oy), -(p + 2.0));
        }
    }
    return total / (s * s);
}

} // namespace

// Every ordered pair, offsets recovered from cell-centre coordinates, kernel
// through scaled_kernel_eval. No symmetry, tables, or threading.
double pair_functional(std::span<const double> values, const Lattice& lattice, const Kernel& k,
                       double p, double delta, PairRule rule)
{
    if (values.size() != lattice.size()) {
        throw ParameterError("value count does not match the lattice");
    }
    const double cv = lattice.cell_volume();
    const auto kinks = breakpoints(k);
    const auto grad = lattice_gradient(values, lattice);
    long double total = 0.0L;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const Point xi = lattice.center(i);
        for (std::size_t j = 0; j < values.size(); ++j) {
            if (i == j) {
                continue;
            }
            const Point xj = lattice.center(j);
            const auto dx = static_cast<int>(std::lround((xj[0] - xi[0]) / lattice.spacing[0]));
            const auto dy = static_cast<int>(std::lround((xj[1] - xi[1]) / lattice.spacing[1]));
            const double diff = std::abs(values[i] - values[j]);
            double term = 0.0;
            if (rule == PairRule::Linearized && lattice.dim == 2) {
                const Point g{0.5 * (grad[i][0] + grad[j][0]), 0.5 * (grad[i][1] + grad[j][1])};
                term = plane_average(k, p, delta, values[j] - values[i], g, xj[0] - xi[0], xj[1] - xi[1],
                                     lattice.spacing[0], lattice.spacing[1], 48);
            } else if (rule == PairRule::Linearized) {
                term = shell_average(k, kinks, p, delta, diff, std::abs(dx), lattice.spacing[0]);
            } else {
                term = scaled_kernel_eval(k, p, delta, diff) * offset_weight(lattice, p, dx, dy);
            }
            total += static_cast<long double>(term);
        }
    }
    return static_cast<double>(total) * cv * cv;
}

} // namespace nlsob::reference
