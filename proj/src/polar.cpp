#include "nlsob/errors.hpp"
#include "nlsob/evaluator.hpp"
#include "nlsob/parallel.hpp"

#include <cmath>
#include <numbers>

namespace nlsob {

namespace {

// int_a^b s^e ds, b may be +inf (requires e < -1 then).
double power_integral(double a, double b, double e)
{
    if (e == -1.0) {
        return std::isfinite(b) ? std::log(b / a) : kInf;
    }
    const double lo = std::pow(a, e + 1.0);
    if (!std::isfinite(b)) {
        return e < -1.0 ? -lo / (e + 1.0) : kInf;
    }
    return (std::pow(b, e + 1.0) - lo) / (e + 1.0);
}

// Base points x outside the window reach the support only for h >= s / delta,
// s = distance to the support box (s >= padding). Each such x contributes at
// most Theta(s) * b (delta / s)^p / p, with Theta(s) the angular size of the
// support seen from x.
double exterior_polar_bound(const Domain& domain, double b, double p, double delta)
{
    if (!domain.whole_space()) {
        return 0.0;
    }
    const double pad = domain.padding;
    if (pad <= 0.0 || !std::isfinite(b) || p <= 1.0) {
        return kInf;
    }
    const double scale = b * std::pow(delta, p) / p;
    if (domain.dim() == 1) {
        return 2.0 * scale * power_integral(pad, kInf, -p);
    }
    const Box& box = domain.box;
    const double perimeter = 2.0 * (box.extent(0) + box.extent(1));
    const double diam = box.diameter();
    const double split = std::max(pad, 0.5 * diam);
    // Theta = 2 pi on [pad, split), pi * diam / s beyond; offset-box perimeter P + 2 pi s.
    const double near = 2.0 * std::numbers::pi *
                        (perimeter * power_integral(pad, split, -p) +
                         2.0 * std::numbers::pi * power_integral(pad, split, 1.0 - p));
    const double far = std::numbers::pi * diam *
                       (perimeter * power_integral(split, kInf, -p - 1.0) +
                        2.0 * std::numbers::pi * power_integral(split, kInf, -p));
    return scale * (near + far);
}

template <class Shape>
double polar_sum(const Shape& shape, const TestFunction& f, const Lattice& lattice,
                 const std::vector<double>& nodes, const std::vector<double>& weights,
                 const std::vector<Point>& directions, const std::vector<double>& direction_weights,
                 double delta)
{
    const double inv = 1.0 / delta;
    const std::size_t n_dir = directions.size();
    return parallel::deterministic_sum(lattice.size(), 16, [&](std::size_t b, std::size_t e) {
        double chunk = 0.0;
        for (std::size_t idx = b; idx < e; ++idx) {
            const Point x = lattice.center(idx);
            const double ux = f.extended(x);
            double radial = 0.0;
            for (std::size_t kh = 0; kh < nodes.size(); ++kh) {
                const double step = delta * nodes[kh];
                double angular = 0.0;
                for (std::size_t m = 0; m < n_dir; ++m) {
                    const Point y{x[0] + step * directions[m][0], x[1] + step * directions[m][1]};
                    angular += direction_weights[m] * shape(std::abs(f.extended(y) - ux) * inv);
                }
                radial += weights[kh] * angular;
            }
            chunk += radial;
        }
        return chunk;
    });
}

} // namespace

EvalResult lambda_polar(const TestFunction& f, const Kernel& k, const FunctionalParams& params)
{
    params.check();
    const Domain& domain = f.domain();
    if (!domain.whole_space() && !params.polar_extend_bounded) {
        throw ContractError(
            "the polar representation holds on R^d; use a whole-space domain or request "
            "the nearest-boundary extension explicitly");
    }
    const double p = params.p;
    const double delta = params.delta;
    const int d = domain.dim();
    const double sphere = d == 1 ? 2.0 : 2.0 * std::numbers::pi;
    const Box window = domain.window();
    const Lattice lattice = Lattice::cells(window, params.grid_n);

    // Head h < h_min: phi(|u(x + delta h sigma) - u(x)| / delta) <= A (L h)^(p+1).
    const double lip = f.lipschitz();
    const double a = std::max(growth_constant(k, p), k.b_bound());
    const double head_rate = a * std::pow(lip, p + 1.0) * sphere * window.volume();
    const double h_max = params.polar_h_max;
    double h_min = h_max * 1e-9;
    double head_bound = kInf;
    if (lip == 0.0) {
        head_bound = 0.0;
    } else if (std::isfinite(head_rate) && head_rate > 0.0) {
        h_min = std::min(params.polar_tolerance / head_rate, h_max * 1e-3);
        head_bound = head_rate * h_min;
    }

    // Geometric cells in h; weights are the exact integrals of h^-(p+1) per cell.
    const int steps = params.polar_h_steps;
    const double log_ratio = std::log(h_max / h_min) / steps;
    std::vector<double> nodes(static_cast<std::size_t>(steps));
    std::vector<double> weights(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        const double lo = h_min * std::exp(log_ratio * i);
        const double hi = i + 1 == steps ? h_max : h_min * std::exp(log_ratio * (i + 1));
        nodes[static_cast<std::size_t>(i)] = std::sqrt(lo * hi);
        weights[static_cast<std::size_t>(i)] = (std::pow(lo, -p) - std::pow(hi, -p)) / p;
    }

    std::vector<Point> directions;
    std::vector<double> direction_weights;
    if (d == 1) {
        directions = {Point{-1.0, 0.0}, Point{1.0, 0.0}};
        direction_weights = {1.0, 1.0};
    } else {
        const int m = params.polar_angle_steps;
        for (int i = 0; i < m; ++i) {
            const double theta = 2.0 * std::numbers::pi * (i + 0.5) / m;
            directions.push_back(Point{std::cos(theta), std::sin(theta)});
            direction_weights.push_back(2.0 * std::numbers::pi / m);
        }
    }

    const double sum = k.visit([&](const auto& shape) {
        return polar_sum(shape, f, lattice, nodes, weights, directions, direction_weights, delta);
    });

    EvalResult result;
    result.scheme = Scheme::Polar;
    result.certified = p > 1.0;
    result.value = k.scale() * sum * lattice.cell_volume();
    const double tail = k.b_bound() * std::pow(h_max, -p) / p * sphere * window.volume();
    result.tail_bound = head_bound + tail + exterior_polar_bound(domain, k.b_bound(), p, delta);
    return result;
}

} // namespace nlsob
