#include "nlsob/kernels.hpp"

#include "nlsob/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/tanh_sinh.hpp>

namespace nlsob {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& what)
{
    if (!ok) {
        throw ParameterError(what);
    }
}

void check_shape(const KernelShape& shape)
{
    std::visit(
        overloaded{
            [](const IndicatorShape& s) {
                require(std::isfinite(s.threshold) && s.threshold > 0.0,
                        "indicator threshold must be positive and finite");
            },
            [](const BandShape& s) {
                require(std::isfinite(s.lo) && s.lo > 0.0, "band lower edge must be positive");
                require(std::isfinite(s.hi) && s.hi > s.lo, "band upper edge must exceed lower edge");
            },
            [](const EnvelopeShape& s) {
                require(std::isfinite(s.a) && s.a >= 0.0, "envelope a must be >= 0");
                require(std::isfinite(s.b) && s.b >= 0.0, "envelope b must be >= 0");
                require(std::isfinite(s.q) && s.q > -1.0, "envelope exponent must exceed -1");
            },
            [](const PowerCutoffShape& s) {
                require(std::isfinite(s.exponent) && s.exponent > 0.0,
                        "power-cutoff exponent must be positive");
                require(s.cutoff > 0.0, "power-cutoff cutoff must be positive");
            },
            [](const TabulatedShape& s) {
                require(s.knots.size() >= 2, "tabulated kernel needs at least two knots");
                require(s.knots.size() == s.values.size(),
                        "tabulated kernel needs as many values as knots");
                require(s.knots.front() == 0.0, "tabulated kernel must start at t = 0");
                require(s.values.front() == 0.0, "tabulated kernel must vanish at t = 0");
                for (std::size_t i = 1; i < s.knots.size(); ++i) {
                    require(std::isfinite(s.knots[i]) && s.knots[i] > s.knots[i - 1],
                            "tabulated knots must be strictly increasing");
                }
                for (double v : s.values) {
                    require(std::isfinite(v) && v >= 0.0, "tabulated values must be >= 0");
                }
            },
        },
        shape);
}

double unscaled_sup(const KernelShape& shape)
{
    return std::visit(
        overloaded{
            [](const IndicatorShape&) { return 1.0; },
            [](const BandShape&) { return 1.0; },
            [](const EnvelopeShape& s) { return std::max(s.a, s.b); },
            [](const PowerCutoffShape& s) {
                return std::isfinite(s.cutoff) ? std::pow(s.cutoff, s.exponent) : kInf;
            },
            [](const TabulatedShape& s) { return *std::max_element(s.values.begin(), s.values.end()); },
        },
        shape);
}

bool shape_monotone(const KernelShape& shape)
{
    return std::visit(
        overloaded{
            [](const IndicatorShape&) { return true; },
            [](const BandShape&) { return false; },
            [](const EnvelopeShape& s) { return s.a <= s.b; },
            [](const PowerCutoffShape&) { return true; },
            [](const TabulatedShape& s) { return std::is_sorted(s.values.begin(), s.values.end()); },
        },
        shape);
}

std::vector<double> shape_jumps(const KernelShape& shape)
{
    return std::visit(
        overloaded{
            [](const IndicatorShape& s) { return std::vector<double>{s.threshold}; },
            [](const BandShape& s) { return std::vector<double>{s.lo, s.hi}; },
            [](const EnvelopeShape& s) {
                return s.a != s.b ? std::vector<double>{1.0} : std::vector<double>{};
            },
            [](const PowerCutoffShape&) { return std::vector<double>{}; },
            [](const TabulatedShape&) { return std::vector<double>{}; },
        },
        shape);
}

void check_p(double p)
{
    if (!(std::isfinite(p) && p >= 1.0)) {
        throw ParameterError("exponent p must be finite and >= 1");
    }
}

// Integral of (alpha + beta t) t^-(p+1) over [t0, t1], 0 < t0 < t1 <= inf.
double linear_piece_moment(double alpha, double beta, double t0, double t1, double p)
{
    const double lo_pow = std::pow(t0, -p);
    const double hi_pow = std::isfinite(t1) ? std::pow(t1, -p) : 0.0;
    double result = alpha * (lo_pow - hi_pow) / p;
    if (beta != 0.0) {
        if (!std::isfinite(t1)) {
            return kInf;
        }
        if (p == 1.0) {
            result += beta * std::log(t1 / t0);
        } else {
            result += beta * (std::pow(t1, 1.0 - p) - std::pow(t0, 1.0 - p)) / (1.0 - p);
        }
    }
    return result;
}

} // namespace

double EnvelopeShape::operator()(double t) const noexcept
{
    return t < 1.0 ? a * std::pow(t, q + 1.0) : b;
}

double PowerCutoffShape::operator()(double t) const noexcept
{
    return std::pow(std::min(t, cutoff), exponent);
}

double TabulatedShape::operator()(double t) const noexcept
{
    if (t >= knots.back()) {
        return values.back();
    }
    const auto it = std::upper_bound(knots.begin(), knots.end(), t);
    const auto i = static_cast<std::size_t>(it - knots.begin());
    const double t0 = knots[i - 1];
    const double t1 = knots[i];
    const double w = (t - t0) / (t1 - t0);
    return values[i - 1] + w * (values[i] - values[i - 1]);
}

Kernel::Kernel(KernelShape shape, double scale) : shape_(std::move(shape)), scale_(scale)
{
    check_shape(shape_);
    if (!(std::isfinite(scale_) && scale_ >= 0.0)) {
        throw ParameterError("kernel scale must be finite and >= 0");
    }
    b_bound_ = scale_ == 0.0 ? 0.0 : scale_ * unscaled_sup(shape_);
    monotone_ = shape_monotone(shape_);
    jumps_ = shape_jumps(shape_);
}

Kernel Kernel::indicator(double scale, double threshold)
{
    return Kernel(IndicatorShape{threshold}, scale);
}

Kernel Kernel::band(double scale, double lo, double hi)
{
    return Kernel(BandShape{lo, hi}, scale);
}

Kernel Kernel::envelope(double a, double b, double q)
{
    return Kernel(EnvelopeShape{a, b, q}, 1.0);
}

Kernel Kernel::power_cutoff(double exponent, double cutoff, double scale)
{
    return Kernel(PowerCutoffShape{exponent, cutoff}, scale);
}

Kernel Kernel::tabulated(std::vector<double> knots, std::vector<double> values, double scale)
{
    return Kernel(TabulatedShape{std::move(knots), std::move(values)}, scale);
}

double Kernel::operator()(double t) const
{
    if (!(t >= 0.0)) {
        throw DomainError("kernel argument must be >= 0");
    }
    return scale_ * std::visit([t](const auto& s) { return s(t); }, shape_);
}

Kernel Kernel::with_scale(double scale) const
{
    return Kernel(shape_, scale);
}

std::string Kernel::name() const
{
    std::ostringstream os;
    os.precision(17);
    std::visit(overloaded{
                   [&](const IndicatorShape& s) { os << "indicator(threshold=" << s.threshold; },
                   [&](const BandShape& s) { os << "band(lo=" << s.lo << ",hi=" << s.hi; },
                   [&](const EnvelopeShape& s) {
                       os << "envelope(a=" << s.a << ",b=" << s.b << ",q=" << s.q;
                   },
                   [&](const PowerCutoffShape& s) {
                       os << "power-cutoff(exponent=" << s.exponent << ",cutoff=" << s.cutoff;
                   },
                   [&](const TabulatedShape& s) { os << "tabulated(knots=" << s.knots.size(); },
               },
               shape_);
    os << ",c=" << scale_ << ")";
    return os.str();
}

double eval_kernel(const Kernel& k, double t)
{
    return k(t);
}

double scaled_kernel_eval(const Kernel& k, double p, double delta, double t)
{
    check_p(p);
    if (!(std::isfinite(delta) && delta > 0.0)) {
        throw ParameterError("delta must be positive and finite");
    }
    if (!(t >= 0.0)) {
        throw DomainError("kernel argument must be >= 0");
    }
    return std::pow(delta, p) * k(t / delta);
}

double gamma_dp(int d, double p)
{
    check_p(p);
    if (d == 1) {
        return 2.0;
    }
    if (d != 2) {
        throw ParameterError("gamma_dp supports d = 1 and d = 2 only");
    }
    // 4 * int_0^{pi/2} sin^p; the sin form keeps the endpoint behaviour at 0.
    boost::math::quadrature::tanh_sinh<double> integrator;
    const double quarter = integrator.integrate(
        [p](double theta) { return std::pow(std::sin(theta), p); }, 0.0,
        std::numbers::pi / 2.0, 1e-14);
    return 4.0 * quarter;
}

double growth_constant(const Kernel& k, double p)
{
    check_p(p);
    if (k.scale() == 0.0) {
        return 0.0;
    }
    const double unscaled = k.visit(overloaded{
        [p](const IndicatorShape& s) {
            return s.threshold > 1.0 ? 0.0 : std::pow(s.threshold, -(p + 1.0));
        },
        [p](const BandShape& s) { return s.lo > 1.0 ? 0.0 : std::pow(s.lo, -(p + 1.0)); },
        [p](const EnvelopeShape& s) {
            if (s.a == 0.0) {
                return s.b;
            }
            return s.q >= p ? std::max(s.a, s.b) : kInf;
        },
        [p](const PowerCutoffShape& s) {
            if (s.exponent < p + 1.0) {
                return kInf;
            }
            return std::pow(std::min(1.0, s.cutoff), s.exponent - p - 1.0);
        },
        [p](const TabulatedShape& s) {
            // Each linear piece alpha + beta t has ratio (alpha + beta t) t^-(p+1),
            // maximised at an endpoint or at t* = -(p+1) alpha / (p beta).
            auto ratio = [p](double v, double t) { return v * std::pow(t, -(p + 1.0)); };
            double best = 0.0;
            for (std::size_t i = 1; i < s.knots.size(); ++i) {
                const double t0 = s.knots[i - 1];
                if (t0 >= 1.0) {
                    break;
                }
                const double t1 = std::min(s.knots[i], 1.0);
                const double beta = (s.values[i] - s.values[i - 1]) / (s.knots[i] - t0);
                const double alpha = s.values[i - 1] - beta * t0;
                if (t0 == 0.0) {
                    if (beta != 0.0) {
                        return kInf;
                    }
                    continue;
                }
                best = std::max({best, ratio(alpha + beta * t0, t0), ratio(alpha + beta * t1, t1)});
                if (beta != 0.0) {
                    const double t_star = -(p + 1.0) * alpha / (p * beta);
                    if (t_star > t0 && t_star < t1) {
                        best = std::max(best, ratio(alpha + beta * t_star, t_star));
                    }
                }
            }
            if (s.knots.back() < 1.0) {
                best = std::max(best, ratio(s.values.back(), s.knots.back()));
            }
            return best;
        },
    });
    return k.scale() * unscaled;
}

double normalization_integral(const Kernel& k, double p)
{
    check_p(p);
    if (k.scale() == 0.0) {
        return 0.0;
    }
    const double unscaled = k.visit(overloaded{
        [p](const IndicatorShape& s) { return std::pow(s.threshold, -p) / p; },
        [p](const BandShape& s) { return (std::pow(s.lo, -p) - std::pow(s.hi, -p)) / p; },
        [p](const EnvelopeShape& s) {
            double head = 0.0;
            if (s.a > 0.0) {
                if (s.q - p <= -1.0) {
                    return kInf;
                }
                head = s.a / (s.q - p + 1.0);
            }
            return head + s.b / p;
        },
        [p](const PowerCutoffShape& s) {
            if (s.exponent <= p || !std::isfinite(s.cutoff)) {
                return kInf;
            }
            const double scale = std::pow(s.cutoff, s.exponent - p);
            return scale / (s.exponent - p) + scale / p;
        },
        [p](const TabulatedShape& s) {
            // Piecewise closed form on each linear segment plus the exact
            // constant tail values.back() * T^-p / p.
            double total = 0.0;
            for (std::size_t i = 1; i < s.knots.size(); ++i) {
                const double t0 = s.knots[i - 1];
                const double t1 = s.knots[i];
                const double beta = (s.values[i] - s.values[i - 1]) / (t1 - t0);
                const double alpha = s.values[i - 1] - beta * t0;
                if (t0 == 0.0) {
                    if (beta != 0.0) {
                        return kInf;
                    }
                    continue;
                }
                total += linear_piece_moment(alpha, beta, t0, t1, p);
            }
            return total + linear_piece_moment(s.values.back(), 0.0, s.knots.back(), kInf, p);
        },
    });
    if (!std::isfinite(unscaled)) {
        throw ValidationError("normalization integral diverges for kernel " + k.name());
    }
    return k.scale() * unscaled;
}

Kernel normalize(const Kernel& k, int d, double p)
{
    double integral = 0.0;
    try {
        integral = normalization_integral(k, p);
    } catch (const ValidationError& e) {
        throw NormalizationError(e.what());
    }
    if (!(integral > 0.0)) {
        throw NormalizationError("cannot normalize a kernel with zero integral");
    }
    const double total = gamma_dp(d, p) * integral;
    return k.with_scale(k.scale() / total);
}

Kernel envelope_of(const Kernel& k, double p)
{
    const double a = growth_constant(k, p);
    const double b = k.b_bound();
    if (!std::isfinite(a) || !std::isfinite(b)) {
        throw ValidationError("envelope needs finite growth and boundedness constants");
    }
    // b is raised to a when needed so the majorant is non-decreasing across t = 1.
    return Kernel::envelope(a, std::max(a, b), p);
}

KernelValidationReport validate(const Kernel& k, double p, int d)
{
    check_p(p);
    KernelValidationReport report;

    // Growth: geometric grid on (0, 1] plus both sides of every jump.
    std::vector<double> growth_samples;
    for (int i = 0; i <= 160; ++i) {
        growth_samples.push_back(std::exp2(-0.25 * i));
    }
    for (double jump : k.discontinuities()) {
        if (jump <= 1.0) {
            growth_samples.push_back(jump);
            growth_samples.push_back(std::nextafter(jump, 0.0));
        }
    }
    if (const auto* tab = std::get_if<TabulatedShape>(&k.shape())) {
        for (double knot : tab->knots) {
            if (knot > 0.0 && knot <= 1.0) {
                growth_samples.push_back(knot);
            }
        }
    }
    double ratio = 0.0;
    for (double t : growth_samples) {
        ratio = std::max(ratio, k(t) / std::pow(t, p + 1.0));
    }
    report.growth_ratio = ratio;
    report.growth_constant = growth_constant(k, p);
    report.cond_growth_ok = std::isfinite(report.growth_constant) &&
                            ratio <= report.growth_constant * (1.0 + 1e-9) + 1e-300;

    // Monotonicity: dense grid over the region where the shape varies, plus
    // left-limit samples at every jump.
    double horizon = 1.0;
    for (double jump : k.discontinuities()) {
        horizon = std::max(horizon, jump);
    }
    k.visit(overloaded{
        [&](const PowerCutoffShape& s) {
            if (std::isfinite(s.cutoff)) {
                horizon = std::max(horizon, s.cutoff);
            }
        },
        [&](const TabulatedShape& s) { horizon = std::max(horizon, s.knots.back()); },
        [](const auto&) {},
    });
    horizon *= 2.0;
    std::vector<double> dense;
    constexpr int kDense = 20000;
    for (int i = 0; i <= kDense; ++i) {
        dense.push_back(horizon * i / kDense);
    }
    for (double jump : k.discontinuities()) {
        dense.push_back(jump);
        dense.push_back(std::nextafter(jump, 0.0));
    }
    std::sort(dense.begin(), dense.end());
    bool monotone = true;
    double sup_sampled = 0.0;
    double previous = k(dense.front());
    for (double t : dense) {
        const double v = k(t);
        sup_sampled = std::max(sup_sampled, v);
        if (v < previous) {
            monotone = false;
        }
        previous = v;
    }
    report.cond_monotone_ok = monotone;

    report.cond_bounded_ok = std::isfinite(k.b_bound());
    report.sup_value = report.cond_bounded_ok ? std::max(k.b_bound(), sup_sampled) : kInf;

    try {
        report.normalization_value = gamma_dp(d, p) * normalization_integral(k, p);
    } catch (const ValidationError&) {
        report.normalization_value = kInf;
    }
    report.normalized_ok = std::abs(report.normalization_value - 1.0) <= 1e-10;
    return report;
}

} // namespace nlsob
