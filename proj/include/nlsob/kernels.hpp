#pragma once

// Kernel family phi: [0, inf) -> [0, inf) entering the non-local functional.
//
// Every kernel is `scale * shape(t)`. Shapes are small value types with an
// unscaled `operator()(double t)` so the quadrature loops can be instantiated
// per shape without virtual dispatch (see Kernel::visit).
//
// Jumps are evaluated right-continuously: indicator(1) is 0 on [0, 1) and 1 on
// [1, inf); band(1, 2) is 1 on [1, 2) and 0 elsewhere.

#include <limits>
#include <string>
#include <variant>
#include <vector>

namespace nlsob {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// 1 on [threshold, inf).
struct IndicatorShape {
    double threshold = 1.0;
    double operator()(double t) const noexcept { return t >= threshold ? 1.0 : 0.0; }
};

/// 1 on [lo, hi).
struct BandShape {
    double lo = 1.0;
    double hi = 2.0;
    double operator()(double t) const noexcept { return (t >= lo && t < hi) ? 1.0 : 0.0; }
};

/// a t^(q+1) on [0, 1), b on [1, inf). With q = p this is the majorant built
/// from the growth and boundedness constants of another kernel.
struct EnvelopeShape {
    double a = 1.0;
    double b = 1.0;
    double q = 2.0;
    double operator()(double t) const noexcept;
};

/// t^exponent on [0, cutoff), cutoff^exponent beyond. cutoff may be +inf.
struct PowerCutoffShape {
    double exponent = 3.0;
    double cutoff = kInf;
    double operator()(double t) const noexcept;
};

/// Piecewise linear through (knots[i], values[i]); constant values.back()
/// to the right of the last knot. knots[0] = 0 and values[0] = 0.
struct TabulatedShape {
    std::vector<double> knots;
    std::vector<double> values;
    double operator()(double t) const noexcept;
};

using KernelShape =
    std::variant<IndicatorShape, BandShape, EnvelopeShape, PowerCutoffShape, TabulatedShape>;

class Kernel {
public:
    explicit Kernel(KernelShape shape, double scale = 1.0);

    static Kernel indicator(double scale = 1.0, double threshold = 1.0);
    static Kernel band(double scale = 1.0, double lo = 1.0, double hi = 2.0);
    static Kernel envelope(double a, double b, double q);
    static Kernel power_cutoff(double exponent, double cutoff = kInf, double scale = 1.0);
    static Kernel tabulated(std::vector<double> knots, std::vector<double> values,
                            double scale = 1.0);

    /// phi(t); throws DomainError for t < 0 or NaN.
    double operator()(double t) const;

    /// Calls `f(shape)` with the concrete shape alternative.
    template <class F>
    decltype(auto) visit(F&& f) const
    {
        return std::visit(std::forward<F>(f), shape_);
    }

    const KernelShape& shape() const noexcept { return shape_; }
    double scale() const noexcept { return scale_; }
    /// sup phi, including the scale. +inf for unbounded shapes.
    double b_bound() const noexcept { return b_bound_; }
    bool monotone() const noexcept { return monotone_; }
    /// Jump locations in (0, inf), ascending.
    const std::vector<double>& discontinuities() const noexcept { return jumps_; }

    Kernel with_scale(double scale) const;
    std::string name() const;

private:
    KernelShape shape_;
    double scale_;
    double b_bound_;
    bool monotone_;
    std::vector<double> jumps_;
};

double eval_kernel(const Kernel& k, double t);

/// phi_delta(t) = delta^p phi(t / delta).
double scaled_kernel_eval(const Kernel& k, double p, double delta, double t);

/// Integral of |sigma . e|^p over the unit sphere S^{d-1}, d in {1, 2}.
double gamma_dp(int d, double p);

/// Smallest a with phi(t) <= a t^(p+1) on (0, 1], in closed form. +inf when no
/// such a exists.
double growth_constant(const Kernel& k, double p);

/// Integral of phi(t) t^-(p+1) over (0, inf). Throws ValidationError when it diverges.
double normalization_integral(const Kernel& k, double p);

/// Rescales k so that gamma_dp(d, p) * normalization_integral = 1.
Kernel normalize(const Kernel& k, int d, double p);

/// Non-decreasing majorant a t^(p+1) on [0, 1), max(a, b) beyond, from the
/// growth and boundedness constants a, b of k.
Kernel envelope_of(const Kernel& k, double p);

struct KernelValidationReport {
    bool cond_growth_ok = false;
    double growth_ratio = kInf;  ///< sampled sup of phi(t) / t^(p+1) on (0, 1]
    double growth_constant = kInf;
    bool cond_bounded_ok = false;
    double sup_value = kInf;
    bool cond_monotone_ok = false;
    double normalization_value = kInf;  ///< gamma_{d,p} * integral; +inf if divergent
    bool normalized_ok = false;         ///< |normalization_value - 1| <= 1e-10

    bool all_ok() const noexcept
    {
        return cond_growth_ok && cond_bounded_ok && cond_monotone_ok && normalized_ok;
    }
};

KernelValidationReport validate(const Kernel& k, double p, int d = 1);

} // namespace nlsob
