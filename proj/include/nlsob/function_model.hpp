#pragma once

// Domains (axis-aligned boxes in d = 1, 2) and scalar test functions on them.

#include <array>
#include <string>
#include <variant>
#include <vector>

namespace nlsob {

using Point = std::array<double, 2>;

struct Box {
    int dim = 1;
    Point lo{0.0, 0.0};
    Point hi{1.0, 1.0};

    double extent(int axis) const { return hi[axis] - lo[axis]; }
    double volume() const;
    bool contains(const Point& x) const;
    /// Largest axis extent diagonal, sqrt(sum extent^2).
    double diameter() const;
};

enum class DomainFlavor { Bounded, WholeSpace };

/// A bounded box, or R^d represented by the support box of a compactly
/// supported function plus a padding margin (the integration window).
struct Domain {
    Box box;
    DomainFlavor flavor = DomainFlavor::Bounded;
    double padding = 0.0;

    static Domain interval(double lo, double hi);
    static Domain rectangle(Point lo, Point hi);
    static Domain unit_cube(int dim);
    static Domain whole_space(const Box& support, double padding);

    int dim() const { return box.dim; }
    /// The box integrated over: the domain itself, or support + padding.
    Box window() const;
    bool whole_space() const { return flavor == DomainFlavor::WholeSpace; }
};

/// Padding used for whole-space domains: max(1, 10 * delta_max).
double default_padding(double delta_max);

namespace fn {

/// <a, x> + b
struct Affine {
    Point a{1.0, 0.0};
    double b = 0.0;
};

/// d^{-1/2} (x_1 + ... + x_d); unit gradient.
struct CubeProfile {};

/// amplitude * sin(2 pi frequency x_1)
struct Sine {
    double frequency = 1.0;
    double amplitude = 1.0;
};

/// height * max(0, 1 - |x - center| / radius)
struct Tent {
    Point center{0.5, 0.5};
    double radius = 0.5;
    double height = 1.0;
};

/// Piecewise constant in x_1: levels[i] on [jumps[i-1], jumps[i]).
struct Step {
    std::vector<double> jumps;
    std::vector<double> levels;
};

/// Lattice values at origin + k * spacing, row-major (x fastest), evaluated by
/// multilinear interpolation.
struct Grid {
    std::vector<double> values;
    std::array<int, 2> n{0, 1};
    Point origin{0.0, 0.0};
    Point spacing{1.0, 1.0};
};

} // namespace fn

using FunctionKind = std::variant<fn::Affine, fn::CubeProfile, fn::Sine, fn::Tent, fn::Step, fn::Grid>;

class TestFunction {
public:
    TestFunction(FunctionKind kind, Domain domain);

    /// u(x); throws DomainError outside the integration window. On a whole-space
    /// domain u vanishes outside the support box.
    double operator()(const Point& x) const;

    /// u at any point of R^d: zero outside the support box for whole-space
    /// domains, nearest-boundary value for bounded domains.
    double extended(const Point& x) const;

    const FunctionKind& kind() const { return kind_; }
    const Domain& domain() const { return domain_; }
    int dim() const { return domain_.dim(); }

    /// False for step functions (not weakly differentiable across jumps).
    bool sobolev() const;
    /// Global Lipschitz constant (sup |grad u|); +inf for step functions.
    double lipschitz() const;
    std::string name() const;

private:
    double raw(const Point& x) const;

    FunctionKind kind_;
    Domain domain_;
};

double eval_u(const TestFunction& f, const Point& x);

/// Integral over the domain (support box for whole-space) of |grad u|^p.
/// +inf for step functions.
double sobolev_energy(const TestFunction& f, double p);

/// Discrete L^p norm sum |v_i|^p * cell_volume, to the power 1/p.
double lp_norm(const std::vector<double>& v, double cell_volume, double p);

/// Loads lattice values from a CSV (comma or whitespace separated, row-major)
/// or a headerless little-endian float64 binary file.
std::vector<double> load_lattice(const std::string& path, bool binary, std::size_t expected);

} // namespace nlsob
