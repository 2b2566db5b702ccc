#include "nlsob/function_model.hpp"

#include "nlsob/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace nlsob {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm(const Point& v, int dim)
{
    return dim == 1 ? std::abs(v[0]) : std::hypot(v[0], v[1]);
}

void check_box(const Box& box)
{
    if (box.dim != 1 && box.dim != 2) {
        throw ParameterError("only d = 1 and d = 2 are supported");
    }
    for (int i = 0; i < box.dim; ++i) {
        if (!(std::isfinite(box.lo[i]) && std::isfinite(box.hi[i]) && box.lo[i] < box.hi[i])) {
            throw ParameterError("domain bounds must satisfy lo < hi");
        }
    }
}

// Interpolation weight in [0, 1] and base index for coordinate x on a lattice.
std::pair<int, double> lattice_locate(double x, double origin, double h, int n)
{
    if (n == 1) {
        return {0, 0.0};
    }
    double s = (x - origin) / h;
    s = std::clamp(s, 0.0, static_cast<double>(n - 1));
    int i = static_cast<int>(std::floor(s));
    if (i >= n - 1) {
        i = n - 2;
    }
    return {i, s - i};
}

} // namespace

double Box::volume() const
{
    double v = 1.0;
    for (int i = 0; i < dim; ++i) {
        v *= extent(i);
    }
    return v;
}

bool Box::contains(const Point& x) const
{
    for (int i = 0; i < dim; ++i) {
        if (x[i] < lo[i] || x[i] > hi[i]) {
            return false;
        }
    }
    return true;
}

double Box::diameter() const
{
    double s = 0.0;
    for (int i = 0; i < dim; ++i) {
        s += extent(i) * extent(i);
    }
    return std::sqrt(s);
}

Domain Domain::interval(double lo, double hi)
{
    Domain d;
    d.box = Box{1, {lo, 0.0}, {hi, 1.0}};
    check_box(d.box);
    return d;
}

Domain Domain::rectangle(Point lo, Point hi)
{
    Domain d;
    d.box = Box{2, lo, hi};
    check_box(d.box);
    return d;
}

Domain Domain::unit_cube(int dim)
{
    Domain d;
    d.box = Box{dim, {0.0, 0.0}, {1.0, 1.0}};
    check_box(d.box);
    return d;
}

Domain Domain::whole_space(const Box& support, double padding)
{
    check_box(support);
    if (!(std::isfinite(padding) && padding >= 0.0)) {
        throw ParameterError("whole-space padding must be finite and >= 0");
    }
    Domain d;
    d.box = support;
    d.flavor = DomainFlavor::WholeSpace;
    d.padding = padding;
    return d;
}

Box Domain::window() const
{
    Box w = box;
    if (flavor == DomainFlavor::WholeSpace) {
        for (int i = 0; i < w.dim; ++i) {
            w.lo[i] -= padding;
            w.hi[i] += padding;
        }
    }
    return w;
}

double default_padding(double delta_max)
{
    return std::max(1.0, 10.0 * delta_max);
}

TestFunction::TestFunction(FunctionKind kind, Domain domain)
    : kind_(std::move(kind)), domain_(std::move(domain))
{
    check_box(domain_.box);
    std::visit(overloaded{
                   [](const fn::Sine& s) {
                       if (!std::isfinite(s.frequency) || !std::isfinite(s.amplitude)) {
                           throw ParameterError("sine parameters must be finite");
                       }
                   },
                   [](const fn::Tent& t) {
                       if (!(t.radius > 0.0) || !std::isfinite(t.height)) {
                           throw ParameterError("tent needs a positive radius and finite height");
                       }
                   },
                   [](const fn::Step& s) {
                       if (s.levels.size() != s.jumps.size() + 1) {
                           throw ParameterError("step needs one more level than jump locations");
                       }
                       if (!std::is_sorted(s.jumps.begin(), s.jumps.end())) {
                           throw ParameterError("step jump locations must be ascending");
                       }
                   },
                   [this](const fn::Grid& g) {
                       const int dim = domain_.dim();
                       const std::size_t count =
                           static_cast<std::size_t>(g.n[0]) * static_cast<std::size_t>(dim == 2 ? g.n[1] : 1);
                       if (g.n[0] < 2 || (dim == 2 && g.n[1] < 2)) {
                           throw ParameterError("grid function needs at least two lattice points per axis");
                       }
                       if (g.values.size() != count) {
                           throw ParameterError("grid function value count does not match lattice size");
                       }
                       for (int i = 0; i < dim; ++i) {
                           if (!(g.spacing[i] > 0.0)) {
                               throw ParameterError("grid spacing must be positive");
                           }
                           const double last = g.origin[i] + (g.n[i] - 1) * g.spacing[i];
                           const double tol = 1e-9 * g.spacing[i];
                           if (domain_.box.lo[i] < g.origin[i] - tol || domain_.box.hi[i] > last + tol) {
                               throw ParameterError("domain must lie inside the lattice of a grid function");
                           }
                       }
                   },
                   [](const auto&) {},
               },
               kind_);
}

double TestFunction::raw(const Point& x) const
{
    const int dim = domain_.dim();
    return std::visit(
        overloaded{
            [&](const fn::Affine& a) {
                double v = a.b + a.a[0] * x[0];
                if (dim == 2) {
                    v += a.a[1] * x[1];
                }
                return v;
            },
            [&](const fn::CubeProfile&) {
                const double s = dim == 2 ? x[0] + x[1] : x[0];
                return s / std::sqrt(static_cast<double>(dim));
            },
            [&](const fn::Sine& s) {
                return s.amplitude * std::sin(2.0 * std::numbers::pi * s.frequency * x[0]);
            },
            [&](const fn::Tent& t) {
                const Point offset{x[0] - t.center[0], x[1] - t.center[1]};
                return t.height * std::max(0.0, 1.0 - norm(offset, dim) / t.radius);
            },
            [&](const fn::Step& s) {
                const auto it = std::upper_bound(s.jumps.begin(), s.jumps.end(), x[0]);
                return s.levels[static_cast<std::size_t>(it - s.jumps.begin())];
            },
            [&](const fn::Grid& g) {
                const auto [i, wx] = lattice_locate(x[0], g.origin[0], g.spacing[0], g.n[0]);
                if (dim == 1) {
                    const auto ui = static_cast<std::size_t>(i);
                    return (1.0 - wx) * g.values[ui] + wx * g.values[ui + 1];
                }
                const auto [j, wy] = lattice_locate(x[1], g.origin[1], g.spacing[1], g.n[1]);
                const auto nx = static_cast<std::size_t>(g.n[0]);
                const std::size_t base = static_cast<std::size_t>(j) * nx + static_cast<std::size_t>(i);
                const double bottom = (1.0 - wx) * g.values[base] + wx * g.values[base + 1];
                const double top = (1.0 - wx) * g.values[base + nx] + wx * g.values[base + nx + 1];
                return (1.0 - wy) * bottom + wy * top;
            },
        },
        kind_);
}

double TestFunction::operator()(const Point& x) const
{
    if (!domain_.window().contains(x)) {
        throw DomainError("point outside the integration window");
    }
    if (domain_.whole_space() && !domain_.box.contains(x)) {
        return 0.0;
    }
    return raw(x);
}

double TestFunction::extended(const Point& x) const
{
    if (domain_.whole_space()) {
        return domain_.box.contains(x) ? raw(x) : 0.0;
    }
    Point clamped = x;
    for (int i = 0; i < domain_.dim(); ++i) {
        clamped[i] = std::clamp(x[i], domain_.box.lo[i], domain_.box.hi[i]);
    }
    return raw(clamped);
}

bool TestFunction::sobolev() const
{
    if (const auto* s = std::get_if<fn::Step>(&kind_)) {
        return std::all_of(s->levels.begin(), s->levels.end(),
                           [&](double v) { return v == s->levels.front(); });
    }
    return true;
}

double TestFunction::lipschitz() const
{
    const int dim = domain_.dim();
    return std::visit(
        overloaded{
            [&](const fn::Affine& a) { return norm(a.a, dim); },
            [](const fn::CubeProfile&) { return 1.0; },
            [](const fn::Sine& s) { return std::abs(s.amplitude * 2.0 * std::numbers::pi * s.frequency); },
            [](const fn::Tent& t) { return std::abs(t.height) / t.radius; },
            [this](const fn::Step&) { return sobolev() ? 0.0 : kInf; },
            [&](const fn::Grid& g) {
                const auto nx = static_cast<std::size_t>(g.n[0]);
                const auto ny = static_cast<std::size_t>(dim == 2 ? g.n[1] : 1);
                double gx = 0.0;
                double gy = 0.0;
                for (std::size_t j = 0; j < ny; ++j) {
                    for (std::size_t i = 0; i < nx; ++i) {
                        const double v = g.values[j * nx + i];
                        if (i + 1 < nx) {
                            gx = std::max(gx, std::abs(g.values[j * nx + i + 1] - v) / g.spacing[0]);
                        }
                        if (j + 1 < ny) {
                            gy = std::max(gy, std::abs(g.values[(j + 1) * nx + i] - v) / g.spacing[1]);
                        }
                    }
                }
                return std::hypot(gx, gy);
            },
        },
        kind_);
}

std::string TestFunction::name() const
{
    std::ostringstream os;
    os.precision(17);
    std::visit(overloaded{
                   [&](const fn::Affine& a) {
                       os << "affine(a=" << a.a[0];
                       if (dim() == 2) {
                           os << "," << a.a[1];
                       }
                       os << ",b=" << a.b << ")";
                   },
                   [&](const fn::CubeProfile&) { os << "cube-profile"; },
                   [&](const fn::Sine& s) {
                       os << "sine(frequency=" << s.frequency << ",amplitude=" << s.amplitude << ")";
                   },
                   [&](const fn::Tent& t) {
                       os << "tent(radius=" << t.radius << ",height=" << t.height << ")";
                   },
                   [&](const fn::Step& s) { os << "step(jumps=" << s.jumps.size() << ")"; },
                   [&](const fn::Grid& g) { os << "grid(" << g.n[0] << "x" << g.n[1] << ")"; },
               },
               kind_);
    return os.str();
}

double eval_u(const TestFunction& f, const Point& x)
{
    return f(x);
}

double sobolev_energy(const TestFunction& f, double p)
{
    if (!(std::isfinite(p) && p >= 1.0)) {
        throw ParameterError("exponent p must be finite and >= 1");
    }
    const Box& box = f.domain().box;
    const int dim = f.dim();
    return std::visit(
        overloaded{
            [&](const fn::Affine& a) { return std::pow(norm(a.a, dim), p) * box.volume(); },
            [&](const fn::CubeProfile&) { return box.volume(); },
            [&](const fn::Sine& s) {
                const double omega = 2.0 * std::numbers::pi * s.frequency;
                if (omega == 0.0 || s.amplitude == 0.0) {
                    return 0.0;
                }
                // |cos|^p is smooth between consecutive zeros of cos(omega x);
                // integrate piece by piece.
                const double f_abs = std::abs(s.frequency);
                std::vector<double> cuts{box.lo[0]};
                const double first = std::ceil(2.0 * f_abs * box.lo[0] - 0.5);
                for (double k = first;; k += 1.0) {
                    const double zero = (k + 0.5) / (2.0 * f_abs);
                    if (zero >= box.hi[0]) {
                        break;
                    }
                    if (zero > box.lo[0]) {
                        cuts.push_back(zero);
                    }
                }
                cuts.push_back(box.hi[0]);
                auto integrand = [&](double x) { return std::pow(std::abs(std::cos(omega * x)), p); };
                double total = 0.0;
                for (std::size_t i = 1; i < cuts.size(); ++i) {
                    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                        integrand, cuts[i - 1], cuts[i], 15, 1e-13);
                }
                const double transverse = dim == 2 ? box.extent(1) : 1.0;
                return std::pow(std::abs(s.amplitude * omega), p) * total * transverse;
            },
            [&](const fn::Tent& t) {
                for (int i = 0; i < dim; ++i) {
                    if (t.center[i] - t.radius < box.lo[i] || t.center[i] + t.radius > box.hi[i]) {
                        throw ParameterError("tent support must lie inside the domain box");
                    }
                }
                const double slope = std::abs(t.height) / t.radius;
                const double support = dim == 1 ? 2.0 * t.radius : std::numbers::pi * t.radius * t.radius;
                return std::pow(slope, p) * support;
            },
            [&](const fn::Step&) { return f.sobolev() ? 0.0 : kInf; },
            [&](const fn::Grid& g) {
                // Central differences inside, one-sided on faces, trapezoid weights.
                const int nx = g.n[0];
                const int ny = dim == 2 ? g.n[1] : 1;
                auto at = [&](int i, int j) {
                    return g.values[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) +
                                    static_cast<std::size_t>(i)];
                };
                auto derivative = [](double minus, double centre, double plus, int i, int n, double h) {
                    if (i == 0) {
                        return (plus - centre) / h;
                    }
                    if (i == n - 1) {
                        return (centre - minus) / h;
                    }
                    return (plus - minus) / (2.0 * h);
                };
                double total = 0.0;
                for (int j = 0; j < ny; ++j) {
                    const double wy = dim == 1 ? 1.0 : ((j == 0 || j == ny - 1) ? 0.5 : 1.0) * g.spacing[1];
                    for (int i = 0; i < nx; ++i) {
                        const double wx = ((i == 0 || i == nx - 1) ? 0.5 : 1.0) * g.spacing[0];
                        const double c = at(i, j);
                        const double gx = derivative(i > 0 ? at(i - 1, j) : c, c,
                                                     i + 1 < nx ? at(i + 1, j) : c, i, nx, g.spacing[0]);
                        double gy = 0.0;
                        if (dim == 2) {
                            gy = derivative(j > 0 ? at(i, j - 1) : c, c, j + 1 < ny ? at(i, j + 1) : c, j,
                                            ny, g.spacing[1]);
                        }
                        total += wx * wy * std::pow(std::hypot(gx, gy), p);
                    }
                }
                return total;
            },
        },
        f.kind());
}

double lp_norm(const std::vector<double>& v, double cell_volume, double p)
{
    double s = 0.0;
    for (double x : v) {
        s += std::pow(std::abs(x), p);
    }
    return std::pow(s * cell_volume, 1.0 / p);
}

std::vector<double> load_lattice(const std::string& path, bool binary, std::size_t expected)
{
    std::vector<double> values;
    if (binary) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw ParameterError("cannot open lattice file " + path);
        }
        std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (bytes.size() % sizeof(double) != 0) {
            throw ParameterError("binary lattice file size is not a multiple of 8 bytes: " + path);
        }
        values.resize(bytes.size() / sizeof(double));
        std::memcpy(values.data(), bytes.data(), bytes.size());
    } else {
        std::ifstream in(path);
        if (!in) {
            throw ParameterError("cannot open lattice file " + path);
        }
        std::string token;
        std::string line;
        while (std::getline(in, line)) {
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream ls(line);
            while (ls >> token) {
                try {
                    values.push_back(std::stod(token));
                } catch (const std::exception&) {
                    throw ParameterError("malformed number '" + token + "' in " + path);
                }
            }
        }
    }
    if (values.size() != expected) {
        throw ParameterError("lattice file " + path + " holds " + std::to_string(values.size()) +
                             " values, expected " + std::to_string(expected));
    }
    return values;
}

} // namespace nlsob
