#include "nlsob/pair_kernel.hpp"

#include "nlsob/errors.hpp"
#include "nlsob/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace nlsob {

namespace {

// Rows of the outer index handled by one task. Fixed so the reduction tree
// does not depend on the team size.
constexpr std::size_t kRowChunk = 32;

// Tensor Gauss-Legendre nodes on [-1/2, 1/2].
constexpr std::array<double, 8> kGaussNodes = {
    -0.4801449282487681, -0.3983332387068134, -0.2627662049166902, -0.0917173212478249,
    0.0917173212478249,  0.2627662049166902,  0.3983332387068134,  0.4801449282487681};
constexpr std::array<double, 8> kGaussWeights = {
    0.0506142681451881, 0.1111905172266872, 0.1568533229389436, 0.1813418916891810,
    0.1813418916891810, 0.1568533229389436, 0.1111905172266872, 0.0506142681451881};

double weight_2d(double hx, double hy, double p, int dx, int dy)
{
    const double e = -0.5 * (p + 2.0);
    const int m = std::max(std::abs(dx), std::abs(dy)) <= 4 ? 4 : 1;
    double total = 0.0;
    for (int sy = 0; sy < m; ++sy) {
        for (int sx = 0; sx < m; ++sx) {
            const double cx = dx - 0.5 + (sx + 0.5) / m;
            const double cy = dy - 0.5 + (sy + 0.5) / m;
            for (std::size_t a = 0; a < kGaussNodes.size(); ++a) {
                const double x = (cx + kGaussNodes[a] / m) * hx;
                for (std::size_t b = 0; b < kGaussNodes.size(); ++b) {
                    const double y = (cy + kGaussNodes[b] / m) * hy;
                    total += kGaussWeights[a] * kGaussWeights[b] * std::pow(x * x + y * y, e);
                }
            }
        }
    }
    return total / (m * m);
}

struct WeightKey {
    int dim = 0;
    std::array<int, 2> n{0, 0};
    Point spacing{0.0, 0.0};
    double p = 0.0;
    bool operator==(const WeightKey&) const = default;
};

// Cell-averaged weights indexed by the absolute index offset. 1-D: w[dx];
// 2-D: w[dy * nx + dx]. The optimizer calls this thousands of times on one
// lattice, so the last table is kept per thread.
const std::vector<double>& offset_weights(const Lattice& lat, double p)
{
    thread_local WeightKey cached_key;
    thread_local std::vector<double> cached;
    const WeightKey key{lat.dim, lat.n, lat.spacing, p};
    if (key == cached_key && !cached.empty()) {
        return cached;
    }
    const auto nx = static_cast<std::size_t>(lat.n[0]);
    const auto ny = static_cast<std::size_t>(lat.dim == 2 ? lat.n[1] : 1);
    std::vector<double> w(nx * ny, 0.0);
    for (std::size_t dy = 0; dy < ny; ++dy) {
        for (std::size_t dx = 0; dx < nx; ++dx) {
            if (dx != 0 || dy != 0) {
                w[dy * nx + dx] = offset_weight(lat, p, static_cast<int>(dx), static_cast<int>(dy));
            }
        }
    }
    cached = std::move(w);
    cached_key = key;
    return cached;
}

} // namespace

std::vector<Point> lattice_gradient(std::span<const double> values, const Lattice& lattice)
{
    const int nx = lattice.n[0];
    const int ny = lattice.dim == 2 ? lattice.n[1] : 1;
    std::vector<Point> g(values.size(), Point{0.0, 0.0});
    auto diff = [&](int i, int n, auto at, double h) {
        if (n < 2) {
            return 0.0;
        }
        if (i == 0) {
            return (at(1) - at(0)) / h;
        }
        if (i == n - 1) {
            return (at(n - 1) - at(n - 2)) / h;
        }
        return (at(i + 1) - at(i - 1)) / (2.0 * h);
    };
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            const std::size_t idx = static_cast<std::size_t>(y) * nx + x;
            g[idx][0] = diff(x, nx, [&](int k) { return values[static_cast<std::size_t>(y) * nx + k]; },
                             lattice.spacing[0]);
            if (lattice.dim == 2) {
                g[idx][1] = diff(y, ny, [&](int k) { return values[static_cast<std::size_t>(k) * nx + x]; },
                                 lattice.spacing[1]);
            }
        }
    }
    return g;
}

double offset_weight(const Lattice& lattice, double p, int dx, int dy)
{
    if (lattice.dim == 1) {
        dy = 0;
    }
    if (dx == 0 && dy == 0) {
        return 0.0;
    }
    if (lattice.dim == 2) {
        return weight_2d(lattice.spacing[0], lattice.spacing[1], p, std::abs(dx), std::abs(dy));
    }
    // (1/h) int_{(k-1/2)h}^{(k+1/2)h} r^-(p+1) dr, written to avoid cancellation at large k.
    const double h = lattice.spacing[0];
    const double a = std::abs(dx) - 0.5;
    return -std::pow(a * h, -p) * std::expm1(-p * std::log1p(1.0 / a)) / (p * h);
}

namespace {

// int_A^B s^e ds for 0 < A <= B.
double power_integral(double a, double b, double e)
{
    if (e == -1.0) {
        return std::log(b / a);
    }
    return (std::pow(b, e + 1.0) - std::pow(a, e + 1.0)) / (e + 1.0);
}

// int_A^B shape(s) s^-(p+1) ds for 0 < A < B.
double weighted_integral(const BandShape& s, double a, double b, double p)
{
    const double lo = std::clamp(a, s.lo, s.hi);
    const double hi = std::clamp(b, s.lo, s.hi);
    return hi > lo ? power_integral(lo, hi, -p - 1.0) : 0.0;
}

double weighted_integral(const EnvelopeShape& s, double a, double b, double p)
{
    double total = 0.0;
    if (a < 1.0) {
        total += s.a * power_integral(a, std::min(b, 1.0), s.q - p);
    }
    if (b > 1.0) {
        total += s.b * power_integral(std::max(a, 1.0), b, -p - 1.0);
    }
    return total;
}

double weighted_integral(const PowerCutoffShape& s, double a, double b, double p)
{
    double total = 0.0;
    if (a < s.cutoff) {
        total += power_integral(a, std::min(b, s.cutoff), s.exponent - p - 1.0);
    }
    if (b > s.cutoff) {
        total += std::pow(s.cutoff, s.exponent) * power_integral(std::max(a, s.cutoff), b, -p - 1.0);
    }
    return total;
}

double weighted_integral(const TabulatedShape& s, double a, double b, double p)
{
    double total = 0.0;
    const auto& x = s.knots;
    const auto& y = s.values;
    for (std::size_t i = 1; i < x.size() && x[i - 1] < b; ++i) {
        const double lo = std::max(a, x[i - 1]);
        const double hi = std::min(b, x[i]);
        if (hi <= lo) {
            continue;
        }
        const double slope = (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
        const double icpt = y[i - 1] - slope * x[i - 1];
        total += icpt * power_integral(lo, hi, -p - 1.0) + slope * power_integral(lo, hi, -p);
    }
    if (b > x.back()) {
        total += y.back() * power_integral(std::max(a, x.back()), b, -p - 1.0);
    }
    return total;
}

// Offset shell K covers r in [(K - 1/2) h, (K + 1/2) h]. With u(y) - u(x)
// taken linear in r through the centre value, the shell contributes
//   (1/h) int phi(t r / (K h)) r^-(p+1) dr = t^p pref[K] int_{t lo}^{t hi} phi(s) s^-(p+1) ds.
struct ShellTable {
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<double> pref;
    std::vector<double> full;  ///< (lo^-p - hi^-p) / p
    double p = 2.0;
};

ShellTable shell_table(const Lattice& lat, double p)
{
    const auto n = static_cast<std::size_t>(lat.n[0]);
    const double h = lat.spacing[0];
    ShellTable s;
    s.p = p;
    s.lo.assign(n, 0.0);
    s.hi.assign(n, 0.0);
    s.pref.assign(n, 0.0);
    s.full.assign(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
        const double kk = static_cast<double>(k);
        s.lo[k] = 1.0 - 0.5 / kk;
        s.hi[k] = 1.0 + 0.5 / kk;
        s.pref[k] = std::pow(kk * h, -p) / h;
        s.full[k] = power_integral(s.lo[k], s.hi[k], -p - 1.0);
    }
    return s;
}

template <class Shape>
inline double shell_term(const Shape& shape, double t, std::size_t k, const ShellTable& s)
{
    if (t == 0.0) {
        return 0.0;
    }
    return std::pow(t, s.p) * weighted_integral(shape, t * s.lo[k], t * s.hi[k], s.p);
}

inline double shell_term(const IndicatorShape& shape, double t, std::size_t k, const ShellTable& s)
{
    const double a = t * s.lo[k];
    if (a >= shape.threshold) {
        return s.full[k];
    }
    const double b = t * s.hi[k];
    if (b <= shape.threshold) {
        return 0.0;
    }
    return (std::pow(t / shape.threshold, s.p) - std::pow(s.hi[k], -s.p)) / s.p;
}

template <class Shape>
double linearized_upper_sum(const Shape& shape, std::span<const double> values, const ShellTable& s,
                            double inv)
{
    const double* v = values.data();
    const std::size_t n = values.size();
    return parallel::deterministic_sum(n, kRowChunk, [&](std::size_t b, std::size_t e) {
        double chunk = 0.0;
        for (std::size_t i = b; i < e; ++i) {
            const double vi = v[i];
            double acc[2] = {0.0, 0.0};
            for (std::size_t j = i + 1; j < n; ++j) {
                const std::size_t k = j - i;
                acc[k & 1] += s.pref[k] * shell_term(shape, std::abs(vi - v[j]) * inv, k, s);
            }
            chunk += acc[0] + acc[1];
        }
        return chunk;
    });
}

// 2-D: over the offset cell C centred at z_c the difference is modelled as
// D(z) = D_c + g . (z - z_c) with g the mean lattice gradient of the pair.
// While no kernel jump lies in the range of |D| / delta over C, phi is taken
// at the centre against the cell-averaged weight. Otherwise C is integrated
// along the steeper axis with the cut points of every jump located exactly,
// and the weighted mean of phi over C multiplies the exact weight.
struct Plane {
    double hx = 1.0;
    double hy = 1.0;
    double p = 2.0;
    double delta = 1.0;
    const std::vector<double>* jumps = nullptr;  ///< unscaled jump locations
};

constexpr std::array<double, 4> kGaussNodes4 = {-0.4305681557970263, -0.1699905217924281,
                                                 0.1699905217924281, 0.4305681557970263};
constexpr std::array<double, 4> kGaussWeights4 = {0.1739274225687269, 0.3260725774312731,
                                                   0.3260725774312731, 0.1739274225687269};

template <class Shape, std::size_t N>
double cut_cell_mean(const Shape& shape, const Plane& pl, double dc, double gx, double gy, double cx, double cy,
                     const std::array<double, N>& nodes, const std::array<double, N>& weights)
{
    // Near-ties go to x so that rescaled values pick the same axis.
    const bool along_x = std::abs(gx) * pl.hx >= std::abs(gy) * pl.hy * (1.0 - 1e-9);
    const double gi = along_x ? gx : gy;
    const double go = along_x ? gy : gx;
    const double ci = along_x ? cx : cy;
    const double co = along_x ? cy : cx;
    const double hi = along_x ? pl.hx : pl.hy;
    const double ho = along_x ? pl.hy : pl.hx;
    const double e = -0.5 * (pl.p + 2.0);
    const bool square = pl.p == 2.0;
    const double inv = 1.0 / pl.delta;

    double total = 0.0;
    double mass = 0.0;
    double cuts[8];
    for (std::size_t a = 0; a < N; ++a) {
        const double so = co + nodes[a] * ho;
        // D along the inner axis: base + gi * si.
        const double base = dc + go * (so - co) - gi * ci;
        const double s0 = ci - 0.5 * hi;
        const double s1 = ci + 0.5 * hi;
        int n_cuts = 0;
        cuts[n_cuts++] = s0;
        for (double jump : *pl.jumps) {
            for (double sign : {1.0, -1.0}) {
                const double s = (sign * jump * pl.delta - base) / gi;
                if (s > s0 && s < s1 && n_cuts < 7) {
                    cuts[n_cuts++] = s;
                }
            }
        }
        cuts[n_cuts++] = s1;
        std::sort(cuts + 1, cuts + n_cuts - 1);
        double line = 0.0;
        double line_mass = 0.0;
        for (int piece = 1; piece < n_cuts; ++piece) {
            const double lo = cuts[piece - 1];
            const double len = cuts[piece] - lo;
            if (len <= 0.0) {
                continue;
            }
            double acc = 0.0;
            double acc_mass = 0.0;
            for (std::size_t b = 0; b < N; ++b) {
                const double si = lo + (nodes[b] + 0.5) * len;
                const double zx = along_x ? si : so;
                const double zy = along_x ? so : si;
                const double r2 = zx * zx + zy * zy;
                const double kz = weights[b] * (square ? 1.0 / (r2 * r2) : std::pow(r2, e));
                acc += kz * shape(std::abs(base + gi * si) * inv);
                acc_mass += kz;
            }
            line += acc * len;
            line_mass += acc_mass * len;
        }
        total += weights[a] * line;
        mass += weights[a] * line_mass;
    }
    return total / mass;
}

template <class Shape>
double linearized_plane_sum(const Shape& shape, std::span<const double> values, const Lattice& lat,
                            const std::vector<double>& w, const std::vector<Point>& grad, const Plane& pl)
{
    const int nx = lat.n[0];
    const int ny = lat.n[1];
    const double* v = values.data();
    const double inv = 1.0 / pl.delta;
    const auto& jumps = *pl.jumps;
    double gx_max = 0.0;
    double gy_max = 0.0;
    for (const auto& g : grad) {
        gx_max = std::max(gx_max, std::abs(g[0]));
        gy_max = std::max(gy_max, std::abs(g[1]));
    }
    const double spread_max = 0.5 * (gx_max * pl.hx + gy_max * pl.hy) * inv;
    return parallel::deterministic_sum(values.size(), kRowChunk, [&](std::size_t b, std::size_t e) {
        double chunk = 0.0;
        for (std::size_t idx = b; idx < e; ++idx) {
            const int iy = static_cast<int>(idx) / nx;
            const int ix = static_cast<int>(idx) % nx;
            const double vi = v[idx];
            const Point gi = grad[idx];
            double row = 0.0;
            for (int jy = iy; jy < ny; ++jy) {
                const int dy = jy - iy;
                for (int jx = dy == 0 ? ix + 1 : 0; jx < nx; ++jx) {
                    const int dx = jx - ix;
                    const std::size_t j = static_cast<std::size_t>(jy) * nx + jx;
                    const double dc = v[j] - vi;
                    const double tc = std::abs(dc) * inv;
                    bool near_jump = false;
                    for (double jump : jumps) {
                        near_jump = near_jump || std::abs(tc - jump) < spread_max;
                    }
                    double gx = 0.0;
                    double gy = 0.0;
                    bool straddles = false;
                    if (near_jump) {
                        gx = 0.5 * (gi[0] + grad[j][0]);
                        gy = 0.5 * (gi[1] + grad[j][1]);
                        const double spread = 0.5 * (std::abs(gx) * pl.hx + std::abs(gy) * pl.hy) * inv;
                        for (double jump : jumps) {
                            straddles = straddles || (tc - spread < jump && tc + spread > jump);
                        }
                    }
                    const double wc = w[static_cast<std::size_t>(dy) * nx + std::abs(dx)];
                    if (straddles) {
                        const bool near = std::max(std::abs(dx), dy) <= 4;
                        row += wc * (near ? cut_cell_mean(shape, pl, dc, gx, gy, dx * pl.hx, dy * pl.hy,
                                                          kGaussNodes, kGaussWeights)
                                          : cut_cell_mean(shape, pl, dc, gx, gy, dx * pl.hx, dy * pl.hy,
                                                          kGaussNodes4, kGaussWeights4));
                    } else {
                        row += shape(tc) * wc;
                    }
                }
            }
            chunk += row;
        }
        return chunk;
    });
}

void check_inputs(std::span<const double> values, const Lattice& lat, double p, double delta)
{
    if (values.size() != lat.size()) {
        throw ParameterError("value count does not match the lattice");
    }
    if (!(std::isfinite(p) && p >= 1.0)) {
        throw ParameterError("exponent p must be finite and >= 1");
    }
    if (!(std::isfinite(delta) && delta > 0.0)) {
        throw ParameterError("delta must be positive and finite");
    }
}

// sum_{j in [j0, j1)} shape(|vi - v[j]| * inv) * w[|j - i_col|] with four
// independent accumulators combined in a fixed order.
template <class Shape>
inline double strip_sum(const Shape& shape, double vi, const double* v, const double* w, int i_col,
                        int j0, int j1, double inv)
{
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    int j = j0;
    for (; j + 3 < j1; j += 4) {
        for (int l = 0; l < 4; ++l) {
            const int jj = j + l;
            const int off = jj > i_col ? jj - i_col : i_col - jj;
            acc[l] += shape(std::abs(vi - v[jj]) * inv) * w[off];
        }
    }
    for (int l = 0; j < j1; ++j, ++l) {
        const int off = j > i_col ? j - i_col : i_col - j;
        acc[l] += shape(std::abs(vi - v[j]) * inv) * w[off];
    }
    return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

// Sum over unordered pairs i < j of shape(|v_i - v_j| / delta) * w_ij.
template <class Shape>
double upper_pair_sum(const Shape& shape, std::span<const double> values, const Lattice& lat,
                      const std::vector<double>& w, double inv)
{
    const int nx = lat.n[0];
    const int ny = lat.dim == 2 ? lat.n[1] : 1;
    const double* v = values.data();
    const double* wt = w.data();
    return parallel::deterministic_sum(values.size(), kRowChunk, [&](std::size_t b, std::size_t e) {
        double chunk = 0.0;
        for (std::size_t idx = b; idx < e; ++idx) {
            const int iy = static_cast<int>(idx) / nx;
            const int ix = static_cast<int>(idx) % nx;
            const double vi = v[idx];
            double row = strip_sum(shape, vi, v + static_cast<std::size_t>(iy) * nx, wt, ix, ix + 1, nx, inv);
            for (int jy = iy + 1; jy < ny; ++jy) {
                row += strip_sum(shape, vi, v + static_cast<std::size_t>(jy) * nx,
                                 wt + static_cast<std::size_t>(jy - iy) * nx, ix, 0, nx, inv);
            }
            chunk += row;
        }
        return chunk;
    });
}

} // namespace

Lattice Lattice::cells(const Box& box, int grid_n)
{
    if (grid_n < 1) {
        throw ParameterError("grid_n must be positive");
    }
    Lattice lat;
    lat.dim = box.dim;
    lat.n = {grid_n, box.dim == 2 ? grid_n : 1};
    lat.origin = box.lo;
    lat.spacing = {box.extent(0) / grid_n, box.dim == 2 ? box.extent(1) / grid_n : 1.0};
    return lat;
}

double Lattice::max_spacing() const
{
    return dim == 2 ? std::max(spacing[0], spacing[1]) : spacing[0];
}

Point Lattice::center(std::size_t index) const
{
    const auto nx = static_cast<std::size_t>(n[0]);
    const auto ix = static_cast<double>(index % nx);
    const auto iy = static_cast<double>(index / nx);
    Point x{origin[0] + (ix + 0.5) * spacing[0], 0.0};
    if (dim == 2) {
        x[1] = origin[1] + (iy + 0.5) * spacing[1];
    }
    return x;
}

Lattice Lattice::dilated(double factor) const
{
    Lattice lat = *this;
    for (int i = 0; i < dim; ++i) {
        lat.origin[i] *= factor;
        lat.spacing[i] *= factor;
    }
    return lat;
}

std::vector<double> sample(const TestFunction& f, const Lattice& lattice)
{
    std::vector<double> values(lattice.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = f(lattice.center(i));
    }
    return values;
}

double pair_functional(std::span<const double> values, const Lattice& lattice, const Kernel& k,
                       double p, double delta, PairRule rule)
{
    check_inputs(values, lattice, p, delta);
    if (k.scale() == 0.0 || values.size() < 2) {
        return 0.0;
    }
    const double inv = 1.0 / delta;
    double upper = 0.0;
    if (rule == PairRule::Linearized && lattice.dim == 2) {
        const auto& w = offset_weights(lattice, p);
        const auto grad = lattice_gradient(values, lattice);
        const Plane pl{lattice.spacing[0], lattice.spacing[1], p, delta, &k.discontinuities()};
        upper = k.visit(
            [&](const auto& shape) { return linearized_plane_sum(shape, values, lattice, w, grad, pl); });
    } else if (rule == PairRule::Linearized) {
        const ShellTable s = shell_table(lattice, p);
        upper = k.visit([&](const auto& shape) { return linearized_upper_sum(shape, values, s, inv); });
    } else {
        const auto& w = offset_weights(lattice, p);
        upper = k.visit([&](const auto& shape) { return upper_pair_sum(shape, values, lattice, w, inv); });
    }
    const double cv = lattice.cell_volume();
    return 2.0 * upper * k.scale() * std::pow(delta, p) * cv * cv;
}

double block_shift_delta(std::span<const double> values, const Lattice& lattice, const Kernel& k,
                         double p, double delta, const Block& block, double shift)
{
    check_inputs(values, lattice, p, delta);
    const int nx = lattice.n[0];
    const int ny = lattice.dim == 2 ? lattice.n[1] : 1;
    const int bx0 = block.begin[0];
    const int bx1 = block.end[0];
    const int by0 = lattice.dim == 2 ? block.begin[1] : 0;
    const int by1 = lattice.dim == 2 ? block.end[1] : 1;
    if (bx0 < 0 || bx1 > nx || bx0 >= bx1 || by0 < 0 || by1 > ny || by0 >= by1) {
        throw ParameterError("block lies outside the lattice");
    }
    if (shift == 0.0 || k.scale() == 0.0) {
        return 0.0;
    }
    const auto& w = offset_weights(lattice, p);
    const double inv = 1.0 / delta;
    const double* v = values.data();
    const double* wt = w.data();
    const int bw = bx1 - bx0;
    const auto count = static_cast<std::size_t>(bw) * static_cast<std::size_t>(by1 - by0);

    const double sum = k.visit([&](const auto& shape) {
        return parallel::deterministic_sum(count, 8, [&](std::size_t b, std::size_t e) {
            double chunk = 0.0;
            for (std::size_t m = b; m < e; ++m) {
                const int iy = by0 + static_cast<int>(m) / bw;
                const int ix = bx0 + static_cast<int>(m) % bw;
                const double vi = v[static_cast<std::size_t>(iy) * nx + ix];
                const double moved = vi + shift;
                double row = 0.0;
                for (int jy = 0; jy < ny; ++jy) {
                    const double* vrow = v + static_cast<std::size_t>(jy) * nx;
                    const double* wrow = wt + static_cast<std::size_t>(jy > iy ? jy - iy : iy - jy) * nx;
                    auto strips = [&](int j0, int j1) {
                        return strip_sum(shape, moved, vrow, wrow, ix, j0, j1, inv) -
                               strip_sum(shape, vi, vrow, wrow, ix, j0, j1, inv);
                    };
                    if (jy >= by0 && jy < by1) {
                        row += strips(0, bx0) + strips(bx1, nx);
                    } else {
                        row += strips(0, nx);
                    }
                }
                chunk += row;
            }
            return chunk;
        });
    });
    const double cv = lattice.cell_volume();
    return 2.0 * sum * k.scale() * std::pow(delta, p) * cv * cv;
}

} // namespace nlsob
