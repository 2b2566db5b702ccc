#pragma once

// Pair quadrature of the non-local functional on a cell-centred lattice:
//
//   sum_{i != j} phi_delta(|v_i - v_j|) * w(x_i - x_j) * cell_volume^2
//
// phi is taken at the cell centres; w is |z|^-(p+d) averaged over the cell of
// offsets centred at x_i - x_j. The plain midpoint value |x_i - x_j|^-(p+d)
// underestimates the near-diagonal mass badly once the kernel transition sits
// a few cells from the diagonal. The diagonal cells (i == j) are excluded.
//
// PairRule::Linearized averages phi over the offset cell instead of taking it
// at the centre, with u(y) - u(x) modelled as linear across the cell. In 1-D
// the slope is the secant through the centre value and the shell
// [(K - 1/2) h, (K + 1/2) h] is integrated in closed form. In 2-D the slope is
// the mean central-difference gradient of the pair, and only cells crossed by
// a kernel jump are integrated finely. Both are exact for affine u and resolve
// the kernel transition below the lattice scale. The rule smears jumps of u,
// so step functions and arbitrary lattice functions use the midpoint rule. pair_functional is the OpenMP
// kernel used everywhere; reference::pair_functional is a direct serial
// transcription kept for testing and benchmarking.

#include "nlsob/function_model.hpp"
#include "nlsob/kernels.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace nlsob {

struct Lattice {
    int dim = 1;
    std::array<int, 2> n{1, 1};
    Point origin{0.0, 0.0};  ///< lower corner of the box
    Point spacing{1.0, 1.0};

    /// grid_n cells per axis covering `box`; values sit at cell centres.
    static Lattice cells(const Box& box, int grid_n);

    std::size_t size() const
    {
        return static_cast<std::size_t>(n[0]) * static_cast<std::size_t>(dim == 2 ? n[1] : 1);
    }
    double cell_volume() const { return dim == 2 ? spacing[0] * spacing[1] : spacing[0]; }
    /// Largest spacing over the axes in use.
    double max_spacing() const;
    Point center(std::size_t index) const;
    /// Same cell layout with every spacing multiplied by `factor`.
    Lattice dilated(double factor) const;
};

/// u at every cell centre, row-major with x fastest.
std::vector<double> sample(const TestFunction& f, const Lattice& lattice);

/// Central differences inside, one-sided at the faces.
std::vector<Point> lattice_gradient(std::span<const double> values, const Lattice& lattice);

/// |z|^-(p+d) averaged over the offset cell centred at (dx h_x, dy h_y); 0 for
/// the zero offset. Closed form in 1-D, composite Gauss-Legendre in 2-D.
double offset_weight(const Lattice& lattice, double p, int dx, int dy = 0);

enum class PairRule { Midpoint, Linearized };

double pair_functional(std::span<const double> values, const Lattice& lattice, const Kernel& k,
                       double p, double delta, PairRule rule = PairRule::Midpoint);

/// Half-open index rectangle [begin, end) per axis.
struct Block {
    std::array<int, 2> begin{0, 0};
    std::array<int, 2> end{1, 1};
};

/// pair_functional(values + shift * 1_block) - pair_functional(values).
/// Pairs inside the block keep their differences, so only block x complement
/// pairs are visited.
double block_shift_delta(std::span<const double> values, const Lattice& lattice, const Kernel& k,
                         double p, double delta, const Block& block, double shift);

namespace reference {

double pair_functional(std::span<const double> values, const Lattice& lattice, const Kernel& k,
                       double p, double delta, PairRule rule = PairRule::Midpoint);

} // namespace reference

} // namespace nlsob
