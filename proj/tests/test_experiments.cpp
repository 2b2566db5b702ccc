#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nlsob/errors.hpp"
#include "nlsob/experiments.hpp"

#include <cmath>

using namespace nlsob;

namespace {

Kernel unit_indicator(double p = 2.0)
{
    return normalize(Kernel::indicator(), 1, p);
}

const TestFunction kAffine(fn::Affine{{1.0, 0.0}, 0.0}, Domain::interval(0.0, 1.0));

} // namespace

TEST_CASE("default delta list")
{
    const auto deltas = default_delta_list(1.0 / 8192);
    REQUIRE(deltas.size() == 9);
    CHECK(deltas.front() == 0.4);
    CHECK(deltas.back() == doctest::Approx(0.0015625));
    for (std::size_t i = 1; i < deltas.size(); ++i) {
        CHECK(deltas[i] == deltas[i - 1] * 0.5);
    }
    CHECK(required_grid_n(Box{1, {0.0, 0.0}, {1.0, 1.0}}, 0.05) == 160);
    CHECK(required_grid_n(Box{2, {0.0, 0.0}, {1.0, 3.0}}, 0.1) == 240);
}

TEST_CASE("affine sweep reproduces (1 - delta)^2")
{
    FunctionalParams params;
    params.grid_n = 4096;
    const std::vector<double> deltas{0.4, 0.2, 0.1, 0.05};
    const auto report = delta_sweep(kAffine, unit_indicator(), params, deltas);
    REQUIRE(report.rows.size() == 4);
    for (const auto& row : report.rows) {
        const double expected = (1.0 - row.delta) * (1.0 - row.delta);
        CHECK(row.energy == 1.0);
        CHECK(std::abs(row.ratio - expected) <= 0.01 * expected);
        CHECK(row.value >= 0.0);
    }
    CHECK(report.empirical_bound_ratio == doctest::Approx(report.rows.back().ratio));
}

TEST_CASE("affine ratio error shrinks under mesh doubling")
{
    const std::vector<double> deltas{0.1};
    FunctionalParams params;
    double previous = kInf;
    for (int n : {256, 512, 1024, 2048, 4096}) {
        params.grid_n = n;
        const double err = std::abs(delta_sweep(kAffine, unit_indicator(), params, deltas).rows[0].ratio - 0.81);
        CAPTURE(n);
        CHECK(err < previous);
        previous = err;
    }
    CHECK(previous < 1e-6);

    // The midpoint rule converges monotonically once delta sits on a cell boundary.
    params.pair_rule = PairRule::Midpoint;
    previous = kInf;
    for (int n : {250, 500, 1000, 2000}) {
        params.grid_n = n;
        const double err = std::abs(delta_sweep(kAffine, unit_indicator(), params, deltas).rows[0].ratio - 0.81);
        CAPTURE(n);
        CHECK(err < previous);
        previous = err;
    }
}

TEST_CASE("sweep preconditions")
{
    FunctionalParams params;
    params.grid_n = 256;
    const std::vector<double> fine{0.4, 0.01};
    try {
        delta_sweep(kAffine, unit_indicator(), params, fine);
        FAIL("expected a resolution error");
    } catch (const ResolutionError& e) {
        CHECK(e.required_grid_n() == 800);
    }
    const std::vector<double> unsorted{0.1, 0.2};
    CHECK_THROWS_AS(delta_sweep(kAffine, unit_indicator(), params, unsorted), ParameterError);
    const std::vector<double> empty;
    CHECK_THROWS_AS(delta_sweep(kAffine, unit_indicator(), params, empty), ParameterError);
}

TEST_CASE("constant sweep has zero values and undefined ratios")
{
    FunctionalParams params;
    params.grid_n = 512;
    const TestFunction c(fn::Affine{{0.0, 0.0}, 1.0}, Domain::interval(0.0, 1.0));
    const std::vector<double> deltas{0.4, 0.2, 0.1};
    const auto report = delta_sweep(c, unit_indicator(), params, deltas);
    for (const auto& row : report.rows) {
        CHECK(row.value == 0.0);
        CHECK(std::isnan(row.ratio));
    }
    CHECK(std::isnan(report.empirical_bound_ratio));
}

TEST_CASE("empirical bound ratio is stable under mesh doubling")
{
    const TestFunction s(fn::Sine{}, Domain::interval(0.0, 1.0));
    const std::vector<double> deltas{0.4, 0.2, 0.1, 0.05, 0.025};
    for (double p : {1.5, 2.0, 3.0}) {
        FunctionalParams params;
        params.p = p;
        params.grid_n = 1024;
        const double coarse = delta_sweep(s, unit_indicator(p), params, deltas).empirical_bound_ratio;
        params.grid_n = 2048;
        const double fine = delta_sweep(s, unit_indicator(p), params, deltas).empirical_bound_ratio;
        CAPTURE(p);
        CHECK(std::isfinite(coarse));
        CHECK(std::abs(fine / coarse - 1.0) <= 0.01);
    }
}

TEST_CASE("polar sweep on a whole-space tent")
{
    const TestFunction tent(fn::Tent{{0.5, 0.0}, 0.5, 1.0},
                            Domain::whole_space(Box{1, {0.0, 0.0}, {1.0, 1.0}}, 1.0));
    FunctionalParams params;
    params.grid_n = 2048;
    const std::vector<double> deltas{0.2, 0.1};
    const auto report = delta_sweep(tent, unit_indicator(), params, deltas, Scheme::Polar);
    CHECK(report.scheme == Scheme::Polar);
    CHECK(report.rows[0].energy == doctest::Approx(4.0));
    for (const auto& row : report.rows) {
        CHECK(row.ratio > 0.5);
        CHECK(row.ratio < 1.5);
    }
}

TEST_CASE("band pathology is exactly zero below one half")
{
    const std::vector<double> deltas{0.1, 0.25, 0.49, 0.75};
    for (int n : {300, 1536, 3000}) {
        const auto report = band_pathology(deltas, 2.0, n);
        REQUIRE(report.rows.size() == 4);
        // Rows come back sorted by decreasing delta.
        CHECK(report.rows[0].delta == 0.75);
        CHECK(report.rows[0].value > 0.0);
        for (std::size_t i = 1; i < 4; ++i) {
            CHECK(report.rows[i].value == 0.0);
            CHECK_FALSE(std::signbit(report.rows[i].value));
        }
        CHECK(std::isnan(report.rows[0].ratio));
    }
}

TEST_CASE("every pathology summand vanishes")
{
    // Differences of the unit step are 0 or 1; the normalized band kernel at
    // 1/delta >= 2 is zero, so each term is zero regardless of its weight.
    const Kernel k = normalize(Kernel::band(), 1, 2.0);
    for (double delta : {0.1, 0.25, 0.49}) {
        CHECK(scaled_kernel_eval(k, 2.0, delta, 0.0) == 0.0);
        CHECK(scaled_kernel_eval(k, 2.0, delta, 1.0) == 0.0);
    }
    CHECK(scaled_kernel_eval(k, 2.0, 0.75, 1.0) > 0.0);
}

TEST_CASE("step divergence for p = 2")
{
    const std::vector<int> ns{1024, 2048, 4096, 8192};
    const auto table = step_divergence(2.0, 0.1, ns);
    REQUIRE(table.rows.size() == 4);
    CHECK(table.rows[0].ratio == 0.0);
    for (std::size_t i = 1; i < 4; ++i) {
        CHECK(table.rows[i].value > table.rows[i - 1].value);
        CHECK(table.rows[i].ratio >= 1.5);
    }
    CHECK(table.rows.back().ratio >= 1.7);
    CHECK(table.rows.back().ratio <= 2.1);
    CHECK(table.diverging);
    CHECK(table.certified);
}

TEST_CASE("step divergence values are non-decreasing for other exponents")
{
    const std::vector<int> ns{256, 512, 1024, 2048};
    for (double p : {1.5, 3.0}) {
        const auto table = step_divergence(p, 0.2, ns);
        for (std::size_t i = 1; i < table.rows.size(); ++i) {
            CHECK(table.rows[i].value >= table.rows[i - 1].value);
        }
        const double full_rate = std::pow(2.0, p - 1.0);
        CHECK(table.rows.back().ratio == doctest::Approx(full_rate).epsilon(0.1));
    }
}

TEST_CASE("step divergence with a constant and in exploration mode")
{
    const std::vector<int> ns{1024, 2048, 4096};
    const auto flat = step_divergence(2.0, 0.1, ns, true);
    for (const auto& row : flat.rows) {
        CHECK(row.value == 0.0);
    }
    CHECK_FALSE(flat.diverging);

    const auto bv = step_divergence(1.0, 0.1, ns);
    CHECK_FALSE(bv.certified);
    // Logarithmic growth keeps every ratio just above the p = 1 threshold of 1.
    CHECK(bv.diverging);
    for (std::size_t i = 1; i < bv.rows.size(); ++i) {
        CHECK(bv.rows[i].ratio >= 0.9);
        CHECK(bv.rows[i].ratio <= 1.2);
    }
    CHECK(bv.rows[2].ratio < bv.rows[1].ratio);

    const std::vector<int> bad{1024, 1024};
    CHECK_THROWS_AS(step_divergence(2.0, 0.1, bad), ParameterError);
    const std::vector<int> none;
    CHECK_THROWS_AS(step_divergence(2.0, 0.1, none), ParameterError);
}
