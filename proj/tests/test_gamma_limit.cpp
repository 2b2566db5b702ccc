#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nlsob/errors.hpp"
#include "nlsob/gamma_limit.hpp"

#include <cmath>

using namespace nlsob;

namespace {

KappaProblem small_problem()
{
    KappaProblem prob;
    prob.kernel = normalize(Kernel::indicator(), 1, 2.0);
    prob.delta = 0.1;
    prob.grid_n = 512;
    prob.iterations = 300;
    prob.restarts = 2;
    prob.seed = 42;
    return prob;
}

} // namespace

TEST_CASE("zero iterations returns the baseline")
{
    KappaProblem prob = small_problem();
    prob.iterations = 0;
    prob.grid_n = 2048;
    const auto r = kappa_estimate(prob);
    CHECK(r.objective == r.baseline);
    CHECK(std::abs(r.kappa_hat - 0.81) <= 0.01 * 0.81);
    CHECK(r.proximity == 0.0);
    CHECK(r.trace.empty());
    CHECK(r.in_range);
}

TEST_CASE("optimizer invariants")
{
    const KappaProblem prob = small_problem();
    const auto r = kappa_estimate(prob);
    CHECK(r.kappa_hat > 0.0);
    CHECK(r.objective <= r.baseline + 1e-12);
    CHECK(r.baseline <= 1.0);
    CHECK(r.proximity <= r.epsilon);
    CHECK(r.in_range);
    CHECK(r.trace.size() == static_cast<std::size_t>(prob.iterations * prob.restarts));
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
        CHECK(r.trace[i].best <= r.trace[i - 1].best);
        CHECK(r.trace[i].iteration == r.trace[i - 1].iteration + 1);
    }
    for (const auto& point : r.trace) {
        CHECK(point.proximity <= r.epsilon * (1.0 + 1e-12));
        CHECK(point.best <= point.objective);
    }
    // The incrementally tracked best agrees with the recomputed objective.
    CHECK(std::abs(r.trace.back().best - r.objective) <= 1e-9 * r.objective);
    CHECK(r.accepted_moves > 0);
    // Default budget: 0.1 ||U||_p = 0.1 / 3^(1/2) for p = 2.
    CHECK(r.epsilon == doctest::Approx(0.1 / std::sqrt(3.0)).epsilon(1e-4));
}

TEST_CASE("fixed seed reproduces the trace bit for bit")
{
    const auto a = kappa_estimate(small_problem());
    const auto b = kappa_estimate(small_problem());
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].objective == b.trace[i].objective);
        CHECK(a.trace[i].proximity == b.trace[i].proximity);
    }
    CHECK(a.best_values == b.best_values);
    CHECK(a.kappa_hat == b.kappa_hat);
}

TEST_CASE("dilated problems scale by lambda^d")
{
    // lambda Q with g = lambda-scaled profile at delta lambda, against Q at delta.
    KappaProblem base = small_problem();
    base.delta = 0.05;
    base.grid_n = 512;
    base.iterations = 200;
    KappaProblem big = base;
    big.side = 2.0;
    big.delta = 0.1;
    const auto a = kappa_estimate(base);
    const auto b = kappa_estimate(big);
    CHECK(b.baseline / a.baseline == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(std::abs(b.objective / a.objective - 2.0) <= 0.05 * 2.0);
    CHECK(b.kappa_hat == doctest::Approx(a.kappa_hat).epsilon(0.05));
}

TEST_CASE("steeper profiles scale by the gradient power")
{
    KappaProblem prob = small_problem();
    prob.iterations = 0;
    prob.slope = 2.0;
    prob.delta = 0.2;
    const auto r = kappa_estimate(prob);
    // Lambda_delta(2x) = 4 Lambda_{delta/2}(x), term by term on the same grid.
    prob.slope = 1.0;
    prob.delta = 0.1;
    const auto half = kappa_estimate(prob);
    CHECK(r.objective == doctest::Approx(4.0 * half.objective).epsilon(1e-12));
    CHECK(r.kappa_hat == doctest::Approx(half.kappa_hat).epsilon(1e-12));
    CHECK(std::abs(r.kappa_hat - 0.81) <= 0.02 * 0.81);
}

TEST_CASE("kappa runs in two dimensions")
{
    KappaProblem prob;
    prob.d = 2;
    prob.kernel = normalize(Kernel::indicator(), 2, 2.0);
    prob.delta = 0.25;
    prob.grid_n = 32;
    prob.iterations = 40;
    prob.restarts = 1;
    const auto r = kappa_estimate(prob);
    CHECK(r.kappa_hat > 0.0);
    CHECK(r.objective <= r.baseline + 1e-12);
    CHECK(r.proximity <= r.epsilon);
}

TEST_CASE("kappa parameter errors")
{
    KappaProblem prob = small_problem();
    prob.epsilon = 0.0;
    CHECK_THROWS_AS(kappa_estimate(prob), ParameterError);
    prob.iterations = 0;
    CHECK_NOTHROW(kappa_estimate(prob));

    prob = small_problem();
    prob.epsilon = -1.0;
    CHECK_THROWS_AS(kappa_estimate(prob), ParameterError);

    prob = small_problem();
    prob.p = 1.0;
    CHECK_THROWS_AS(kappa_estimate(prob), ParameterError);

    prob = small_problem();
    prob.delta = 0.01;
    try {
        kappa_estimate(prob);
        FAIL("expected a resolution error");
    } catch (const ResolutionError& e) {
        CHECK(e.required_grid_n() == 800);
    }

    prob = small_problem();
    prob.d = 3;
    CHECK_THROWS_AS(kappa_estimate(prob), ParameterError);
}

TEST_CASE("recovery family")
{
    const Kernel k = normalize(Kernel::indicator(), 1, 2.0);
    const std::vector<double> deltas{0.4, 0.2, 0.1, 0.05, 0.025};

    const TestFunction U(fn::CubeProfile{}, Domain::unit_cube(1));
    const auto u = recovery_upper_bound(U, k, 2.0, deltas, 2048);
    CHECK(u.limit_energy == 1.0);
    for (std::size_t i = 1; i < u.sweep.rows.size(); ++i) {
        CHECK(u.sweep.rows[i].value > u.sweep.rows[i - 1].value);
    }
    CHECK(u.limsup_proxy == doctest::Approx(0.975 * 0.975).epsilon(1e-3));
    CHECK(u.limsup_proxy <= 1.0);

    const TestFunction steep(fn::Affine{{2.0, 0.0}, 0.0}, Domain::interval(0.0, 1.0));
    const auto s = recovery_upper_bound(steep, k, 2.0, deltas, 2048);
    CHECK(s.limit_energy == 4.0);
    CHECK(s.limsup_proxy == doctest::Approx(4.0 * 0.9875 * 0.9875).epsilon(1e-3));

    const TestFunction c(fn::Affine{{0.0, 0.0}, 0.5}, Domain::interval(0.0, 1.0));
    const auto z = recovery_upper_bound(c, k, 2.0, deltas, 2048);
    CHECK(z.limit_energy == 0.0);
    CHECK(z.limsup_proxy == 0.0);
}

TEST_CASE("lower bound probe")
{
    const Kernel k = normalize(Kernel::indicator(), 1, 2.0);
    const TestFunction U(fn::CubeProfile{}, Domain::unit_cube(1));
    const std::vector<double> deltas{0.2, 0.1, 0.05};
    const std::vector<PerturbationFamily> families{constant_family(), sawtooth_family(1.0, 0.25)};
    const double kappa_hat = 0.5;
    const auto r = lower_bound_probe(U, families, k, 2.0, deltas, 2048, kappa_hat, 1e-9);
    REQUIRE(r.families.size() == 2);
    CHECK(r.energy == 1.0);
    const auto& flat = r.families[0];
    for (const auto& row : flat.rows) {
        CHECK(row.value == doctest::Approx((1.0 - row.delta) * (1.0 - row.delta)).epsilon(0.01));
        CHECK(row.proximity == 0.0);
    }
    CHECK(flat.min_value == flat.rows.front().value);
    CHECK(flat.consistent);
    const auto& saw = r.families[1];
    for (const auto& row : saw.rows) {
        CHECK(row.proximity <= row.delta * row.delta);
        CHECK(row.value > 0.0);
    }

    const TestFunction c(fn::Affine{{0.0, 0.0}, 1.0}, Domain::interval(0.0, 1.0));
    const std::vector<PerturbationFamily> only_constant{constant_family()};
    const auto zero = lower_bound_probe(c, only_constant, k, 2.0, deltas, 512, kappa_hat, 0.0);
    CHECK(zero.energy == 0.0);
    CHECK(zero.families[0].min_value == 0.0);
    CHECK(zero.families[0].consistent);
}

TEST_CASE("lower bound probe rejects bad families")
{
    const Kernel k = normalize(Kernel::indicator(), 1, 2.0);
    const TestFunction U(fn::CubeProfile{}, Domain::unit_cube(1));
    const std::vector<double> deltas{0.2, 0.1};

    PerturbationFamily liar = sawtooth_family(1.0, 0.25);
    liar.budget = [](double delta) { return 1e-3 * delta * delta; };
    const std::vector<PerturbationFamily> a{liar};
    CHECK_THROWS_AS(lower_bound_probe(U, a, k, 2.0, deltas, 512, 0.5, 0.0), ParameterError);

    PerturbationFamily growing = constant_family();
    growing.budget = [](double delta) { return 1.0 / delta; };
    const std::vector<PerturbationFamily> b{growing};
    CHECK_THROWS_AS(lower_bound_probe(U, b, k, 2.0, deltas, 512, 0.5, 0.0), ParameterError);

    const std::vector<double> rising{0.1, 0.2};
    const std::vector<PerturbationFamily> c{constant_family()};
    CHECK_THROWS_AS(lower_bound_probe(U, c, k, 2.0, rising, 512, 0.5, 0.0), ParameterError);
    CHECK_THROWS_AS(sawtooth_family(1.0, 0.0), ParameterError);
}
