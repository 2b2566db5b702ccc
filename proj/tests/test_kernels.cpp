#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nlsob/errors.hpp"
#include "nlsob/kernels.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace nlsob;

namespace {

// gamma_{2,p} = 2 sqrt(pi) Gamma((p+1)/2) / Gamma(p/2 + 1), from the Beta integral.
double gamma2_oracle(double p)
{
    return 2.0 * std::sqrt(std::numbers::pi) * std::tgamma(0.5 * (p + 1.0)) / std::tgamma(0.5 * p + 1.0);
}

// int_0^inf phi(t) t^-(p+1) dt by adaptive Gauss-Kronrod on the given pieces
// plus the substitution t = 1/s on the last one.
double integral_oracle(const Kernel& k, double p, std::vector<double> breaks)
{
    using boost::math::quadrature::gauss_kronrod;
    auto f = [&](double t) { return t > 0.0 ? k(t) * std::pow(t, -(p + 1.0)) : 0.0; };
    double total = 0.0;
    for (std::size_t i = 1; i < breaks.size(); ++i) {
        total += gauss_kronrod<double, 61>::integrate(f, breaks[i - 1], breaks[i], 15, 1e-14);
    }
    const double T = breaks.back();
    total += gauss_kronrod<double, 61>::integrate(
        [&](double s) { return s > 0.0 ? f(1.0 / s) / (s * s) : 0.0; }, 0.0, 1.0 / T, 15, 1e-14);
    return total;
}

double rel(double a, double b)
{
    return std::abs(a - b) / std::abs(b);
}

} // namespace

TEST_CASE("eval_kernel examples")
{
    const Kernel ind = Kernel::indicator();
    CHECK(eval_kernel(ind, 0.5) == 0.0);
    CHECK(eval_kernel(ind, 2.0) == 1.0);
    CHECK(eval_kernel(ind, 0.0) == 0.0);
    CHECK(eval_kernel(Kernel::envelope(1.0, 1.0, 2.0), 0.5) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK_THROWS_AS(eval_kernel(ind, -1e-300), DomainError);
    CHECK_THROWS_AS(eval_kernel(ind, std::nan("")), DomainError);
}

TEST_CASE("right-continuous jumps")
{
    CHECK(Kernel::indicator()(1.0) == 1.0);
    CHECK(Kernel::indicator()(std::nextafter(1.0, 0.0)) == 0.0);
    const Kernel band = Kernel::band();
    CHECK(band(1.0) == 1.0);
    CHECK(band(std::nextafter(2.0, 0.0)) == 1.0);
    CHECK(band(2.0) == 0.0);
    CHECK(band.discontinuities() == std::vector<double>{1.0, 2.0});
}

TEST_CASE("scaled_kernel_eval")
{
    const Kernel ind = Kernel::indicator();
    CHECK(scaled_kernel_eval(ind, 2.0, 0.5, 1.0) == 0.25);
    CHECK(scaled_kernel_eval(ind, 2.0, 1.0, 0.7) == ind(0.7));
    CHECK(scaled_kernel_eval(ind, 2.0, 0.3, 0.0) == 0.0);
    CHECK_THROWS_AS(scaled_kernel_eval(ind, 2.0, 0.0, 1.0), ParameterError);
    CHECK_THROWS_AS(scaled_kernel_eval(ind, 2.0, -0.1, 1.0), ParameterError);
    CHECK_THROWS_AS(scaled_kernel_eval(ind, 2.0, 0.1, -1.0), DomainError);
}

TEST_CASE("scaled_kernel_eval is the definitional rescaling for every shape")
{
    const std::vector<Kernel> kernels = {
        Kernel::indicator(1.7, 0.8),
        Kernel::band(0.9, 1.0, 2.5),
        Kernel::envelope(2.0, 0.5, 2.5),
        Kernel::power_cutoff(4.0, 1.3, 0.6),
        Kernel::tabulated({0.0, 0.5, 1.0, 2.0}, {0.0, 0.0, 0.3, 1.1}),
    };
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> t_dist(0.0, 5.0);
    std::uniform_real_distribution<double> d_dist(0.01, 3.0);
    std::uniform_real_distribution<double> p_dist(1.1, 4.0);
    for (const auto& k : kernels) {
        for (int i = 0; i < 200; ++i) {
            const double t = t_dist(rng);
            const double delta = d_dist(rng);
            const double p = p_dist(rng);
            CHECK(scaled_kernel_eval(k, p, delta, t) == std::pow(delta, p) * eval_kernel(k, t / delta));
        }
    }
}

TEST_CASE("gamma_dp")
{
    CHECK(gamma_dp(1, 2.0) == 2.0);
    CHECK(gamma_dp(1, 3.7) == 2.0);
    CHECK(gamma_dp(1, 1.0001) == 2.0);
    CHECK(std::abs(gamma_dp(2, 2.0) - std::numbers::pi) <= 1e-10);
    for (double p : {1.1, 1.5, 2.5, 3.0, 4.5, 7.0}) {
        CHECK(rel(gamma_dp(2, p), gamma2_oracle(p)) <= 1e-10);
    }
    CHECK_THROWS_AS(gamma_dp(3, 2.0), ParameterError);
    CHECK_THROWS_AS(gamma_dp(0, 2.0), ParameterError);
}

TEST_CASE("normalization_integral closed forms")
{
    CHECK(normalization_integral(Kernel::indicator(), 2.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(normalization_integral(Kernel::envelope(1.0, 1.0, 2.0), 2.0) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(normalization_integral(Kernel::indicator(0.0), 2.0) == 0.0);
    CHECK(normalization_integral(Kernel::band(), 2.0) == doctest::Approx(0.375).epsilon(1e-15));
    CHECK_THROWS_AS(normalization_integral(Kernel::power_cutoff(1.5, kInf), 2.0), ValidationError);
    CHECK_THROWS_AS(normalization_integral(Kernel::power_cutoff(2.0, 1.0), 2.0), ValidationError);
}

TEST_CASE("normalization_integral against adaptive quadrature")
{
    struct Case {
        Kernel k;
        double p;
        std::vector<double> breaks;
    };
    const std::vector<Case> cases = {
        {Kernel::indicator(1.0, 0.7), 2.5, {0.7, 10.0}},
        {Kernel::band(1.0, 1.0, 2.0), 1.5, {1.0, 2.0, 10.0}},
        {Kernel::envelope(0.8, 1.2, 2.0), 2.0, {0.0, 1.0, 10.0}},
        {Kernel::power_cutoff(3.5, 1.5), 2.0, {0.0, 1.5, 10.0}},
        {Kernel::tabulated({0.0, 0.4, 1.0, 3.0}, {0.0, 0.0, 0.5, 2.0}), 2.2, {0.4, 1.0, 3.0, 10.0}},
    };
    for (const auto& c : cases) {
        CAPTURE(c.k.name());
        CHECK(rel(normalization_integral(c.k, c.p), integral_oracle(c.k, c.p, c.breaks)) <= 1e-10);
    }
}

TEST_CASE("normalization_integral is linear in the scale")
{
    const Kernel k = Kernel::tabulated({0.0, 0.5, 1.5}, {0.0, 0.0, 2.0});
    const double base = normalization_integral(k, 2.0);
    for (double c : {0.25, 3.0, 17.5}) {
        CHECK(rel(normalization_integral(k.with_scale(c), 2.0), c * base) <= 1e-14);
    }
}

TEST_CASE("normalize")
{
    const Kernel ind = normalize(Kernel::indicator(), 1, 2.0);
    CHECK(std::abs(ind.scale() - 1.0) <= 1e-12);
    for (double p : {1.5, 3.0}) {
        CHECK(rel(normalize(Kernel::indicator(), 1, p).scale(), p / 2.0) <= 1e-14);
    }
    CHECK(rel(normalize(Kernel::band(), 1, 2.0).scale(), 4.0 / 3.0) <= 1e-14);
    // d = 2: c * gamma_{2,2} / 2 = 1.
    CHECK(rel(normalize(Kernel::indicator(), 2, 2.0).scale(), 2.0 / std::numbers::pi) <= 1e-10);

    CHECK_THROWS_AS(normalize(Kernel::indicator(0.0), 1, 2.0), NormalizationError);
    CHECK_THROWS_AS(normalize(Kernel::power_cutoff(1.5), 1, 2.0), NormalizationError);
}

TEST_CASE("normalize is idempotent")
{
    const std::vector<Kernel> kernels = {
        Kernel::indicator(3.0), Kernel::band(0.2), Kernel::envelope(1.0, 2.0, 2.0),
        Kernel::power_cutoff(3.2, 0.9),
        Kernel::tabulated({0.0, 0.3, 0.8, 2.0}, {0.0, 0.0, 0.4, 0.9}),
    };
    for (int d : {1, 2}) {
        for (const auto& k : kernels) {
            const Kernel once = normalize(k, d, 2.0);
            const Kernel twice = normalize(once, d, 2.0);
            CHECK(rel(twice.scale(), once.scale()) < 1e-12);
        }
    }
}

TEST_CASE("validate")
{
    const auto ind = validate(normalize(Kernel::indicator(), 1, 2.0), 2.0);
    CHECK(ind.all_ok());
    CHECK(std::abs(ind.normalization_value - 1.0) <= 1e-10);
    CHECK(ind.growth_ratio == doctest::Approx(1.0));

    const auto band = validate(normalize(Kernel::band(), 1, 2.0), 2.0);
    CHECK_FALSE(band.cond_monotone_ok);
    CHECK(band.cond_growth_ok);
    CHECK(band.cond_bounded_ok);
    CHECK(band.normalized_ok);

    const auto unbounded = validate(Kernel::power_cutoff(3.0, kInf), 2.0);
    CHECK_FALSE(unbounded.cond_bounded_ok);
    CHECK(unbounded.sup_value == kInf);

    const auto steep = validate(Kernel::power_cutoff(2.5, 1.0), 2.0);
    CHECK_FALSE(steep.cond_growth_ok);

    const auto env = validate(normalize(Kernel::envelope(1.0, 1.0, 2.0), 2, 2.0), 2.0, 2);
    CHECK(env.all_ok());
    CHECK(std::abs(env.normalization_value - 1.0) <= 1e-10);

    const auto raw = validate(Kernel::indicator(2.0), 3.0);
    CHECK_FALSE(raw.normalized_ok);
    CHECK(raw.normalization_value == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("report invariants hold on random kernels")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    for (int i = 0; i < 30; ++i) {
        const double p = 1.2 + u(rng);
        const Kernel k = Kernel::tabulated({0.0, 0.2 * u(rng), 1.0 + u(rng), 3.0 + u(rng)},
                                           {0.0, 0.0, u(rng), u(rng)}, u(rng));
        const auto r = validate(k, p);
        CHECK(r.normalization_value >= 0.0);
        if (r.cond_growth_ok) {
            CHECK(std::isfinite(r.growth_ratio));
        }
    }
}

TEST_CASE("growth constant bounds the sampled ratio")
{
    const std::vector<Kernel> kernels = {
        Kernel::indicator(1.0, 0.5), Kernel::band(2.0, 0.6, 0.9), Kernel::power_cutoff(3.5, 0.7),
        Kernel::tabulated({0.0, 0.2, 0.6, 1.4}, {0.0, 0.0, 0.05, 0.3}),
        Kernel::tabulated({0.0, 0.5, 2.0}, {0.0, 0.0, 1.0}),
    };
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> t_dist(1e-6, 1.0);
    for (const auto& k : kernels) {
        const double a = growth_constant(k, 2.0);
        REQUIRE(std::isfinite(a));
        for (int i = 0; i < 2000; ++i) {
            const double t = t_dist(rng);
            CHECK(k(t) <= a * std::pow(t, 3.0) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("envelope majorizes its kernel")
{
    const std::vector<Kernel> kernels = {
        normalize(Kernel::indicator(), 1, 2.0), normalize(Kernel::band(), 1, 2.0),
        Kernel::power_cutoff(3.0, 0.8, 2.0),
        Kernel::tabulated({0.0, 0.3, 0.9, 2.0}, {0.0, 0.0, 0.2, 0.6}),
    };
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> t_dist(0.0, 6.0);
    for (const auto& k : kernels) {
        const Kernel env = envelope_of(k, 2.0);
        CHECK(env.monotone());
        for (int i = 0; i < 5000; ++i) {
            const double t = t_dist(rng);
            CHECK(eval_kernel(k, t) <= eval_kernel(env, t));
        }
        for (double jump : k.discontinuities()) {
            CHECK(eval_kernel(k, jump) <= eval_kernel(env, jump));
        }
    }
    CHECK_THROWS_AS(envelope_of(Kernel::power_cutoff(3.0, kInf), 2.0), ValidationError);
}

TEST_CASE("kernel invariants: phi(0) = 0, nonnegative, monotone flag honest")
{
    const std::vector<Kernel> kernels = {
        Kernel::indicator(), Kernel::band(), Kernel::envelope(1.0, 1.0, 2.0),
        Kernel::power_cutoff(3.0, 2.0), Kernel::tabulated({0.0, 0.5, 1.0}, {0.0, 0.2, 0.1}),
    };
    for (const auto& k : kernels) {
        CHECK(k(0.0) == 0.0);
        double previous = 0.0;
        bool monotone = true;
        for (int i = 0; i <= 4000; ++i) {
            const double v = k(i * 1e-3);
            CHECK(v >= 0.0);
            monotone = monotone && v >= previous;
            previous = v;
        }
        if (k.monotone()) {
            CHECK(monotone);
        }
    }
    CHECK_FALSE(Kernel::band().monotone());
    CHECK_FALSE(Kernel::tabulated({0.0, 0.5, 1.0}, {0.0, 0.2, 0.1}).monotone());
}

TEST_CASE("malformed kernels are rejected")
{
    CHECK_THROWS_AS(Kernel::indicator(-1.0), ParameterError);
    CHECK_THROWS_AS(Kernel::band(1.0, 2.0, 1.0), ParameterError);
    CHECK_THROWS_AS(Kernel::tabulated({0.0, 1.0}, {0.0}), ParameterError);
    CHECK_THROWS_AS(Kernel::tabulated({0.0, 1.0, 0.5}, {0.0, 1.0, 1.0}), ParameterError);
    CHECK_THROWS_AS(Kernel::tabulated({0.0, 1.0}, {0.3, 1.0}), ParameterError);
}
