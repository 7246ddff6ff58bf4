#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "dnls/errors.hpp"
#include "dnls/evolution.hpp"
#include "dnls/spectral.hpp"
#include "oracles/gaussian.hpp"
#include "oracles/rk4.hpp"
#include "support.hpp"

using namespace dnls;
using testing_support::rel_l2_error;
using testing_support::rel_max_error;

namespace {

ComplexField gaussian_data(const Grid& g, double width, double amplitude = 1.0, double k = 0.0)
{
    return ComplexField::from_function(g, [&](const Point& x) {
        const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        return amplitude * std::exp(-r2 / (width * width)) * std::polar(1.0, k * x[0]);
    });
}

ComplexField run_to(const ComplexField& u0, const ProblemSpec& spec, double dt, double T)
{
    StrangStepper stepper(spec, dt);
    SimState s{0.0, u0, 0};
    for (long n = step_count(T, dt); n > 0; --n)
        stepper.step(s);
    return s.u;
}

double mass(const ComplexField& u) { return std::pow(lp_norm(u, 2.0), 2.0); }

struct CountingObserver : Observer {
    long steps = 0;
    std::vector<long> checkpoint_steps;
    void on_step(const StepView& v) override
    {
        ++steps;
        if (v.checkpoint != nullptr)
            checkpoint_steps.push_back(v.step);
    }
};

} // namespace

TEST_CASE("closed-form pointwise flow agrees with an adaptive RK4 integration")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> mod(0.05, 2.0), ph(-3.0, 3.0), ua(0.0, 2.0), uv(-1.0, 1.0);
    const Exponents cases[] = {{1.0, 1.0, 0.5}, {1.0, 0.5, 0.8}, {0.8, 0.8, 0.8}, {1.5, 0.3, 0.3}, {0.5, 0.5, 0.2}};
    double worst = 0.0;
    for (const auto& e : cases)
        for (int i = 0; i < 60; ++i) {
            const Complex z0 = std::polar(mod(rng), ph(rng));
            const double a = ua(rng), V = uv(rng), tau = 0.05;
            const Complex exact = nonlinear_flow_pointwise(z0, a, V, e, tau);
            const Complex ref
                = oracle::rk4_adaptive({a, V, e.sigma1, e.sigma2, e.sigma3}, z0, tau);
            worst = std::max(worst, std::abs(exact - ref) / std::abs(ref));
        }
    CHECK(worst <= 1e-10);
}

TEST_CASE("pointwise flow: modulus law, undamped phase rotation and the origin")
{
    const Exponents e{1.0, 0.5, 0.5};
    const Complex z0(0.6, -0.8);
    const double a = 0.7, tau = 0.3;
    const Complex z = nonlinear_flow_pointwise(z0, a, 0.0, e, tau);
    // y(t) = y0 / (1 + 2 s2 a t y0^{s2})^{1/s2}
    const double y = 1.0 / std::pow(1.0 + 2 * e.sigma2 * a * tau, 1.0 / e.sigma2);
    CHECK(std::norm(z) == doctest::Approx(y).epsilon(1e-14));

    const Complex w = nonlinear_flow_pointwise(z0, 0.0, 0.4, e, tau);
    CHECK(std::abs(w) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::arg(w / z0) == doctest::Approx(-(1.0 + 0.4) * tau).epsilon(1e-14));

    CHECK(nonlinear_flow_pointwise(Complex(0.0, 0.0), 1.0, 1.0, e, tau) == Complex(0.0, 0.0));
    // Tiny amplitudes keep full relative accuracy of the (negligible) damping.
    const Complex tiny(1e-12, 0.0);
    const Complex t = nonlinear_flow_pointwise(tiny, 1.0, 0.0, e, 1.0);
    CHECK(std::abs(t) == doctest::Approx(1e-12).epsilon(1e-15));
}

TEST_CASE("linear stepping reproduces the exact free Gaussian")
{
    const Grid g(2, 64, 12.0);
    const double beta = 0.5;  // u0 = exp(-|x|^2 / (4 beta))
    auto spec = make_problem(g, {1.0, 1.0, 0.5}, ProfileSpec::zero(), ProfileSpec::zero());
    spec.nonlinear = false;
    const ComplexField u0 = ComplexField::from_function(g, [&](const Point& x) {
        return Complex(std::exp(-(x[0] * x[0] + x[1] * x[1]) / (4 * beta)), 0.0);
    });
    const double T = 0.5;
    const ComplexField u = run_to(u0, spec, 0.1, T);
    const ComplexField ref = ComplexField::from_function(g, [&](const Point& x) {
        return oracle::free_gaussian(x[0] * x[0] + x[1] * x[1], T, beta, 2);
    });
    CHECK(rel_max_error(u, ref) <= 1e-10);
    CHECK(rel_max_error(u, free_propagate(u0, T)) <= 1e-12);
}

TEST_CASE("Strang splitting converges at second order")
{
    const Grid g(1, 256, 16.0);
    const auto spec = make_problem(g, {1.0, 1.0, 0.5}, ProfileSpec::gaussian(0.5, 3.0),
                                   ProfileSpec::gaussian(-0.3, 2.0));
    const ComplexField u0 = gaussian_data(g, 1.5, 1.0, 1.0);
    const double T = 1.0;
    const ComplexField ref = run_to(u0, spec, 2.5e-3 / 16, T);
    double errs[3];
    const double dts[3] = {1e-2, 5e-3, 2.5e-3};
    for (int i = 0; i < 3; ++i)
        errs[i] = rel_l2_error(run_to(u0, spec, dts[i], T), ref);
    for (int i = 0; i < 2; ++i) {
        const double order = std::log2(errs[i] / errs[i + 1]);
        CHECK(order >= 1.9);
        CHECK(order <= 2.1);
    }
}

TEST_CASE("mass is nonincreasing step by step and conserved without damping")
{
    const Grid g(2, 32, 8.0);
    std::mt19937_64 rng(3);
    const ComplexField u0 = testing_support::smooth_field(g, rng, 2.0, 4, 1.5);
    const auto damped
        = make_problem(g, {1.0, 0.6, 0.5}, ProfileSpec::plateau(1.0, 2.0, 4.0), ProfileSpec::gaussian(-0.5, 1.0));
    StrangStepper stepper(damped, 0.01);
    SimState s{0.0, u0, 0};
    double prev = mass(u0);
    for (int n = 0; n < 50; ++n) {
        stepper.step(s);
        const double m = mass(s.u);
        CHECK(m <= prev * (1.0 + 1e-13));
        prev = m;
    }
    CHECK(prev < mass(u0));

    const auto conservative = make_problem(g, {1.0, 0.6, 0.5}, ProfileSpec::zero(), ProfileSpec::gaussian(-0.5, 1.0));
    const ComplexField u = run_to(u0, conservative, 0.01, 0.5);
    CHECK(mass(u) == doctest::Approx(mass(u0)).epsilon(1e-12));
}

TEST_CASE("dealiased steps leave the top third of the band empty")
{
    const Grid g(1, 64, 8.0);
    std::mt19937_64 rng(5);
    const auto spec = make_problem(g, {1.0, 1.0, 0.5}, ProfileSpec::constant(0.2), ProfileSpec::zero());
    StrangStepper stepper(spec, 0.01, true);
    SimState s{0.0, testing_support::white_field(g, rng), 0};
    stepper.step(s);
    CHECK(high_band_fraction(s.u) <= 1e-28);
    CHECK(high_band_fraction(testing_support::white_field(g, rng)) > 0.3);
}

TEST_CASE("step count requires an integer number of steps")
{
    CHECK(step_count(1.0, 0.01) == 100);
    CHECK(step_count(0.3, 0.1) == 3);
    CHECK(step_count(0.0, 0.1) == 0);
    CHECK_THROWS_AS(step_count(1.0, 0.3), ConfigError);
    CHECK_THROWS_AS(step_count(1.0, 0.0), ConfigError);
}

TEST_CASE("evolve: checkpoint cadence, observers and final time")
{
    const Grid g(1, 64, 10.0);
    const auto spec = make_problem(g, {1.0, 1.0, 0.5}, ProfileSpec::gaussian(0.5, 2.0), ProfileSpec::zero());
    EvolveOptions opt;
    opt.T = 0.23;
    opt.dt = 0.01;
    opt.cadence = 5;
    CountingObserver obs;
    Observer* list[] = {&obs};
    const auto series = evolve({0.0, gaussian_data(g, 1.0), 0}, spec, opt, list);
    CHECK(obs.steps == 24);
    CHECK(obs.checkpoint_steps == std::vector<long>{0, 5, 10, 15, 20, 23});
    REQUIRE(series.checkpoints.size() == 6);
    CHECK(series.checkpoints.back().record.t == doctest::Approx(0.23).epsilon(1e-15));
    CHECK(series.checkpoints.back().accum.t == doctest::Approx(0.23).epsilon(1e-15));
    CHECK(series.initial_high_band_fraction < 1e-8);
    CHECK_FALSE(series.first_leak_time.has_value());

    opt.cadence = 0;
    CHECK_THROWS_AS(evolve({0.0, gaussian_data(g, 1.0), 0}, spec, opt), ConfigError);
}

TEST_CASE("evolve aborts on overflow and keeps the good prefix")
{
    const Grid g(1, 32, 8.0);
    const auto spec = make_problem(g, {1.0, 1.0, 0.5}, ProfileSpec::zero(), ProfileSpec::zero());
    ComplexField u0 = gaussian_data(g, 1.0);
    u0[16] = 1e160;
    EvolveOptions opt;
    opt.T = 0.1;
    opt.dt = 0.01;
    try {
        (void)evolve({0.0, u0, 0}, spec, opt);
        FAIL("expected EvolutionAborted");
    } catch (const EvolutionAborted& e) {
        CHECK(e.partial().checkpoints.size() == 1);
        CHECK(std::string(e.what()).find("step 1") != std::string::npos);
    }

    u0[16] = Complex(std::nan(""), 0.0);
    CHECK_THROWS_AS(evolve({0.0, u0, 0}, spec, opt), NumericalError);
}

TEST_CASE("evolve records the first boundary leak")
{
    const Grid g(1, 64, 6.0);
    const auto spec = make_problem(g, {1.0, 1.0, 0.5}, ProfileSpec::zero(), ProfileSpec::zero());
    EvolveOptions opt;
    opt.T = 2.0;
    opt.dt = 0.01;
    opt.cadence = 10;
    // A fast wave packet reaches the outer shell quickly.
    const auto series = evolve({0.0, gaussian_data(g, 0.8, 1.0, 4.0), 0}, spec, opt);
    REQUIRE(series.first_leak_time.has_value());
    CHECK(*series.first_leak_time > 0.0);
    CHECK(*series.first_leak_time < 1.0);
}

TEST_CASE("worked examples of the stepper")
{
    // |z0| = 1, a = 1, s2 = 1: |z|^2 = 1/(1 + 2 tau).
    CHECK(std::norm(nonlinear_flow_pointwise(Complex(0.0, 1.0), 1.0, 0.0, {1.0, 1.0, 0.5}, 0.5))
          == doctest::Approx(0.5).epsilon(1e-15));

    // Plane wave with a = V = 0: the uniform nonlinear phase commutes with the free flow.
    const Grid g(2, 32, 6.0);
    const double eps = 0.7, dt = 0.05;
    const int mx = 3, my = -2;
    const double kx = std::acos(-1.0) / 6.0 * mx, ky = std::acos(-1.0) / 6.0 * my;
    const auto spec = make_problem(g, {1.0, 1.0, 0.5}, ProfileSpec::zero(), ProfileSpec::zero());
    const ComplexField u0
        = ComplexField::from_function(g, [&](const Point& x) { return eps * std::polar(1.0, kx * x[0] + ky * x[1]); });
    const double T = 1.0;
    const ComplexField u = run_to(u0, spec, dt, T);
    const ComplexField exact = ComplexField::from_function(g, [&](const Point& x) {
        return eps * std::polar(1.0, kx * x[0] + ky * x[1] - (kx * kx + ky * ky) * T - eps * eps * T);
    });
    CHECK(rel_max_error(u, exact) <= 1e-12);

    const ComplexField zero(g);
    const ComplexField z = run_to(zero, spec, dt, 0.2);
    CHECK(lp_norm(z, std::numeric_limits<double>::infinity()) == 0.0);
}

TEST_CASE("T = 0 gives the single initial checkpoint; constant damping decreases mass strictly")
{
    const Grid g(1, 64, 8.0);
    const auto spec = make_problem(g, {1.0, 1.0, 0.5}, ProfileSpec::constant(0.5), ProfileSpec::zero());
    EvolveOptions opt;
    opt.T = 0.0;
    opt.dt = 0.01;
    CHECK(evolve({0.0, gaussian_data(g, 1.0), 0}, spec, opt).checkpoints.size() == 1);

    opt.T = 0.5;
    opt.cadence = 5;
    const auto s = evolve({0.0, gaussian_data(g, 1.0), 0}, spec, opt);
    for (std::size_t i = 1; i < s.checkpoints.size(); ++i)
        CHECK(s.checkpoints[i].record.mass < s.checkpoints[i - 1].record.mass);
}
