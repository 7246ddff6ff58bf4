#include <doctest.h>

#include <cmath>
#include <functional>

#include "dnls/errors.hpp"
#include "dnls/evolution.hpp"
#include "dnls/identities.hpp"
#include "dnls/scattering.hpp"
#include "dnls/spectral.hpp"
#include "support.hpp"

using namespace dnls;

namespace {

ComplexField packet(const Grid& g, double width, double k)
{
    return ComplexField::from_function(g, [&](const Point& x) {
        double r2 = 0.0;
        for (int j = 0; j < g.dim(); ++j)
            r2 += x[j] * x[j];
        return std::exp(-r2 / (width * width)) * std::polar(1.0, k * x[0]);
    });
}

std::vector<Snapshot> snapshots_of(const Grid& g, const std::vector<double>& times,
                                   const std::function<ComplexField(double)>& state)
{
    std::vector<Snapshot> out;
    for (double t : times) {
        ComplexField u = state(t);
        out.push_back({0, t, u, boundary_leak(u)});
    }
    (void)g;
    return out;
}

ScatteringContext context_for(const ComplexField& u0)
{
    ScatteringContext ctx;
    ctx.mass0 = std::pow(lp_norm(u0, 2.0), 2.0);
    ctx.h1_initial = h1_norm(u0);
    return ctx;
}

} // namespace

TEST_CASE("dyadic snapshot schedule")
{
    CHECK(dyadic_steps(0.25, 0.01, 8.0) == std::vector<long>{25, 50, 100, 200, 400, 800});
    CHECK(dyadic_steps(0.25, 0.01, 7.0) == std::vector<long>{25, 50, 100, 200, 400});
    CHECK_THROWS_AS(dyadic_steps(0.255, 0.01, 8.0), ConfigError);
    CHECK_THROWS_AS(dyadic_steps(0.0, 0.01, 8.0), ConfigError);
}

TEST_CASE("pullback inverts the free flow")
{
    const Grid g(2, 32, 8.0);
    std::mt19937_64 rng(2);
    const ComplexField u0 = testing_support::smooth_field(g, rng);
    CHECK(testing_support::rel_max_error(pullback(free_propagate(u0, 1.7), 1.7), u0) <= 1e-13);
}

TEST_CASE("free evolution is scattering-consistent with u_plus = u0")
{
    const Grid g(1, 512, 64.0);
    const ComplexField u0 = packet(g, 3.0, 0.3);
    const auto snaps = snapshots_of(g, {0.5, 1.0, 2.0, 4.0, 8.0}, [&](double t) { return free_propagate(u0, t); });
    const auto rep = scattering_report(snaps, context_for(u0));
    CHECK(rep.verdict == ScatteringVerdict::consistent);
    CHECK(rep.monotone_tail);
    CHECK(rep.final_h1_gap <= 1e-12);
    REQUIRE(rep.u_plus.has_value());
    CHECK(testing_support::rel_max_error(*rep.u_plus, u0) <= 1e-12);
    CHECK(rep.unitarity_defect <= 1e-12);
    CHECK(rep.successive.size() == 4);
    CHECK(rep.cauchy[4].size() == 4);
    CHECK(rep.threshold == doctest::Approx(0.1 * h1_norm(u0)));
}

TEST_CASE("a persistently rotating profile is not scattering-consistent")
{
    // u(t) = e^{it Delta}(e^{it} u0): the pulled-back state never settles.
    const Grid g(1, 512, 64.0);
    const ComplexField u0 = packet(g, 3.0, 0.0);
    const auto snaps = snapshots_of(g, {1.0, 2.0, 4.0, 8.0}, [&](double t) {
        ComplexField w = u0;
        w *= std::polar(1.0, t);
        return free_propagate(w, t);
    });
    const auto rep = scattering_report(snaps, context_for(u0));
    CHECK(rep.verdict == ScatteringVerdict::not_consistent);
    CHECK(rep.successive[0] == doctest::Approx(2 * std::sin(0.5) * h1_norm(u0)).epsilon(1e-10));
}

TEST_CASE("unitarity: forward errors equal Cauchy distances to the last snapshot")
{
    const Grid g(1, 512, 64.0);
    const ComplexField u0 = packet(g, 3.0, 0.5);
    const auto snaps = snapshots_of(g, {1.0, 2.0, 4.0, 8.0}, [&](double t) {
        ComplexField w = u0;
        w *= std::polar(std::exp(-1.0 / t), 0.0);
        return free_propagate(w, t);
    });
    const auto rep = scattering_report(snaps, context_for(u0));
    CHECK(rep.unitarity_defect <= 1e-12);
    for (std::size_t i = 0; i + 1 < rep.times.size(); ++i)
        CHECK(rep.forward_errors[i] == doctest::Approx(rep.cauchy.back()[i]).epsilon(1e-12));
}

TEST_CASE("boundary leaks drop late snapshots and too few snapshots are rejected")
{
    const Grid g(1, 256, 16.0);
    const ComplexField u0 = packet(g, 1.0, 0.0);
    auto snaps = snapshots_of(g, {1.0, 2.0, 4.0, 8.0, 16.0}, [&](double t) { return free_propagate(u0, t); });
    auto ctx = context_for(u0);
    // Free spreading pushes mass into the outer shell by t = 8.
    CHECK(snaps.back().shell_mass > 1e-8 * ctx.mass0);
    const auto rep = scattering_report(snaps, ctx);
    CHECK(rep.verdict == ScatteringVerdict::no_verdict);
    CHECK_FALSE(rep.note.empty());

    const auto three = snapshots_of(g, {0.1, 0.2, 0.4}, [&](double t) { return free_propagate(u0, t); });
    CHECK_THROWS_AS(scattering_report(three, context_for(u0)), std::invalid_argument);
}

TEST_CASE("asymptotically flat case reports the L^{2 s2+2} plateau")
{
    const Grid g(1, 512, 64.0);
    const ComplexField u0 = packet(g, 3.0, 0.3);
    const auto snaps = snapshots_of(g, {0.5, 1.0, 2.0, 4.0}, [&](double t) { return free_propagate(u0, t); });
    auto ctx = context_for(u0);
    ctx.asymptotically_flat_case = true;
    ctx.l2s2_t = {0.0, 1.0, 2.0, 3.0, 4.0};
    ctx.l2s2 = {0.0, 1.0, 1.5, 1.8, 2.0};
    const auto rep = scattering_report(snaps, ctx);
    REQUIRE(rep.l2s2_last_quarter_share.has_value());
    CHECK(*rep.l2s2_last_quarter_share == doctest::Approx(0.1));
    CHECK(rep.l2s2_plateau);
    const auto j = to_json(rep);
    CHECK(j["verdict"] == "SCATTERING-CONSISTENT");
    CHECK(j.contains("l2s2_plateau"));
}

TEST_CASE("snapshot recorder keeps exactly the scheduled steps")
{
    const Grid g(1, 64, 12.0);
    const auto spec = make_problem(g, {1.0, 1.0, 0.5}, ProfileSpec::constant(0.2), ProfileSpec::zero());
    SnapshotRecorder rec(dyadic_steps(0.05, 0.01, 0.4));
    Observer* obs[] = {&rec};
    EvolveOptions opt;
    opt.T = 0.4;
    opt.dt = 0.01;
    opt.cadence = 7;
    (void)evolve({0.0, packet(g, 1.0, 0.0), 0}, spec, opt, obs);
    REQUIRE(rec.snapshots().size() == 4);
    const long expected[] = {5, 10, 20, 40};
    for (int i = 0; i < 4; ++i) {
        CHECK(rec.snapshots()[i].step == expected[i]);
        CHECK(rec.snapshots()[i].t == doctest::Approx(0.01 * expected[i]).epsilon(1e-15));
    }
}
