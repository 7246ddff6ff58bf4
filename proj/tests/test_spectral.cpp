#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "dnls/errors.hpp"
#include "dnls/field_io.hpp"
#include "dnls/grid.hpp"
#include "dnls/spectral.hpp"
#include "oracles/gaussian.hpp"
#include "support.hpp"

using namespace dnls;
using testing_support::rel_l2_error;
using testing_support::rel_max_error;
constexpr double pi = std::numbers::pi;

namespace {

ComplexField plane_wave(const Grid& g, const std::array<int, 3>& m, Point& k)
{
    for (int j = 0; j < 3; ++j)
        k[j] = j < g.dim() ? pi / g.half_length() * m[j] : 0.0;
    return ComplexField::from_function(g, [&](const Point& x) {
        return std::polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
    });
}

ComplexField unit_gaussian(const Grid& g)
{
    return ComplexField::from_function(g, [&](const Point& x) {
        return Complex(std::exp(-0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2])), 0.0);
    });
}

} // namespace

TEST_CASE("grid shape validation and quadrature of the constant field")
{
    CHECK_THROWS_AS(Grid(4, 16, 1.0), ConfigError);
    CHECK_THROWS_AS(Grid(1, 12, 1.0), ConfigError);
    CHECK_THROWS_AS(Grid(1, 4, 1.0), ConfigError);
    CHECK_THROWS_AS(Grid(2, 16, 0.0), ConfigError);
    CHECK_NOTHROW(Grid(3, 96, 24.0));

    for (int d = 1; d <= 3; ++d) {
        const Grid g(d, 16, 2.5);
        const ComplexField one = ComplexField::from_function(g, [](const Point&) { return Complex(1.0, 0.0); });
        const double integral = std::pow(lp_norm(one, 2.0), 2.0);
        CHECK(std::abs(integral - std::pow(5.0, d)) <= 1e-12 * std::pow(5.0, d));
    }
}

TEST_CASE("wavenumber table is symmetric up to the Nyquist mode")
{
    const Grid g(1, 16, 3.0);
    CHECK(g.mode(8) == -8);
    for (int m = 1; m < 8; ++m)
        CHECK(g.wavenumber(m) == doctest::Approx(-g.wavenumber(16 - m)).epsilon(1e-15));
    CHECK(g.wavenumber(1) == doctest::Approx(pi / 3.0));
}

TEST_CASE("forward then inverse transform reproduces the samples")
{
    std::mt19937_64 rng(1);
    for (int d = 1; d <= 3; ++d) {
        const Grid g(d, 16, 4.0);
        const ComplexField f = testing_support::white_field(g, rng);
        CHECK(rel_max_error(to_physical(to_frequency(f)), f) <= 1e-12);
    }
}

TEST_CASE("plane waves are eigenfunctions of gradient, laplacian and the free flow")
{
    const Grid g(3, 16, pi);
    Point k;
    const ComplexField f = plane_wave(g, {2, -3, 5}, k);
    const auto grad = gradient(f);
    for (int j = 0; j < 3; ++j) {
        ComplexField expected = f;
        expected *= Complex(0.0, k[j]);
        CHECK(rel_max_error(grad[j], expected) <= 1e-12);
    }
    const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    ComplexField lap_expected = f;
    lap_expected *= -k2;
    CHECK(rel_max_error(laplacian(f), lap_expected) <= 1e-12);

    const double t = 0.37;
    ComplexField prop_expected = f;
    prop_expected *= std::polar(1.0, -k2 * t);
    CHECK(rel_max_error(free_propagate(f, t), prop_expected) <= 1e-12);

    CHECK(h1_norm(f) == doctest::Approx(std::pow(2 * pi, 1.5) * std::sqrt(1 + k2)).epsilon(1e-12));
}

TEST_CASE("derivatives of constants vanish")
{
    const Grid g(2, 16, 2.0);
    const ComplexField c = ComplexField::from_function(g, [](const Point&) { return Complex(3.0, -1.0); });
    for (const auto& comp : gradient(c))
        for (std::size_t p = 0; p < comp.size(); ++p)
            CHECK(std::abs(comp[p]) <= 1e-13);
    const ComplexField lap = laplacian(c);
    for (std::size_t p = 0; p < lap.size(); ++p)
        CHECK(std::abs(lap[p]) <= 1e-13);
}

TEST_CASE("Gaussian derivatives match closed forms")
{
    const Grid g(1, 256, 16.0);
    const ComplexField f = unit_gaussian(g);
    const auto grad = gradient(f);
    const ComplexField lap = laplacian(f);
    double err1 = 0.0, err2 = 0.0;
    for (std::size_t p = 0; p < f.size(); ++p) {
        const double x = g.point(p)[0];
        const double e = std::exp(-0.5 * x * x);
        err1 = std::max(err1, std::abs(grad[0][p] - Complex(-x * e, 0.0)));
        err2 = std::max(err2, std::abs(lap[p] - Complex((x * x - 1.0) * e, 0.0)));
    }
    CHECK(err1 < 1e-10);
    CHECK(err2 < 1e-10);
}

TEST_CASE("free propagation: identity at t=0, exact inverse, closed-form Gaussian")
{
    const Grid g(1, 256, 16.0);
    const ComplexField f = unit_gaussian(g);
    CHECK(rel_max_error(free_propagate(f, 0.0), f) <= 1e-15);
    CHECK(rel_l2_error(free_propagate(free_propagate(f, 0.7), -0.7), f) <= 1e-12);

    // exp(-x^2/2) = exp(-x^2/(4 beta)) with beta = 1/2.
    const ComplexField u = free_propagate(f, 1.0);
    double err = 0.0;
    for (std::size_t p = 0; p < u.size(); ++p) {
        const double x = g.point(p)[0];
        err = std::max(err, std::abs(u[p] - oracle::free_gaussian(x * x, 1.0, 0.5, 1)));
    }
    CHECK(err < 1e-10);

    // Same field in frequency space stays in frequency space.
    const ComplexField spec = to_frequency(f);
    CHECK(free_propagate(spec, 0.3).space() == Space::frequency);
}

TEST_CASE("Lp and H1 norms")
{
    const Grid cube(3, 8, pi);
    const ComplexField one = ComplexField::from_function(cube, [](const Point&) { return Complex(1.0, 0.0); });
    for (double p : {1.0, 2.0, 3.5})
        CHECK(lp_norm(one, p) == doctest::Approx(std::pow(2 * pi, 3.0 / p)).epsilon(1e-12));
    CHECK(lp_norm(one, std::numeric_limits<double>::infinity()) == doctest::Approx(1.0));
    const ComplexField zero(cube);
    CHECK(lp_norm(zero, 2.0) == 0.0);
    CHECK(h1_norm(zero) == 0.0);
    CHECK_THROWS_AS(lp_norm(one, 0.5), std::invalid_argument);

    const Grid g3(3, 64, 8.0);
    CHECK(lp_norm(unit_gaussian(g3), 2.0) == doctest::Approx(std::pow(pi, 0.75)).epsilon(1e-12));

    const Grid g1(1, 256, 16.0);
    CHECK(h1_norm(unit_gaussian(g1)) == doctest::Approx(std::sqrt(std::sqrt(pi) * 1.5)).epsilon(1e-12));
}

TEST_CASE("Parseval holds for 1000 random fields")
{
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> dim(1, 3);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Grid g(dim(rng), 8 * (1 + trial % 2), 1.0 + 0.01 * trial);
        const ComplexField f = testing_support::white_field(g, rng);
        const double direct = std::pow(lp_norm(f, 2.0), 2.0);
        worst = std::max(worst, std::abs(parseval_mass(to_frequency(f)) - direct) / direct);
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("free propagation is unitary and commutes with the gradient")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> times(-10.0, 10.0);
    double worst_mass = 0.0, worst_h1 = 0.0, worst_comm = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const Grid g(1 + trial % 3, 16, 3.0);
        const ComplexField f = testing_support::white_field(g, rng);
        const double t = times(rng);
        const ComplexField u = free_propagate(f, t);
        worst_mass = std::max(worst_mass, std::abs(lp_norm(u, 2.0) / lp_norm(f, 2.0) - 1.0));
        worst_h1 = std::max(worst_h1, std::abs(h1_norm(u) / h1_norm(f) - 1.0));
        const auto a = gradient(u);
        const auto gf = gradient(f);
        for (int j = 0; j < g.dim(); ++j)
            worst_comm = std::max(worst_comm, rel_l2_error(a[j], free_propagate(gf[j], t)));
    }
    CHECK(worst_mass <= 1e-12);
    CHECK(worst_h1 <= 1e-12);
    CHECK(worst_comm <= 1e-12);
}

TEST_CASE("non-finite input is rejected with the first bad index")
{
    const Grid g(1, 16, 1.0);
    ComplexField f(g);
    f[5] = Complex(std::nan(""), 0.0);
    f[9] = Complex(INFINITY, 0.0);
    try {
        (void)gradient(f);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("index 5") != std::string::npos);
    }
    CHECK_THROWS_AS(h1_norm(f), NumericalError);
    CHECK_THROWS_AS(free_propagate(f, 1.0), NumericalError);
}

TEST_CASE("two-thirds truncation keeps the inner band only")
{
    const Grid g(2, 24, 1.0);
    std::mt19937_64 rng(3);
    ComplexField spec = to_frequency(testing_support::white_field(g, rng));
    truncate_two_thirds(spec);
    const auto& mm = SpectralContext::of(g)->max_abs_mode();
    for (std::size_t p = 0; p < spec.size(); ++p) {
        if (mm[p] > 8)
            CHECK(spec[p] == Complex(0.0, 0.0));
        else
            CHECK(spec[p] != Complex(0.0, 0.0));
    }
}

TEST_CASE("DNLSFLD1 round trip and byte layout")
{
    const Grid g(2, 8, 1.5);
    std::mt19937_64 rng(5);
    const ComplexField f = testing_support::white_field(g, rng);
    std::stringstream buf;
    write_field(buf, f);
    const std::string bytes = buf.str();
    REQUIRE(bytes.size() == 32 + 64 * 16);
    CHECK(bytes.substr(0, 8) == "DNLSFLD1");
    CHECK(static_cast<unsigned char>(bytes[8]) == 2);   // d, little-endian
    CHECK(static_cast<unsigned char>(bytes[16]) == 8);  // N
    const ComplexField back = read_field(buf);
    CHECK(back.grid() == g);
    for (std::size_t p = 0; p < f.size(); ++p)
        CHECK(back[p] == f[p]);

    std::stringstream bad("NOTAFILE........................");
    CHECK_THROWS(read_field(bad));
}
