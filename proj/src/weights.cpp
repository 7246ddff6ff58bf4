#include "dnls/weights.hpp"

#include <cmath>

namespace dnls::weight {

double bracket(const Point& x, int dim)
{
    double r2 = 0.0;
    for (int j = 0; j < dim; ++j)
        r2 += x[j] * x[j];
    return std::sqrt(1.0 + r2);
}

ChiStack chi_stack(const Point& x, int dim)
{
    ChiStack s{};
    s.chi = bracket(x, dim);
    s.inv_jx = 1.0 / s.chi;
    const double i2 = s.inv_jx * s.inv_jx;
    s.inv_jx3 = s.inv_jx * i2;
    const double i5 = s.inv_jx3 * i2;
    const double i7 = i5 * i2;
    s.grad = {0.0, 0.0, 0.0};
    for (int j = 0; j < dim; ++j)
        s.grad[j] = x[j] * s.inv_jx;
    const double d = dim;
    s.lap = (d - 1.0) * s.inv_jx + s.inv_jx3;
    s.bilap = -(d - 1.0) * (d - 3.0) * s.inv_jx3 - (6.0 * d - 18.0) * i5 - 15.0 * i7;
    return s;
}

double chi_hessian_form(const Point& x, const Point& xi, int dim)
{
    const double jx = bracket(x, dim);
    double xi2 = 0.0, dot = 0.0;
    for (int j = 0; j < dim; ++j) {
        xi2 += xi[j] * xi[j];
        dot += x[j] * xi[j];
    }
    return xi2 / jx - dot * dot / (jx * jx * jx);
}

double chi_hessian_form(const Point& x, const std::array<Complex, 3>& v, int dim)
{
    const double jx = bracket(x, dim);
    double v2 = 0.0;
    Complex dot{0.0, 0.0};
    for (int j = 0; j < dim; ++j) {
        v2 += std::norm(v[j]);
        dot += x[j] * v[j];
    }
    return v2 / jx - std::norm(dot) / (jx * jx * jx);
}

RhoStack rho_stack(const Point& z, int dim)
{
    double r2 = 0.0;
    for (int j = 0; j < dim; ++j)
        r2 += z[j] * z[j];
    const double r = std::sqrt(r2);
    RhoStack s{};
    s.grad = {0.0, 0.0, 0.0};
    for (int j = 0; j < dim; ++j)
        s.grad[j] = z[j] / r;
    s.lap = (dim - 1.0) / r;
    return s;
}

} // namespace dnls::weight
