#pragma once

#include "dnls/grid.hpp"

namespace dnls::weight {

/// <x> = sqrt(1 + |x|^2).
double bracket(const Point& x, int dim);

/// Closed-form derivative stack of the Morawetz weight chi(x) = <x> in
/// dimension d. Every weighted functional in the library evaluates chi
/// through this struct.
struct ChiStack {
    double chi;       ///< <x>
    Point grad;       ///< x / <x>
    double lap;       ///< (d-1)/<x> + 1/<x>^3
    double bilap;     ///< Delta^2 chi = -(d-1)(d-3)/<x>^3 - (6d-18)/<x>^5 - 15/<x>^7
    double inv_jx;    ///< 1/<x>
    double inv_jx3;   ///< 1/<x>^3
};

ChiStack chi_stack(const Point& x, int dim);

/// D^2 chi xi . xi = |xi|^2/<x> - (x.xi)^2/<x>^3 for real xi.
double chi_hessian_form(const Point& x, const Point& xi, int dim);

/// Re(D^2 chi v . conj(v)) for a complex vector v.
double chi_hessian_form(const Point& x, const std::array<Complex, 3>& v, int dim);

/// Interaction kernel stack for rho(z) = |z|; undefined at z = 0.
struct RhoStack {
    Point grad;  ///< z / |z|
    double lap;  ///< (d-1)/|z|
};

RhoStack rho_stack(const Point& z, int dim);

} // namespace dnls::weight
