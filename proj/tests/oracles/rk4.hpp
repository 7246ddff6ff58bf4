#pragma once

// Adaptive classical RK4 with step doubling for the pointwise damped phase ODE
//   z' = -a |z|^{2 s2} z - i (|z|^{2 s1} + V |z|^{2 s3}) z
// written as a real 2D system. Independent of the closed-form flow.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

namespace oracle {

struct PointwiseOde {
    double a, V, s1, s2, s3;

    std::array<double, 2> rhs(const std::array<double, 2>& s) const
    {
        const double y = s[0] * s[0] + s[1] * s[1];
        const double damp = y > 0.0 ? a * std::pow(y, s2) : 0.0;
        const double rot = y > 0.0 ? std::pow(y, s1) + V * std::pow(y, s3) : 0.0;
        // (x + i y)' = -damp (x + i y) - i rot (x + i y)
        return {-damp * s[0] + rot * s[1], -damp * s[1] - rot * s[0]};
    }

    std::array<double, 2> rk4(const std::array<double, 2>& s, double h) const
    {
        auto axpy = [](const std::array<double, 2>& u, double c, const std::array<double, 2>& v) {
            return std::array<double, 2>{u[0] + c * v[0], u[1] + c * v[1]};
        };
        const auto k1 = rhs(s);
        const auto k2 = rhs(axpy(s, 0.5 * h, k1));
        const auto k3 = rhs(axpy(s, 0.5 * h, k2));
        const auto k4 = rhs(axpy(s, h, k3));
        return {s[0] + h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
                s[1] + h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
    }
};

inline std::complex<double> rk4_adaptive(const PointwiseOde& ode, std::complex<double> z0, double tau,
                                         double tol = 1e-14)
{
    std::array<double, 2> s{z0.real(), z0.imag()};
    double t = 0.0;
    double h = std::min(tau, 1e-3);
    while (t < tau) {
        h = std::min(h, tau - t);
        const auto full = ode.rk4(s, h);
        const auto half = ode.rk4(ode.rk4(s, 0.5 * h), 0.5 * h);
        const double err = std::hypot(full[0] - half[0], full[1] - half[1]) / 15.0;
        const double scale = std::max(1e-300, std::hypot(half[0], half[1]));
        if (err <= tol * scale || h < 1e-14) {
            // Richardson-extrapolated fifth-order value.
            s = {half[0] + (half[0] - full[0]) / 15.0, half[1] + (half[1] - full[1]) / 15.0};
            t += h;
        }
        const double ratio = err > 0.0 ? tol * scale / err : 32.0;
        h *= std::clamp(0.9 * std::pow(ratio, 0.2), 0.2, 4.0);
    }
    return {s[0], s[1]};
}

} // namespace oracle
