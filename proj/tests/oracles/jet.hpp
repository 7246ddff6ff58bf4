#pragma once

// Truncated multivariate Taylor polynomials in three variables up to total
// degree four. Used as an automatic-differentiation oracle for the closed-form
// weight derivatives: seed x_j = x0_j + e_j, evaluate the expression, and read
// partial derivatives off the coefficients (d^alpha f = alpha! c_alpha).

#include <array>
#include <cmath>

namespace oracle {

// Coefficients are long double: the bi-Laplacian of <x> is a cancellation of
// terms of size 1/<x>^3 down to 15/<x>^7, which double cannot resolve far out.
using Real = long double;

class Jet {
public:
    static constexpr int kDeg = 4;

    Jet() { c_.fill(0.0); }
    explicit Jet(Real constant) : Jet() { at(0, 0, 0) = constant; }

    static Jet variable(int axis, double x0)
    {
        Jet j(x0);
        const int e[3] = {axis == 0, axis == 1, axis == 2};
        j.at(e[0], e[1], e[2]) = 1.0;
        return j;
    }

    Real& at(int i, int j, int k) { return c_[index(i, j, k)]; }
    Real at(int i, int j, int k) const { return c_[index(i, j, k)]; }

    /// Partial derivative d^{i+j+k} / dx^i dy^j dz^k at the expansion point.
    Real derivative(int i, int j, int k) const { return factorial(i) * factorial(j) * factorial(k) * at(i, j, k); }

    friend Jet operator+(Jet a, const Jet& b)
    {
        for (std::size_t n = 0; n < a.c_.size(); ++n)
            a.c_[n] += b.c_[n];
        return a;
    }
    friend Jet operator-(Jet a, const Jet& b)
    {
        for (std::size_t n = 0; n < a.c_.size(); ++n)
            a.c_[n] -= b.c_[n];
        return a;
    }
    friend Jet operator*(Real s, Jet a)
    {
        for (Real& v : a.c_)
            v *= s;
        return a;
    }
    friend Jet operator*(const Jet& a, const Jet& b)
    {
        Jet out;
        for (int i = 0; i <= kDeg; ++i)
            for (int j = 0; i + j <= kDeg; ++j)
                for (int k = 0; i + j + k <= kDeg; ++k) {
                    const Real av = a.at(i, j, k);
                    if (av == 0.0)
                        continue;
                    for (int p = 0; i + j + k + p <= kDeg; ++p)
                        for (int q = 0; i + j + k + p + q <= kDeg; ++q)
                            for (int r = 0; i + j + k + p + q + r <= kDeg; ++r)
                                out.at(i + p, j + q, k + r) += av * b.at(p, q, r);
                }
        return out;
    }

    /// f(a)^p by the univariate Taylor series of s -> s^p around the constant term.
    friend Jet pow(const Jet& f, Real p)
    {
        const Real a = f.at(0, 0, 0);
        Jet h = f;
        h.at(0, 0, 0) = 0.0;
        Jet out(std::pow(a, p));
        Jet hn(1.0);
        Real coeff = 1.0;  // p (p-1) ... (p-n+1) / n!
        for (int n = 1; n <= kDeg; ++n) {
            hn = hn * h;
            coeff *= (p - (n - 1)) / n;
            out = out + (coeff * std::pow(a, p - n)) * hn;
        }
        return out;
    }

private:
    static int index(int i, int j, int k) { return (i * (kDeg + 1) + j) * (kDeg + 1) + k; }
    static Real factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }
    std::array<Real, (kDeg + 1) * (kDeg + 1) * (kDeg + 1)> c_;
};

/// Derivatives of a scalar function at x0 in dimension d, from one jet.
struct JetDerivatives {
    double value;
    std::array<double, 3> grad;
    std::array<std::array<double, 3>, 3> hessian;
    double laplacian;
    double bilaplacian;
};

inline JetDerivatives read_derivatives(const Jet& f, int d)
{
    JetDerivatives out{};
    out.value = static_cast<double>(f.at(0, 0, 0));
    Real lap = 0.0L, bilap = 0.0L;
    const int unit[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int a = 0; a < d; ++a) {
        out.grad[a] = static_cast<double>(f.derivative(unit[a][0], unit[a][1], unit[a][2]));
        for (int b = 0; b < d; ++b) {
            const int e[3] = {unit[a][0] + unit[b][0], unit[a][1] + unit[b][1], unit[a][2] + unit[b][2]};
            out.hessian[a][b] = static_cast<double>(f.derivative(e[0], e[1], e[2]));
        }
        lap += f.derivative(2 * unit[a][0], 2 * unit[a][1], 2 * unit[a][2]);
    }
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            const int e[3] = {2 * unit[a][0] + 2 * unit[b][0], 2 * unit[a][1] + 2 * unit[b][1],
                              2 * unit[a][2] + 2 * unit[b][2]};
            bilap += f.derivative(e[0], e[1], e[2]);
        }
    out.laplacian = static_cast<double>(lap);
    out.bilaplacian = static_cast<double>(bilap);
    return out;
}

/// <x> = (1 + |x|^2)^{1/2} as a jet around x0 (first d coordinates active).
inline Jet bracket_jet(const std::array<double, 3>& x0, int d)
{
    Jet s(1.0);
    for (int a = 0; a < d; ++a) {
        const Jet xa = Jet::variable(a, x0[a]);
        s = s + xa * xa;
    }
    return pow(s, 0.5);
}

/// |x| as a jet around x0 != 0.
inline Jet norm_jet(const std::array<double, 3>& x0, int d)
{
    Jet s;
    for (int a = 0; a < d; ++a) {
        const Jet xa = Jet::variable(a, x0[a]);
        s = s + xa * xa;
    }
    return pow(s, 0.5);
}

} // namespace oracle
