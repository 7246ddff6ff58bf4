#pragma once

#include "dnls/grid.hpp"
#include "dnls/profiles.hpp"

namespace dnls {

/// Exponents of the defocusing term |u|^{2 s1} u, the damping i a |u|^{2 s2} u
/// and the potential term V |u|^{2 s3} u.
struct Exponents {
    double sigma1 = 1.0;
    double sigma2 = 1.0;
    double sigma3 = 0.5;
};

/// Enforces 0 < s1 < 2, 0 < s2 <= s1, 0 < s3 < s1.
void validate(const Exponents& e);

/// Tolerance used whenever two exponents are compared for equality.
inline constexpr double kExponentTol = 1e-12;

bool exponents_equal(double a, double b);

/// Everything the right-hand side of the equation needs: exponents and the
/// time-independent coefficient profiles evaluated once on the grid.
struct ProblemSpec {
    Exponents exponents;
    EvaluatedProfile damping;
    EvaluatedProfile potential;
    /// Test hook: when false the nonlinear stage is skipped (free evolution).
    bool nonlinear = true;

    const Grid& grid() const { return damping.grid; }
};

ProblemSpec make_problem(const Grid& grid, const Exponents& exps, const ProfileSpec& a, const ProfileSpec& V);

} // namespace dnls
