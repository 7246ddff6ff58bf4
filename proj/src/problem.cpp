#include "dnls/problem.hpp"

#include <cmath>

#include "dnls/errors.hpp"

namespace dnls {

bool exponents_equal(double a, double b) { return std::abs(a - b) <= kExponentTol; }

void validate(const Exponents& e)
{
    const bool ok = e.sigma1 > 0.0 && e.sigma1 < 2.0
        && e.sigma2 > 0.0 && (e.sigma2 <= e.sigma1 || exponents_equal(e.sigma2, e.sigma1))
        && e.sigma3 > 0.0 && e.sigma3 < e.sigma1 && !exponents_equal(e.sigma3, e.sigma1);
    if (!ok)
        throw ConfigError("exponents must satisfy 0<sigma1<2, 0<sigma2<=sigma1, 0<sigma3<sigma1 "
                          "(0<σ₂≤σ₁, 0<σ₃<σ₁)");
}

ProblemSpec make_problem(const Grid& grid, const Exponents& exps, const ProfileSpec& a, const ProfileSpec& V)
{
    validate(exps);
    ProblemSpec spec;
    spec.exponents = exps;
    spec.damping = evaluate(a, grid, ProfileRole::damping);
    spec.potential = evaluate(V, grid, ProfileRole::potential);
    return spec;
}

} // namespace dnls
