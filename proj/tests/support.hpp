#pragma once

// Shared helpers for the unit tests: seeded random fields and error norms.

#include <cmath>
#include <random>

#include "dnls/grid.hpp"
#include "dnls/spectral.hpp"

namespace testing_support {

/// Max |a - b| / max |b|, over all samples.
inline double rel_max_error(const dnls::ComplexField& a, const dnls::ComplexField& b)
{
    double num = 0.0, den = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p) {
        num = std::max(num, std::abs(a[p] - b[p]));
        den = std::max(den, std::abs(b[p]));
    }
    return den > 0.0 ? num / den : num;
}

/// ||a - b||_2 / ||b||_2 over samples.
inline double rel_l2_error(const dnls::ComplexField& a, const dnls::ComplexField& b)
{
    double num = 0.0, den = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p) {
        num += std::norm(a[p] - b[p]);
        den += std::norm(b[p]);
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

/// White complex Gaussian samples (not smooth).
inline dnls::ComplexField white_field(const dnls::Grid& g, std::mt19937_64& rng)
{
    std::normal_distribution<double> n;
    dnls::ComplexField f(g);
    for (std::size_t p = 0; p < f.size(); ++p) {
        const double re = n(rng);
        f[p] = dnls::Complex(re, n(rng));
    }
    return f;
}

/// Smooth localized random field: a Gaussian envelope of width w times a
/// random band-limited modulation (modes with max |m| <= cutoff).
inline dnls::ComplexField smooth_field(const dnls::Grid& g, std::mt19937_64& rng, double w = 2.0, int cutoff = 3,
                                       double amplitude = 1.0)
{
    dnls::ComplexField spec = dnls::to_frequency(white_field(g, rng));
    const auto& mm = dnls::SpectralContext::of(g)->max_abs_mode();
    for (std::size_t p = 0; p < spec.size(); ++p)
        if (mm[p] > cutoff)
            spec[p] = 0.0;
    dnls::ComplexField mod = dnls::to_physical(spec);
    double peak = 0.0;
    for (std::size_t p = 0; p < mod.size(); ++p)
        peak = std::max(peak, std::abs(mod[p]));
    dnls::ComplexField out(g);
    for (std::size_t p = 0; p < out.size(); ++p) {
        const dnls::Point x = g.point(p);
        double r2 = 0.0;
        for (int j = 0; j < g.dim(); ++j)
            r2 += x[j] * x[j];
        out[p] = amplitude * std::exp(-r2 / (w * w)) * mod[p] / peak;
    }
    return out;
}

} // namespace testing_support
