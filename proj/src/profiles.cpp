#include "dnls/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dnls/errors.hpp"

namespace dnls {

namespace {

constexpr std::size_t kMaxTerms = 8;

ProfileSpec single(const Primitive& p)
{
    ProfileSpec s;
    s.terms.push_back(p);
    return s;
}

double norm2(const Point& x, int dim)
{
    double r2 = 0.0;
    for (int j = 0; j < dim; ++j)
        r2 += x[j] * x[j];
    return r2;
}

// Quintic smoothstep P(s) = 6s^5 - 15s^4 + 10s^3 and its first two derivatives.
struct Smoothstep {
    double p, dp, ddp;
};

Smoothstep smoothstep(double s)
{
    if (s <= 0.0)
        return {0.0, 0.0, 0.0};
    if (s >= 1.0)
        return {1.0, 0.0, 0.0};
    const double s2 = s * s;
    const double s3 = s2 * s;
    return {s3 * (10.0 + s * (-15.0 + 6.0 * s)),
            30.0 * s2 * (s - 1.0) * (s - 1.0),
            60.0 * s * (2.0 * s - 1.0) * (s - 1.0)};
}

ProfileSample plateau_sample(double A, double r1, double r2, const Point& x, int dim)
{
    ProfileSample out;
    const double r = std::sqrt(norm2(x, dim));
    const double width = r2 - r1;
    const auto st = smoothstep((r - r1) / width);
    out.value = A * (1.0 - st.p);
    if (r > r1 && r < r2) {
        const double fr = -A * st.dp / width;
        const double frr = -A * st.ddp / (width * width);
        for (int j = 0; j < dim; ++j)
            out.gradient[j] = fr * x[j] / r;
        out.laplacian = frr + (dim - 1) * fr / r;
    }
    return out;
}

} // namespace

std::string to_string(ProfileKind kind)
{
    switch (kind) {
    case ProfileKind::zero: return "zero";
    case ProfileKind::constant: return "constant";
    case ProfileKind::gaussian: return "gaussian";
    case ProfileKind::plateau: return "plateau";
    case ProfileKind::polynomial_decay: return "polynomial";
    case ProfileKind::asymptotically_flat: return "flat";
    }
    return "unknown";
}

ProfileSpec ProfileSpec::zero() { return single({ProfileKind::zero}); }

ProfileSpec ProfileSpec::constant(double c)
{
    Primitive p{ProfileKind::constant};
    p.amplitude = c;
    return single(p);
}

ProfileSpec ProfileSpec::gaussian(double amplitude, double width, Point center)
{
    Primitive p{ProfileKind::gaussian};
    p.amplitude = amplitude;
    p.width = width;
    p.center = center;
    return single(p);
}

ProfileSpec ProfileSpec::plateau(double amplitude, double r1, double r2)
{
    Primitive p{ProfileKind::plateau};
    p.amplitude = amplitude;
    p.r1 = r1;
    p.r2 = r2;
    return single(p);
}

ProfileSpec ProfileSpec::polynomial_decay(double amplitude, double rate)
{
    Primitive p{ProfileKind::polynomial_decay};
    p.amplitude = amplitude;
    p.rate = rate;
    return single(p);
}

ProfileSpec ProfileSpec::asymptotically_flat(double amplitude, double r1, double r2)
{
    Primitive p{ProfileKind::asymptotically_flat};
    p.amplitude = amplitude;
    p.r1 = r1;
    p.r2 = r2;
    return single(p);
}

ProfileSpec ProfileSpec::sum(const std::vector<ProfileSpec>& parts)
{
    ProfileSpec out;
    for (const auto& part : parts)
        for (auto term : part.terms) {
            // Fold each part's sign into its terms. Flat terms carry an
            // implicit 1, so a negated flat term becomes a constant plus a plateau.
            if (part.sign < 0.0 && term.kind == ProfileKind::asymptotically_flat) {
                out.terms.push_back({ProfileKind::constant, -1.0});
                term.kind = ProfileKind::plateau;
            } else {
                term.amplitude *= part.sign;
            }
            out.terms.push_back(term);
        }
    return out;
}

ProfileSpec ProfileSpec::scaled(double factor) const
{
    ProfileSpec out = *this;
    for (auto& t : out.terms) {
        if (t.kind == ProfileKind::asymptotically_flat)
            throw ConfigError("cannot rescale a flat profile term; scale its plateau instead");
        t.amplitude *= factor;
    }
    return out;
}

void validate(const ProfileSpec& spec)
{
    if (spec.terms.empty())
        throw ConfigError("profile has no terms");
    if (spec.terms.size() > kMaxTerms)
        throw ConfigError("profile sums are limited to 8 primitives");
    if (spec.sign != 1.0 && spec.sign != -1.0)
        throw ConfigError("profile sign must be +1 or -1");
    for (const auto& t : spec.terms) {
        if (!std::isfinite(t.amplitude))
            throw ConfigError("profile amplitude must be finite");
        switch (t.kind) {
        case ProfileKind::gaussian:
            if (!(t.width > 0.0))
                throw ConfigError("gaussian width must be positive");
            break;
        case ProfileKind::plateau:
        case ProfileKind::asymptotically_flat:
            if (!(t.r1 > 0.0) || !(t.r2 > t.r1))
                throw ConfigError("plateau radii must satisfy 0 < r1 < r2");
            break;
        case ProfileKind::polynomial_decay:
            if (!(t.rate > 0.0))
                throw ConfigError("polynomial decay rate must be positive");
            break;
        default:
            break;
        }
    }
}

ProfileSample sample(const Primitive& prim, const Point& x, int dim)
{
    ProfileSample out;
    switch (prim.kind) {
    case ProfileKind::zero:
        break;
    case ProfileKind::constant:
        out.value = prim.amplitude;
        break;
    case ProfileKind::gaussian: {
        Point dx{0.0, 0.0, 0.0};
        for (int j = 0; j < dim; ++j)
            dx[j] = x[j] - prim.center[j];
        const double w2 = prim.width * prim.width;
        const double r2 = norm2(dx, dim);
        const double g = prim.amplitude * std::exp(-r2 / w2);
        out.value = g;
        for (int j = 0; j < dim; ++j)
            out.gradient[j] = -2.0 * dx[j] / w2 * g;
        out.laplacian = g * (4.0 * r2 / (w2 * w2) - 2.0 * dim / w2);
        break;
    }
    case ProfileKind::plateau:
        out = plateau_sample(prim.amplitude, prim.r1, prim.r2, x, dim);
        break;
    case ProfileKind::polynomial_decay: {
        const double jx2 = 1.0 + norm2(x, dim);
        const double m = prim.rate;
        const double v = prim.amplitude * std::pow(jx2, -0.5 * m);
        out.value = v;
        for (int j = 0; j < dim; ++j)
            out.gradient[j] = -m * v * x[j] / jx2;
        // Delta <x>^-m = -m(d-m-2)<x>^(-m-2) - m(m+2)<x>^(-m-4)
        out.laplacian = v * (-m * (dim - m - 2.0) / jx2 - m * (m + 2.0) / (jx2 * jx2));
        break;
    }
    case ProfileKind::asymptotically_flat: {
        const auto p = plateau_sample(prim.amplitude, prim.r1, prim.r2, x, dim);
        out.value = 1.0 - p.value;
        for (int j = 0; j < dim; ++j)
            out.gradient[j] = -p.gradient[j];
        out.laplacian = -p.laplacian;
        break;
    }
    }
    return out;
}

ProfileSample sample(const ProfileSpec& spec, const Point& x, int dim)
{
    ProfileSample out;
    for (const auto& t : spec.terms) {
        const auto s = sample(t, x, dim);
        out.value += s.value;
        for (int j = 0; j < 3; ++j)
            out.gradient[j] += s.gradient[j];
        out.laplacian += s.laplacian;
    }
    out.value *= spec.sign;
    for (auto& g : out.gradient)
        g *= spec.sign;
    out.laplacian *= spec.sign;
    return out;
}

DecayInfo decay_info(const ProfileSpec& spec, int dim)
{
    constexpr double inf = DecayInfo::infinite;
    DecayInfo info;
    int flat_terms = 0;
    bool rest_compact = true;
    for (const auto& t : spec.terms) {
        const double signed_amp = spec.sign * t.amplitude;
        DecayInfo ti;
        switch (t.kind) {
        case ProfileKind::zero:
        case ProfileKind::gaussian:
        case ProfileKind::plateau:
            break;
        case ProfileKind::constant:
            ti.value = t.amplitude == 0.0 ? inf : 0.0;
            ti.trapping = signed_amp < 0.0 ? 0.0 : inf;
            break;
        case ProfileKind::polynomial_decay:
            ti.value = t.rate;
            ti.gradient = t.rate + 1.0;
            ti.laplacian = (dim - t.rate - 2.0 == 0.0) ? t.rate + 4.0 : t.rate + 2.0;
            ti.trapping = signed_amp < 0.0 ? t.rate : inf;
            break;
        case ProfileKind::asymptotically_flat:
            ti.value = 0.0;
            ti.trapping = spec.sign < 0.0 ? 0.0 : inf;
            break;
        }
        info.value = std::min(info.value, ti.value);
        info.gradient = std::min(info.gradient, ti.gradient);
        info.laplacian = std::min(info.laplacian, ti.laplacian);
        info.trapping = std::min(info.trapping, ti.trapping);

        if (t.kind == ProfileKind::asymptotically_flat
            || (t.kind == ProfileKind::constant && t.amplitude == 1.0))
            ++flat_terms;
        else if (!(t.kind == ProfileKind::zero || t.kind == ProfileKind::plateau
                   || (t.kind == ProfileKind::constant && t.amplitude == 0.0)))
            rest_compact = false;
    }
    info.one_minus_compact = spec.sign > 0.0 && flat_terms == 1 && rest_compact;
    return info;
}

EvaluatedProfile evaluate(const ProfileSpec& spec, const Grid& grid, ProfileRole role)
{
    validate(spec);
    EvaluatedProfile ev;
    ev.grid = grid;
    ev.spec = spec;
    const std::size_t n = grid.size();
    ev.value.resize(n);
    ev.laplacian.resize(n);
    for (auto& g : ev.gradient)
        g.assign(n, 0.0);
    const int d = grid.dim();
    for (std::size_t p = 0; p < n; ++p) {
        const auto s = sample(spec, grid.point(p), d);
        ev.value[p] = s.value;
        for (int j = 0; j < d; ++j)
            ev.gradient[j][p] = s.gradient[j];
        ev.laplacian[p] = s.laplacian;
        ev.sup_norm = std::max(ev.sup_norm, std::abs(s.value));
    }
    if (role == ProfileRole::damping) {
        const double tol = 1e-14 * std::max(1.0, ev.sup_norm);
        for (std::size_t p = 0; p < n; ++p) {
            if (ev.value[p] < -tol) {
                std::ostringstream msg;
                msg << "damping must be nonnegative: a = " << ev.value[p] << " at sample " << p;
                throw ConfigError(msg.str());
            }
            ev.value[p] = std::max(ev.value[p], 0.0);
        }
    }
    return ev;
}

RealVector trapping_part(const EvaluatedProfile& V)
{
    const Grid& g = V.grid;
    RealVector out(g.size());
    for (std::size_t p = 0; p < g.size(); ++p) {
        const Point x = g.point(p);
        double radial = 0.0;
        for (int j = 0; j < g.dim(); ++j)
            radial += V.gradient[j][p] * x[j];
        out[p] = std::max(-V.value[p], 0.0) + std::max(radial, 0.0);
    }
    return out;
}

} // namespace dnls
