#pragma once

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "dnls/grid.hpp"

namespace dnls {

enum class ProfileKind { zero, constant, gaussian, plateau, polynomial_decay, asymptotically_flat };

std::string to_string(ProfileKind kind);

/// One closed-form building block.
///   constant            c = amplitude
///   gaussian            A exp(-|x - x0|^2 / w^2)
///   plateau             A (1 - S((|x| - r1)/(r2 - r1))), S the quintic smoothstep
///   polynomial_decay    A <x>^(-m)
///   asymptotically_flat 1 - plateau(A, r1, r2)
struct Primitive {
    ProfileKind kind = ProfileKind::zero;
    double amplitude = 1.0;
    Point center{0.0, 0.0, 0.0};
    double width = 1.0;
    double r1 = 1.0;
    double r2 = 2.0;
    double rate = 1.0;
};

/// A profile is sign * (sum of up to 8 primitives).
struct ProfileSpec {
    std::vector<Primitive> terms;
    double sign = 1.0;

    static ProfileSpec zero();
    static ProfileSpec constant(double c);
    static ProfileSpec gaussian(double amplitude, double width, Point center = {0.0, 0.0, 0.0});
    static ProfileSpec plateau(double amplitude, double r1, double r2);
    static ProfileSpec polynomial_decay(double amplitude, double rate);
    static ProfileSpec asymptotically_flat(double amplitude, double r1, double r2);
    static ProfileSpec sum(const std::vector<ProfileSpec>& parts);

    ProfileSpec scaled(double factor) const;
};

/// Throws ConfigError for non-positive widths/radii, r1 >= r2, too many terms, sign not +-1.
void validate(const ProfileSpec& spec);

struct ProfileSample {
    double value = 0.0;
    Point gradient{0.0, 0.0, 0.0};
    double laplacian = 0.0;
};

ProfileSample sample(const ProfileSpec& spec, const Point& x, int dim);
ProfileSample sample(const Primitive& prim, const Point& x, int dim);

/// Polynomial decay exponents: the largest m with |f| <~ <x>^(-m).
/// Infinity for compactly supported or Gaussian behaviour.
struct DecayInfo {
    static constexpr double infinite = std::numeric_limits<double>::infinity();
    bool known = true;
    double value = infinite;
    double gradient = infinite;
    double laplacian = infinite;
    /// Decay of V_- + (grad V . x)_+ (a conservative bound for sums).
    double trapping = infinite;
    /// 1 - f is compactly supported.
    bool one_minus_compact = false;
};

DecayInfo decay_info(const ProfileSpec& spec, int dim);

enum class ProfileRole { damping, potential, generic };

/// Closed-form samples of a profile and its derivatives on a grid. Immutable.
struct EvaluatedProfile {
    Grid grid;
    ProfileSpec spec;
    RealVector value;
    std::array<RealVector, 3> gradient;
    RealVector laplacian;
    double sup_norm = 0.0;
};

/// Evaluates value, gradient and Laplacian analytically. A damping profile
/// with a negative sample is rejected.
EvaluatedProfile evaluate(const ProfileSpec& spec, const Grid& grid, ProfileRole role = ProfileRole::generic);

/// Pointwise V_- + (grad V . x)_+.
RealVector trapping_part(const EvaluatedProfile& V);

} // namespace dnls
