#pragma once

#include <array>
#include <limits>
#include <optional>
#include <vector>

#include "dnls/grid.hpp"
#include "dnls/problem.hpp"

namespace dnls {

/// A physical-space field together with its spectrum and spectral gradient.
struct FieldDerivatives {
    ComplexField u;
    ComplexField spectrum;
    std::vector<ComplexField> grad;
};

/// Builds derivatives from a physical field; pass the spectrum if already known.
FieldDerivatives derivatives(const ComplexField& u, const ComplexField* spectrum = nullptr);

struct EnergyParts {
    double kinetic = 0.0;     ///< (1/2) int |grad u|^2
    double defocusing = 0.0;  ///< int |u|^{2 s1+2} / (2 s1+2)
    double potential = 0.0;   ///< int V |u|^{2 s3+2} / (2 s3+2)
    double total() const { return kinetic + defocusing + potential; }
};

struct FunctionalRecord {
    double t = 0.0;
    double mass = 0.0;
    EnergyParts energy;
    double energy_plus = 0.0;       ///< E + Lambda M
    double morawetz = 0.0;          ///< Im int conj(u) grad u . x/<x>
    double modified_energy = 0.0;   ///< E_+ - eta I
    double interaction_B = std::numeric_limits<double>::quiet_NaN();
    double h1 = 0.0;
    double shell_mass = 0.0;
    double grad_l2 = 0.0;           ///< ||grad u||_{L^2}
};

/// Instantaneous spatial integrals whose time integrals the identities and
/// bounds need.
struct RateTerms {
    double diss_mass = 0.0;  ///< int a |u|^{2 s2+2}
    /// Energy-law pieces: a|u|^{2s1+2s2+2}, aV|u|^{2s3+2s2+2}, a|u|^{2s2}|grad u|^2,
    /// 2 s2 a |u|^{2s2}|grad|u||^2, Delta a |u|^{2s2+2}/(2s2+2).
    std::array<double, 5> energy{};
    double led = 0.0;        ///< int |grad u|^2/<x>^3 + |u|^{2s1+2}/<x> + |u|^2/<x>^7
    double a_int = 0.0;      ///< int a |u|^{2s2}(|u|^{2s1+2} + |grad u|^2 + |u|^2)
    double l4 = 0.0;         ///< int |u|^4
    double l2s2 = 0.0;       ///< int |u|^{2 s2+2}
    /// Virial pieces with chi = <x>: 2 D^2chi grad u.grad conj u, -(1/2) Delta^2 chi |u|^2,
    /// s1/(s1+1) Delta chi |u|^{2s1+2}, s3/(s3+1) Delta chi V |u|^{2s3+2},
    /// -1/(s3+1) |u|^{2s3+2} grad chi.grad V, -2 a |u|^{2s2} grad chi . Im(conj u grad u).
    std::array<double, 6> virial{};
};

struct CumulativeAccumulators {
    double t = 0.0;
    double diss_mass = 0.0;
    std::array<double, 5> energy{};
    double led = 0.0;
    double a_int = 0.0;
    double l4 = 0.0;
    double l2s2 = 0.0;
    std::array<double, 6> virial{};

    double virial_total() const;
    /// Time integral of dE/dt predicted by the energy law.
    double energy_rhs() const;
};

/// Everything evaluated in one pass over a snapshot.
struct SnapshotIntegrals {
    FunctionalRecord record;
    RateTerms rates;
};

/// Quadrature of the chi-weighted integrals (I and the virial pieces) on a grid
/// refined by an integer factor. The weights built from <x> have poles at
/// distance 1 from the real axis, so the plain trapezoid rule on spacing h
/// carries an error of order k^3 exp(-2 pi/h) with k = 2 pi/h; at h = 0.5 this
/// is about 1e-2 of the Delta^2 chi term. The field is band-limited, so
/// zero-padding its spectrum interpolates it exactly onto the finer grid.
class VirialQuadrature {
public:
    VirialQuadrature(const ProblemSpec& spec, int factor);

    int factor() const { return factor_; }
    const Grid& fine_grid() const { return fine_; }

    /// Recomputes record.morawetz and rates.virial from the refined samples.
    void apply(const FieldDerivatives& f, const ProblemSpec& spec, FunctionalRecord& record, RateTerms& rates) const;

private:
    int factor_;
    Grid fine_;
    RealVector a_, V_;
    std::array<RealVector, 3> grad_v_;
};

/// M, E (by parts), E_+, I, modified energy, h1, shell mass and all rate terms.
/// Interaction B is filled only when with_interaction is set. With `refined`,
/// I and the virial pieces come from the refined quadrature.
SnapshotIntegrals integrate_snapshot(const FieldDerivatives& f, double t, const ProblemSpec& spec, double lambda,
                                     double eta, bool with_interaction = false,
                                     const VirialQuadrature* refined = nullptr);

FunctionalRecord compute_record(const ComplexField& u, double t, const ProblemSpec& spec, double lambda, double eta,
                                bool with_interaction = true);

/// B = int Im(conj u grad u)(x) . (K * |u|^2)(x) dx with K(z) = z/|z|, K(0) = 0,
/// by periodic convolution on the box.
double compute_interaction_B(const ComplexField& u);
double compute_interaction_B(const FieldDerivatives& f);

/// Trapezoidal accumulation of the rate terms in time.
class AccumulatorIntegrator {
public:
    void add(double t, const RateTerms& rates);
    const CumulativeAccumulators& totals() const { return totals_; }
    bool started() const { return started_; }

private:
    bool started_ = false;
    double last_t_ = 0.0;
    RateTerms last_{};
    CumulativeAccumulators totals_{};
};

/// Single trapezoid update of `accums` over [t0, t1].
void accumulate_increments(CumulativeAccumulators& accums, const RateTerms& at_t0, const RateTerms& at_t1, double t0,
                           double t1);

} // namespace dnls
