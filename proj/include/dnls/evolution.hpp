#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dnls/errors.hpp"
#include "dnls/functionals.hpp"
#include "dnls/grid.hpp"
#include "dnls/problem.hpp"

namespace dnls {

/// Exact solution at time tau of the pointwise ODE
///   i z' + i a |z|^{2 s2} z = |z|^{2 s1} z + V |z|^{2 s3} z.
/// The modulus obeys y' = -2 a y^{s2+1} (y = |z|^2) and the phase rotates by
/// minus the time integral of y^{s1} + V y^{s3}.
Complex nonlinear_flow_pointwise(Complex z, double a, double V, const Exponents& e, double tau);

struct SimState {
    double t = 0.0;
    ComplexField u;
    long step = 0;
};

/// Strang splitting stepper: half free flow, exact pointwise nonlinear flow
/// over dt, half free flow. Holds scratch storage and cached multipliers, so
/// one instance serves a whole run.
class StrangStepper {
public:
    StrangStepper(const ProblemSpec& spec, double dt, bool dealias = false);

    /// Advances state in place. Throws NumericalError on non-finite output.
    void step(SimState& state);

    /// Spectrum of the state produced by the last step.
    const ComplexField& last_spectrum() const { return spectrum_; }
    double dt() const { return dt_; }

private:
    const ProblemSpec* spec_;
    double dt_;
    bool dealias_;
    ComplexVector half_phase_;
    ComplexField spectrum_;
};

SimState strang_step(const SimState& state, const ProblemSpec& spec, double dt);

struct Checkpoint {
    FunctionalRecord record;
    CumulativeAccumulators accum;
};

/// Time-ordered functional records with the cumulative integrals at each checkpoint.
struct DiagnosticsSeries {
    double dt = 0.0;
    Exponents exponents;
    double lambda = 0.0;
    double eta = 1.0;
    std::vector<Checkpoint> checkpoints;
    /// Fraction of ||u0||_{H^1}^2 carried by the top third of the frequency band.
    double initial_high_band_fraction = 0.0;
    std::optional<double> first_leak_time;
};

struct StepView {
    long step;
    double t;
    const ComplexField& u;
    const Checkpoint* checkpoint;  ///< non-null on checkpoint steps
};

class Observer {
public:
    virtual ~Observer() = default;
    virtual void on_step(const StepView& view) = 0;
};

struct EvolveOptions {
    double T = 1.0;
    double dt = 1e-2;
    int cadence = 10;
    bool dealias = false;
    bool interaction_B = false;
    double lambda = 0.0;
    double eta = 1.0;
    double leak_tol = 1e-8;
    /// Refinement factor for the chi-weighted quadrature (I and virial pieces); 1 disables.
    int virial_oversample = 1;
    /// Warn on stderr when the shell mass first exceeds leak_tol M(0).
    bool warn_on_leak = false;
};

/// Thrown when a step produces non-finite values; carries the series up to the
/// last good checkpoint.
class EvolutionAborted : public NumericalError {
public:
    EvolutionAborted(const std::string& what, DiagnosticsSeries partial)
        : NumericalError(what), partial_(std::move(partial))
    {
    }
    const DiagnosticsSeries& partial() const { return partial_; }

private:
    DiagnosticsSeries partial_;
};

/// Number of fixed steps covering [0, T]; throws ConfigError if T/dt is not an integer.
long step_count(double T, double dt);

/// Runs the stepper to T with diagnostics at every step (trapezoidal
/// accumulators) and functional records every `cadence` steps and at T.
DiagnosticsSeries evolve(const SimState& initial, const ProblemSpec& spec, const EvolveOptions& options,
                         std::span<Observer* const> observers = {});

/// Share of (1+|k|^2)|u_hat|^2 in modes with max_j |m_j| > N/3.
double high_band_fraction(const ComplexField& u);

} // namespace dnls
