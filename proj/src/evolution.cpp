#include "dnls/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include "dnls/spectral.hpp"

namespace dnls {

namespace {

constexpr double kOriginCutoff = 1e-30;
constexpr double kLogBranchTol = 1e-12;

// (1/tau) y0^{-s} int_0^tau y(s')^s ds' for the damped modulus, written with
// log1p/expm1 so that small 2 s2 a tau y0^{s2} loses no digits.
double mean_power_factor(double sigma, double sigma2, double eps, double log1p_eps)
{
    const double one_minus_p = 1.0 - sigma / sigma2;
    const double log_ratio = eps > 0.0 ? log1p_eps / eps : 1.0;
    double phi = 1.0;
    if (std::abs(one_minus_p) >= kLogBranchTol) {
        const double x = one_minus_p * log1p_eps;
        phi = x == 0.0 ? 1.0 : std::expm1(x) / x;
    }
    return log_ratio * phi;
}

void throw_nonfinite(const ComplexField& u, long step)
{
    std::size_t first_bad = u.size(), argmax = 0;
    double maxmod = -1.0;
    for (std::size_t p = 0; p < u.size(); ++p) {
        const double m = std::abs(u[p]);
        if (!std::isfinite(m)) {
            if (first_bad == u.size())
                first_bad = p;
        } else if (m > maxmod) {
            maxmod = m;
            argmax = p;
        }
    }
    const Point x = u.grid().point(argmax);
    std::ostringstream msg;
    msg << "non-finite field after step " << step << " (first bad sample " << first_bad << "); max finite modulus "
        << maxmod << " at x = (" << x[0] << ", " << x[1] << ", " << x[2] << ")";
    throw NumericalError(msg.str());
}

} // namespace

Complex nonlinear_flow_pointwise(Complex z, double a, double V, const Exponents& e, double tau)
{
    const double r = std::abs(z);
    if (r < kOriginCutoff)
        return z;
    const double y0 = r * r;
    const double y0_s1 = std::pow(y0, e.sigma1);
    const double y0_s3 = std::pow(y0, e.sigma3);
    if (a == 0.0)
        return z * std::polar(1.0, -(y0_s1 + V * y0_s3) * tau);

    const double eps = 2.0 * e.sigma2 * a * tau * std::pow(y0, e.sigma2);
    const double l = std::log1p(eps);
    const double amplitude = std::exp(-0.5 * l / e.sigma2);
    const double phase = tau
        * (y0_s1 * mean_power_factor(e.sigma1, e.sigma2, eps, l)
           + V * y0_s3 * mean_power_factor(e.sigma3, e.sigma2, eps, l));
    return z * amplitude * std::polar(1.0, -phase);
}

StrangStepper::StrangStepper(const ProblemSpec& spec, double dt, bool dealias)
    : spec_(&spec), dt_(dt), dealias_(dealias), spectrum_(spec.grid(), Space::frequency)
{
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw ConfigError("time step must be positive");
    const auto& k2 = SpectralContext::of(spec.grid())->k_squared();
    half_phase_.resize(k2.size());
    for (std::size_t p = 0; p < k2.size(); ++p)
        half_phase_[p] = std::polar(1.0, -0.5 * dt * k2[p]);
}

void StrangStepper::step(SimState& state)
{
    const ProblemSpec& spec = *spec_;
    ComplexField& u = state.u;
    if (u.space() != Space::physical)
        u = to_physical(u);
    auto ctx = SpectralContext::of(u.grid());
    const std::size_t n = u.size();
    Complex* buf = spectrum_.data();

    ctx->forward(u.data(), buf);
    for (std::size_t p = 0; p < n; ++p)
        buf[p] *= half_phase_[p];
    ctx->inverse(buf, u.data());

    if (spec.nonlinear) {
        const auto& a = spec.damping.value;
        const auto& V = spec.potential.value;
        for (std::size_t p = 0; p < n; ++p)
            u[p] = nonlinear_flow_pointwise(u[p], a[p], V[p], spec.exponents, dt_);
    }

    ctx->forward(u.data(), buf);
    if (dealias_)
        truncate_two_thirds(spectrum_);
    for (std::size_t p = 0; p < n; ++p)
        buf[p] *= half_phase_[p];
    ctx->inverse(buf, u.data());

    ++state.step;
    state.t += dt_;
    for (std::size_t p = 0; p < n; ++p)
        if (!std::isfinite(u[p].real()) || !std::isfinite(u[p].imag()))
            throw_nonfinite(u, state.step);
}

SimState strang_step(const SimState& state, const ProblemSpec& spec, double dt)
{
    StrangStepper stepper(spec, dt);
    SimState next = state;
    stepper.step(next);
    return next;
}

long step_count(double T, double dt)
{
    if (!(T >= 0.0) || !(dt > 0.0))
        throw ConfigError("need T >= 0 and dt > 0");
    const double ratio = T / dt;
    const long n = std::lround(ratio);
    if (std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio))
        throw ConfigError("T must be an integer multiple of dt");
    return n;
}

double high_band_fraction(const ComplexField& u)
{
    const ComplexField spec = to_frequency(u);
    auto ctx = SpectralContext::of(u.grid());
    const auto& k2 = ctx->k_squared();
    const auto& mm = ctx->max_abs_mode();
    const int cutoff = u.grid().n() / 3;
    double high = 0.0, total = 0.0;
    for (std::size_t p = 0; p < spec.size(); ++p) {
        const double w = (1.0 + k2[p]) * std::norm(spec[p]);
        total += w;
        if (mm[p] > cutoff)
            high += w;
    }
    return total > 0.0 ? high / total : 0.0;
}

DiagnosticsSeries evolve(const SimState& initial, const ProblemSpec& spec, const EvolveOptions& opt,
                         std::span<Observer* const> observers)
{
    if (opt.cadence < 1)
        throw ConfigError("cadence must be at least 1");
    const long steps = step_count(opt.T, opt.dt);

    DiagnosticsSeries series;
    series.dt = opt.dt;
    series.exponents = spec.exponents;
    series.lambda = opt.lambda;
    series.eta = opt.eta;

    SimState state = initial;
    state.u = to_physical(state.u);
    require_finite(state.u.values(), "evolve: initial data");
    series.initial_high_band_fraction = high_band_fraction(state.u);

    AccumulatorIntegrator integrator;
    double mass0 = 0.0;
    std::optional<VirialQuadrature> refined;
    if (opt.virial_oversample > 1)
        refined.emplace(spec, opt.virial_oversample);

    auto observe = [&](const ComplexField* spectrum, bool checkpoint) {
        const auto derivs = derivatives(state.u, spectrum);
        const auto snap = integrate_snapshot(derivs, state.t, spec, opt.lambda, opt.eta,
                                             checkpoint && opt.interaction_B, refined ? &*refined : nullptr);
        integrator.add(state.t, snap.rates);
        const Checkpoint* cp = nullptr;
        if (checkpoint) {
            if (state.step == 0)
                mass0 = snap.record.mass;
            series.checkpoints.push_back({snap.record, integrator.totals()});
            cp = &series.checkpoints.back();
            if (!series.first_leak_time && snap.record.shell_mass > opt.leak_tol * mass0) {
                series.first_leak_time = state.t;
                if (opt.warn_on_leak)
                    std::cerr << "warning: boundary shell mass " << snap.record.shell_mass << " exceeds "
                              << opt.leak_tol << " M(0) at t = " << state.t << "\n";
            }
        }
        const StepView view{state.step, state.t, state.u, cp};
        for (Observer* o : observers)
            o->on_step(view);
    };

    observe(nullptr, true);
    StrangStepper stepper(spec, opt.dt, opt.dealias);
    for (long s = 1; s <= steps; ++s) {
        try {
            stepper.step(state);
        } catch (const NumericalError& err) {
            throw EvolutionAborted(err.what(), series);
        }
        // Land exactly on multiples of dt rather than accumulating roundoff.
        state.t = s * opt.dt;
        observe(&stepper.last_spectrum(), s % opt.cadence == 0 || s == steps);
    }
    return series;
}

} // namespace dnls
