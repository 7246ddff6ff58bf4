#include "dnls/functionals.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "dnls/spectral.hpp"
#include "dnls/weights.hpp"

namespace dnls {

namespace {

// Spectra of the kernel components z_j/|z| sampled at periodic offsets.
struct InteractionKernel {
    std::vector<ComplexField> spectra;
};

std::shared_ptr<const InteractionKernel> interaction_kernel(const Grid& g)
{
    using Key = std::tuple<int, int, double>;
    static std::map<Key, std::shared_ptr<const InteractionKernel>> cache;
    static std::mutex m;
    const Key key{g.dim(), g.n(), g.half_length()};
    std::lock_guard lock(m);
    if (auto it = cache.find(key); it != cache.end())
        return it->second;
    auto kernel = std::make_shared<InteractionKernel>();
    const double h = g.spacing();
    for (int j = 0; j < g.dim(); ++j) {
        ComplexField comp(g);
        for_each_index(g, [&](std::size_t p, int i0, int i1, int i2) {
            const int idx[3] = {i0, i1, i2};
            Point z{0.0, 0.0, 0.0};
            double r2 = 0.0;
            for (int a = 0; a < g.dim(); ++a) {
                z[a] = g.mode(idx[a]) * h;
                r2 += z[a] * z[a];
            }
            comp[p] = r2 > 0.0 ? z[j] / std::sqrt(r2) : 0.0;
        });
        kernel->spectra.push_back(to_frequency(comp));
    }
    cache.emplace(key, kernel);
    return kernel;
}

double pow_or_zero(double y, double e) { return y > 0.0 ? std::pow(y, e) : 0.0; }

} // namespace

double CumulativeAccumulators::virial_total() const
{
    double s = 0.0;
    for (double v : virial)
        s += v;
    return s;
}

double CumulativeAccumulators::energy_rhs() const
{
    // dE/dt = -int a(|u|^{2s1+2s2+2} + V|u|^{2s3+2s2+2} + |u|^{2s2}|grad u|^2 + 2s2|u|^{2s2}|grad|u||^2)
    //         + (1/(2s2+2)) int Delta a |u|^{2s2+2}
    return -(energy[0] + energy[1] + energy[2] + energy[3]) + energy[4];
}

FieldDerivatives derivatives(const ComplexField& u, const ComplexField* spectrum)
{
    FieldDerivatives f;
    f.u = to_physical(u);
    f.spectrum = spectrum ? *spectrum : to_frequency(f.u);
    const Grid& g = f.u.grid();
    auto ctx = SpectralContext::of(g);
    const auto& dk = ctx->derivative_wavenumbers();
    for (int j = 0; j < g.dim(); ++j) {
        ComplexField comp(g, Space::frequency);
        for_each_index(g, [&](std::size_t p, int i0, int i1, int i2) {
            const int idx[3] = {i0, i1, i2};
            comp[p] = Complex{0.0, dk[idx[j]]} * f.spectrum[p];
        });
        ctx->inverse(comp.data(), comp.data());
        comp.set_space(Space::physical);
        f.grad.push_back(std::move(comp));
    }
    return f;
}

VirialQuadrature::VirialQuadrature(const ProblemSpec& spec, int factor)
    : factor_(factor)
{
    const Grid& g = spec.grid();
    if (factor < 1)
        throw std::invalid_argument("virial oversampling factor must be >= 1");
    fine_ = Grid(g.dim(), factor * g.n(), g.half_length());
    const EvaluatedProfile a = evaluate(spec.damping.spec, fine_, ProfileRole::generic);
    const EvaluatedProfile V = evaluate(spec.potential.spec, fine_, ProfileRole::generic);
    a_ = a.value;
    V_ = V.value;
    grad_v_ = V.gradient;
}

void VirialQuadrature::apply(const FieldDerivatives& f, const ProblemSpec& spec, FunctionalRecord& rec,
                             RateTerms& r) const
{
    const Grid& g = f.u.grid();
    const int d = g.dim();
    const int n = g.n();
    const int nf = fine_.n();
    auto fine_ctx = SpectralContext::of(fine_);
    const auto& dk = SpectralContext::of(g)->derivative_wavenumbers();

    // Coarse mode m sits at fine index m mod nf; the inverse transform divides
    // by nf^d, so the unnormalized coarse spectrum is scaled by factor^d.
    const double scale = std::pow(static_cast<double>(factor_), d);
    auto fine_index = [&](int i) { return i < n / 2 ? i : i - n + nf; };
    auto pad = [&](auto&& coefficient) {
        ComplexField out(fine_, Space::frequency);
        for_each_index(g, [&](std::size_t p, int i0, int i1, int i2) {
            const int j0 = fine_index(i0);
            const int j1 = d >= 2 ? fine_index(i1) : 0;
            const int j2 = d >= 3 ? fine_index(i2) : 0;
            const std::size_t q = d == 1 ? j0 : d == 2 ? std::size_t(j0) * nf + j1
                                                       : (std::size_t(j0) * nf + j1) * nf + j2;
            out[q] = scale * coefficient(p, i0, i1, i2);
        });
        fine_ctx->inverse(out.data(), out.data());
        out.set_space(Space::physical);
        return out;
    };

    const ComplexField u = pad([&](std::size_t p, int, int, int) { return f.spectrum[p]; });
    std::vector<ComplexField> grad;
    for (int j = 0; j < d; ++j)
        grad.push_back(pad([&](std::size_t p, int i0, int i1, int i2) {
            const int idx[3] = {i0, i1, i2};
            return Complex{0.0, dk[idx[j]]} * f.spectrum[p];
        }));

    const double s1 = spec.exponents.sigma1;
    const double s2 = spec.exponents.sigma2;
    const double s3 = spec.exponents.sigma3;
    RealVector coord(nf);
    for (int i = 0; i < nf; ++i)
        coord[i] = fine_.coordinate(i);

    double morawetz = 0.0;
    std::array<double, 6> vir{};
    for_each_index(fine_, [&](std::size_t p, int i0, int i1, int i2) {
        const Point x{coord[i0], d >= 2 ? coord[i1] : 0.0, d >= 3 ? coord[i2] : 0.0};
        const Complex uv = u[p];
        const double y = std::norm(uv);
        const auto chi = weight::chi_stack(x, d);
        std::array<Complex, 3> gu{};
        double radial_flux = 0.0, grad_chi_dot_grad_v = 0.0;
        for (int j = 0; j < d; ++j) {
            gu[j] = grad[j][p];
            radial_flux += (std::conj(uv) * gu[j]).imag() * chi.grad[j];
            grad_chi_dot_grad_v += chi.grad[j] * grad_v_[j][p];
        }
        double ys1 = 0.0, ys2 = 0.0, ys3 = 0.0;
        if (y > 0.0) {
            const double ly = std::log(y);
            ys1 = std::exp(s1 * ly);
            ys2 = std::exp(s2 * ly);
            ys3 = std::exp(s3 * ly);
        }
        morawetz += radial_flux;
        vir[0] += 2.0 * weight::chi_hessian_form(x, gu, d);
        vir[1] += -0.5 * chi.bilap * y;
        vir[2] += s1 / (s1 + 1.0) * chi.lap * y * ys1;
        vir[3] += s3 / (s3 + 1.0) * chi.lap * V_[p] * y * ys3;
        vir[4] += -1.0 / (s3 + 1.0) * y * ys3 * grad_chi_dot_grad_v;
        vir[5] += -2.0 * a_[p] * ys2 * radial_flux;
    });
    const double dv = fine_.cell_volume();
    rec.morawetz = morawetz * dv;
    for (std::size_t i = 0; i < vir.size(); ++i)
        r.virial[i] = vir[i] * dv;
}

SnapshotIntegrals integrate_snapshot(const FieldDerivatives& f, double t, const ProblemSpec& spec, double lambda,
                                     double eta, bool with_interaction, const VirialQuadrature* refined)
{
    const Grid& g = f.u.grid();
    const int d = g.dim();
    const double s1 = spec.exponents.sigma1;
    const double s2 = spec.exponents.sigma2;
    const double s3 = spec.exponents.sigma3;
    const auto& a = spec.damping;
    const auto& V = spec.potential;

    double ymax = 0.0;
    for (const auto& v : f.u.values())
        ymax = std::max(ymax, std::norm(v));
    // |u| < 1e-12 ||u||_inf  <=>  |u|^2 < 1e-24 ||u||_inf^2
    const double guard_y = (s2 < 1.0) ? 1e-24 * ymax : 0.0;

    SnapshotIntegrals out;
    auto& rec = out.record;
    auto& r = out.rates;
    double grad2_total = 0.0;

    RealVector coord(g.n());
    for (int i = 0; i < g.n(); ++i)
        coord[i] = g.coordinate(i);

    for_each_index(g, [&](std::size_t p, int i0, int i1, int i2) {
        const Point x{coord[i0], d >= 2 ? coord[i1] : 0.0, d >= 3 ? coord[i2] : 0.0};
        const Complex u = f.u[p];
        const double y = std::norm(u);
        const auto chi = weight::chi_stack(x, d);

        double grad2 = 0.0, radial_flux = 0.0, grad_chi_dot_grad_v = 0.0;
        std::array<Complex, 3> gu{};
        double re_sq = 0.0;
        for (int j = 0; j < d; ++j) {
            gu[j] = f.grad[j][p];
            grad2 += std::norm(gu[j]);
            const Complex ug = std::conj(u) * gu[j];
            radial_flux += ug.imag() * chi.grad[j];
            re_sq += ug.real() * ug.real();
            grad_chi_dot_grad_v += chi.grad[j] * V.gradient[j][p];
        }
        grad2_total += grad2;

        double ys1 = 0.0, ys2 = 0.0, ys3 = 0.0;
        if (y > 0.0) {
            const double ly = std::log(y);
            ys1 = std::exp(s1 * ly);
            ys2 = std::exp(s2 * ly);
            ys3 = std::exp(s3 * ly);
        }
        const double av = a.value[p];
        const double vv = V.value[p];

        rec.mass += y;
        rec.energy.defocusing += y * ys1 / (2.0 * s1 + 2.0);
        rec.energy.potential += vv * y * ys3 / (2.0 * s3 + 2.0);
        rec.morawetz += radial_flux;
        if (g.in_outer_shell(p))
            rec.shell_mass += y;

        r.diss_mass += av * y * ys2;
        r.energy[0] += av * y * ys1 * ys2;
        r.energy[1] += av * vv * y * ys3 * ys2;
        r.energy[2] += av * ys2 * grad2;
        if (y > guard_y && y > 0.0)
            r.energy[3] += 2.0 * s2 * av * pow_or_zero(y, s2 - 1.0) * re_sq;
        r.energy[4] += a.laplacian[p] * y * ys2 / (2.0 * s2 + 2.0);

        const double inv7 = chi.inv_jx3 * chi.inv_jx3 * chi.inv_jx;
        r.led += grad2 * chi.inv_jx3 + y * ys1 * chi.inv_jx + y * inv7;
        r.a_int += av * ys2 * (y * ys1 + grad2 + y);
        r.l4 += y * y;
        r.l2s2 += y * ys2;

        r.virial[0] += 2.0 * weight::chi_hessian_form(x, gu, d);
        r.virial[1] += -0.5 * chi.bilap * y;
        r.virial[2] += s1 / (s1 + 1.0) * chi.lap * y * ys1;
        r.virial[3] += s3 / (s3 + 1.0) * chi.lap * vv * y * ys3;
        r.virial[4] += -1.0 / (s3 + 1.0) * y * ys3 * grad_chi_dot_grad_v;
        r.virial[5] += -2.0 * av * ys2 * radial_flux;
    });

    const double dv = g.cell_volume();
    rec.t = t;
    rec.mass *= dv;
    rec.energy.defocusing *= dv;
    rec.energy.potential *= dv;
    rec.morawetz *= dv;
    rec.shell_mass *= dv;
    rec.grad_l2 = std::sqrt(grad2_total * dv);

    const auto& k2 = SpectralContext::of(g)->k_squared();
    double kin = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p)
        kin += k2[p] * std::norm(f.spectrum[p]);
    kin *= dv / static_cast<double>(g.size());
    rec.energy.kinetic = 0.5 * kin;
    rec.h1 = std::sqrt(rec.mass + kin);
    rec.energy_plus = rec.energy.total() + lambda * rec.mass;
    rec.modified_energy = rec.energy_plus - eta * rec.morawetz;
    if (with_interaction)
        rec.interaction_B = compute_interaction_B(f);

    r.diss_mass *= dv;
    for (auto& e : r.energy)
        e *= dv;
    r.led *= dv;
    r.a_int *= dv;
    r.l4 *= dv;
    r.l2s2 *= dv;
    for (auto& v : r.virial)
        v *= dv;
    if (refined) {
        refined->apply(f, spec, rec, r);
        rec.modified_energy = rec.energy_plus - eta * rec.morawetz;
    }
    return out;
}

FunctionalRecord compute_record(const ComplexField& u, double t, const ProblemSpec& spec, double lambda, double eta,
                                bool with_interaction)
{
    require_finite(u.values(), "compute_record");
    return integrate_snapshot(derivatives(u), t, spec, lambda, eta, with_interaction).record;
}

double compute_interaction_B(const FieldDerivatives& f)
{
    const Grid& g = f.u.grid();
    auto ctx = SpectralContext::of(g);
    auto kernel = interaction_kernel(g);
    ComplexField density(g);
    for (std::size_t p = 0; p < g.size(); ++p)
        density[p] = std::norm(f.u[p]);
    const ComplexField density_hat = to_frequency(density);
    const double dv = g.cell_volume();
    double b = 0.0;
    ComplexField conv(g, Space::frequency);
    for (int j = 0; j < g.dim(); ++j) {
        const auto& kh = kernel->spectra[j];
        for (std::size_t p = 0; p < g.size(); ++p)
            conv[p] = kh[p] * density_hat[p];
        ctx->inverse(conv.data(), conv.data());
        for (std::size_t p = 0; p < g.size(); ++p) {
            const double flux = (std::conj(f.u[p]) * f.grad[j][p]).imag();
            b += flux * conv[p].real() * dv;
        }
    }
    return b * dv;
}

double compute_interaction_B(const ComplexField& u)
{
    require_finite(u.values(), "compute_interaction_B");
    return compute_interaction_B(derivatives(u));
}

void accumulate_increments(CumulativeAccumulators& acc, const RateTerms& r0, const RateTerms& r1, double t0, double t1)
{
    const double w = 0.5 * (t1 - t0);
    acc.t = t1;
    acc.diss_mass += w * (r0.diss_mass + r1.diss_mass);
    for (std::size_t i = 0; i < acc.energy.size(); ++i)
        acc.energy[i] += w * (r0.energy[i] + r1.energy[i]);
    acc.led += w * (r0.led + r1.led);
    acc.a_int += w * (r0.a_int + r1.a_int);
    acc.l4 += w * (r0.l4 + r1.l4);
    acc.l2s2 += w * (r0.l2s2 + r1.l2s2);
    for (std::size_t i = 0; i < acc.virial.size(); ++i)
        acc.virial[i] += w * (r0.virial[i] + r1.virial[i]);
}

void AccumulatorIntegrator::add(double t, const RateTerms& rates)
{
    if (started_)
        accumulate_increments(totals_, last_, rates, last_t_, t);
    else
        totals_.t = t;
    started_ = true;
    last_t_ = t;
    last_ = rates;
}

} // namespace dnls
