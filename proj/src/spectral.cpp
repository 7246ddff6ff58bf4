#include "dnls/spectral.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <tuple>

#include <fftw3.h>

#include "dnls/errors.hpp"

namespace dnls {

namespace {

std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

std::atomic<int>& thread_setting()
{
    static std::atomic<int> n{1};
    return n;
}

void init_fftw_threads()
{
    static const bool ok = fftw_init_threads() != 0;
    (void)ok;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

fftw_complex* as_fftw(const Complex* p)
{
    // FFTW's new-array execute does not write to the input of an
    // out-of-place plan.
    return reinterpret_cast<fftw_complex*>(const_cast<Complex*>(p));
}

Space expect(const ComplexField& f, Space s, const char* what)
{
    if (f.space() != s)
        throw std::invalid_argument(std::string(what) + ": field is in the wrong space");
    return s;
}

} // namespace

void SpectralContext::set_threads(int threads) { thread_setting() = threads < 1 ? 1 : threads; }

int SpectralContext::threads() { return thread_setting(); }

std::shared_ptr<const SpectralContext> SpectralContext::of(const Grid& grid)
{
    using Key = std::tuple<int, int, double, int>;
    static std::map<Key, std::shared_ptr<const SpectralContext>> cache;
    static std::mutex cache_mutex;
    const Key key{grid.dim(), grid.n(), grid.half_length(), threads()};
    std::lock_guard lock(cache_mutex);
    auto it = cache.find(key);
    if (it != cache.end())
        return it->second;
    auto ctx = std::make_shared<const SpectralContext>(grid);
    cache.emplace(key, ctx);
    return ctx;
}

SpectralContext::SpectralContext(const Grid& grid) : grid_(grid)
{
    const int d = grid.dim();
    std::vector<int> dims(d, grid.n());
    ComplexVector a(grid.size()), b(grid.size());
    {
        std::lock_guard lock(planner_mutex());
        init_fftw_threads();
        fftw_plan_with_nthreads(threads());
        // ESTIMATE keeps plan selection (and therefore output bits) reproducible.
        const unsigned flags = FFTW_ESTIMATE;
        forward_ = fftw_plan_dft(d, dims.data(), as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD, flags);
        inverse_ = fftw_plan_dft(d, dims.data(), as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD, flags);
        forward_inplace_ = fftw_plan_dft(d, dims.data(), as_fftw(a.data()), as_fftw(a.data()), FFTW_FORWARD, flags);
        inverse_inplace_ = fftw_plan_dft(d, dims.data(), as_fftw(a.data()), as_fftw(a.data()), FFTW_BACKWARD, flags);
    }
    if (!forward_ || !inverse_ || !forward_inplace_ || !inverse_inplace_)
        throw std::runtime_error("FFTW planning failed");

    const int n = grid.n();
    derivative_k_.resize(n);
    for (int i = 0; i < n; ++i)
        derivative_k_[i] = (grid.mode(i) == -n / 2) ? 0.0 : grid.wavenumber(i);

    k_squared_.resize(grid.size());
    max_abs_mode_.resize(grid.size());
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const auto idx = grid.indices(p);
        double k2 = 0.0;
        int mmax = 0;
        for (int j = 0; j < d; ++j) {
            const double k = grid.wavenumber(idx[j]);
            k2 += k * k;
            mmax = std::max(mmax, std::abs(grid.mode(idx[j])));
        }
        k_squared_[p] = k2;
        max_abs_mode_[p] = mmax;
    }
}

SpectralContext::~SpectralContext()
{
    std::lock_guard lock(planner_mutex());
    for (auto* plan : {&forward_, &inverse_, &forward_inplace_, &inverse_inplace_})
        if (*plan)
            fftw_destroy_plan(*plan);
}

void SpectralContext::forward(const Complex* in, Complex* out) const
{
    if (in == out)
        fftw_execute_dft(forward_inplace_, as_fftw(out), as_fftw(out));
    else
        fftw_execute_dft(forward_, as_fftw(in), as_fftw(out));
}

void SpectralContext::inverse(const Complex* in, Complex* out) const
{
    if (in == out)
        fftw_execute_dft(inverse_inplace_, as_fftw(out), as_fftw(out));
    else
        fftw_execute_dft(inverse_, as_fftw(in), as_fftw(out));
    const double scale = 1.0 / static_cast<double>(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i)
        out[i] *= scale;
}

ComplexField to_frequency(const ComplexField& f)
{
    if (f.space() == Space::frequency)
        return f;
    ComplexField out(f.grid(), Space::frequency);
    SpectralContext::of(f.grid())->forward(f.data(), out.data());
    return out;
}

ComplexField to_physical(const ComplexField& f)
{
    if (f.space() == Space::physical)
        return f;
    ComplexField out(f.grid(), Space::physical);
    SpectralContext::of(f.grid())->inverse(f.data(), out.data());
    return out;
}

std::vector<ComplexField> gradient(const ComplexField& f)
{
    expect(f, Space::physical, "gradient");
    require_finite(f.values(), "gradient");
    const Grid& g = f.grid();
    auto ctx = SpectralContext::of(g);
    const ComplexField spec = to_frequency(f);
    const auto& dk = ctx->derivative_wavenumbers();
    std::vector<ComplexField> out;
    out.reserve(g.dim());
    for (int j = 0; j < g.dim(); ++j) {
        ComplexField comp(g, Space::frequency);
        for_each_index(g, [&](std::size_t p, int i0, int i1, int i2) {
            const int idx[3] = {i0, i1, i2};
            comp[p] = Complex{0.0, dk[idx[j]]} * spec[p];
        });
        ctx->inverse(comp.data(), comp.data());
        comp.set_space(Space::physical);
        out.push_back(std::move(comp));
    }
    return out;
}

ComplexField laplacian(const ComplexField& f)
{
    expect(f, Space::physical, "laplacian");
    require_finite(f.values(), "laplacian");
    auto ctx = SpectralContext::of(f.grid());
    ComplexField spec = to_frequency(f);
    const auto& k2 = ctx->k_squared();
    for (std::size_t p = 0; p < spec.size(); ++p)
        spec[p] *= -k2[p];
    ctx->inverse(spec.data(), spec.data());
    spec.set_space(Space::physical);
    return spec;
}

void apply_free_phase(ComplexField& spectrum, double t)
{
    expect(spectrum, Space::frequency, "apply_free_phase");
    const auto& k2 = SpectralContext::of(spectrum.grid())->k_squared();
    for (std::size_t p = 0; p < spectrum.size(); ++p)
        spectrum[p] *= std::polar(1.0, -k2[p] * t);
}

ComplexField free_propagate(const ComplexField& f, double t)
{
    require_finite(f.values(), "free_propagate");
    if (f.space() == Space::frequency) {
        ComplexField out = f;
        apply_free_phase(out, t);
        return out;
    }
    ComplexField spec = to_frequency(f);
    apply_free_phase(spec, t);
    return to_physical(spec);
}

double lp_norm(const ComplexField& f, double p)
{
    expect(f, Space::physical, "lp_norm");
    if (!(p >= 1.0))
        throw std::invalid_argument("lp_norm: exponent p must be >= 1");
    if (std::isinf(p)) {
        double m = 0.0;
        for (const auto& v : f.values())
            m = std::max(m, std::abs(v));
        return m;
    }
    double s = 0.0;
    if (p == 2.0) {
        for (const auto& v : f.values())
            s += std::norm(v);
    } else {
        for (const auto& v : f.values())
            s += std::pow(std::abs(v), p);
    }
    return std::pow(s * f.grid().cell_volume(), 1.0 / p);
}

double parseval_mass(const ComplexField& spectrum)
{
    expect(spectrum, Space::frequency, "parseval_mass");
    double s = 0.0;
    for (const auto& v : spectrum.values())
        s += std::norm(v);
    const Grid& g = spectrum.grid();
    return s * g.cell_volume() / static_cast<double>(g.size());
}

double h1_norm(const ComplexField& f)
{
    require_finite(f.values(), "h1_norm");
    const ComplexField spec = to_frequency(f);
    const auto& k2 = SpectralContext::of(f.grid())->k_squared();
    double s = 0.0;
    for (std::size_t p = 0; p < spec.size(); ++p)
        s += (1.0 + k2[p]) * std::norm(spec[p]);
    const Grid& g = f.grid();
    return std::sqrt(s * g.cell_volume() / static_cast<double>(g.size()));
}

void truncate_two_thirds(ComplexField& spectrum)
{
    expect(spectrum, Space::frequency, "truncate_two_thirds");
    auto ctx = SpectralContext::of(spectrum.grid());
    const auto& mm = ctx->max_abs_mode();
    const int cutoff = spectrum.grid().n() / 3;
    for (std::size_t p = 0; p < spectrum.size(); ++p)
        if (mm[p] > cutoff)
            spectrum[p] = Complex{0.0, 0.0};
}

} // namespace dnls
