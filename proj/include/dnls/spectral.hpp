#pragma once

#include <memory>
#include <vector>

#include "dnls/grid.hpp"

namespace dnls {

/// Per-grid transform plans and wavenumber tables, shared by every field on
/// that grid. Obtain through SpectralContext::of; instances are immutable and
/// safe to use from several threads at once.
class SpectralContext {
public:
    static std::shared_ptr<const SpectralContext> of(const Grid& grid);

    /// Threads used by plans created after this call (existing plans keep theirs).
    static void set_threads(int threads);
    static int threads();

    explicit SpectralContext(const Grid& grid);
    ~SpectralContext();
    SpectralContext(const SpectralContext&) = delete;
    SpectralContext& operator=(const SpectralContext&) = delete;

    const Grid& grid() const { return grid_; }

    /// Unnormalized forward DFT. in and out may alias.
    void forward(const Complex* in, Complex* out) const;
    /// Inverse DFT including the 1/N^d factor. in and out may alias.
    void inverse(const Complex* in, Complex* out) const;

    /// |k|^2 per frequency sample.
    const RealVector& k_squared() const { return k_squared_; }
    /// First-derivative wavenumber per axis index, Nyquist entry zeroed.
    const RealVector& derivative_wavenumbers() const { return derivative_k_; }
    /// Largest |m_j| over axes, per frequency sample (for band masks).
    const std::vector<int>& max_abs_mode() const { return max_abs_mode_; }

private:
    Grid grid_;
    fftw_plan forward_ = nullptr;
    fftw_plan forward_inplace_ = nullptr;
    fftw_plan inverse_ = nullptr;
    fftw_plan inverse_inplace_ = nullptr;
    RealVector k_squared_;
    RealVector derivative_k_;
    std::vector<int> max_abs_mode_;
};

ComplexField to_frequency(const ComplexField& f);
ComplexField to_physical(const ComplexField& f);

/// Spectral gradient; one component per axis, in physical space.
std::vector<ComplexField> gradient(const ComplexField& f);

/// Spectral Laplacian (multiplication by -|k|^2).
ComplexField laplacian(const ComplexField& f);

/// Exact free Schrodinger flow e^{it Delta}: multiplies frequency content by
/// exp(-i |k|^2 t). Returns a field in the same space as the input.
ComplexField free_propagate(const ComplexField& f, double t);

/// Multiplies frequency-space samples by exp(-i |k|^2 t) in place.
void apply_free_phase(ComplexField& spectrum, double t);

/// (sum |f|^p h^d)^(1/p); p = infinity gives the max modulus.
double lp_norm(const ComplexField& f, double p);

/// sqrt(||f||^2 + ||grad f||^2) evaluated as a weighted frequency sum.
double h1_norm(const ComplexField& f);

/// ||f||_{L^2}^2 from frequency samples (Parseval).
double parseval_mass(const ComplexField& spectrum);

/// Zero every mode with max_j |m_j| > N/3 (two-thirds rule).
void truncate_two_thirds(ComplexField& spectrum);

} // namespace dnls
