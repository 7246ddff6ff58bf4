#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <fftw3.h>

namespace dnls {

using Complex = std::complex<double>;
using Point = std::array<double, 3>;

/// Allocator returning FFTW-aligned storage so every field can be handed to
/// the same set of plans.
template <class T>
struct FftwAllocator {
    using value_type = T;
    FftwAllocator() = default;
    template <class U>
    FftwAllocator(const FftwAllocator<U>&) noexcept {}
    T* allocate(std::size_t n)
    {
        void* p = fftw_malloc(n * sizeof(T));
        if (p == nullptr && n != 0)
            throw std::bad_alloc();
        return static_cast<T*>(p);
    }
    void deallocate(T* p, std::size_t) noexcept { fftw_free(p); }
    template <class U>
    bool operator==(const FftwAllocator<U>&) const noexcept { return true; }
};

using ComplexVector = std::vector<Complex, FftwAllocator<Complex>>;
using RealVector = std::vector<double>;

/// Uniform periodic discretization of the box [-L, L)^d.
///
/// Samples sit at x_i = -L + i h, h = 2L/N, stored row-major with the last
/// axis fastest. Wavenumbers follow FFT ordering: index i carries the integer
/// offset m = i for i < N/2 and m = i - N otherwise, so m ranges over
/// [-N/2, N/2) and k = (pi/L) m.
class Grid {
public:
    Grid() = default;
    Grid(int dim, int points_per_axis, double half_length);

    int dim() const { return dim_; }
    int n() const { return n_; }
    double half_length() const { return half_length_; }
    double spacing() const { return 2.0 * half_length_ / n_; }
    double cell_volume() const;
    double box_volume() const;
    std::size_t size() const { return size_; }

    double coordinate(int i) const { return -half_length_ + i * spacing(); }
    /// Integer wavenumber offset of FFT index i.
    int mode(int i) const { return i < n_ / 2 ? i : i - n_; }
    double wavenumber(int i) const;

    /// Per-axis indices of a flat sample index (unused axes are 0).
    std::array<int, 3> indices(std::size_t flat) const;
    Point point(std::size_t flat) const;

    /// True when any axis index lies in the outermost 1/8 of the box on either side.
    bool in_outer_shell(std::size_t flat) const;

    bool operator==(const Grid& other) const = default;

private:
    int dim_ = 1;
    int n_ = 8;
    double half_length_ = 1.0;
    std::size_t size_ = 8;
};

enum class Space { physical, frequency };

/// Complex samples on a Grid, tagged with the representation they hold.
class ComplexField {
public:
    ComplexField() = default;
    ComplexField(const Grid& grid, Space space = Space::physical);
    ComplexField(const Grid& grid, ComplexVector data, Space space = Space::physical);

    const Grid& grid() const { return grid_; }
    Space space() const { return space_; }
    void set_space(Space s) { space_ = s; }

    std::size_t size() const { return data_.size(); }
    Complex& operator[](std::size_t i) { return data_[i]; }
    const Complex& operator[](std::size_t i) const { return data_[i]; }
    std::span<Complex> values() { return data_; }
    std::span<const Complex> values() const { return data_; }
    Complex* data() { return data_.data(); }
    const Complex* data() const { return data_.data(); }

    ComplexField& operator+=(const ComplexField& other);
    ComplexField& operator-=(const ComplexField& other);
    ComplexField& operator*=(Complex s);

    /// Fill from a callable f(Point) -> Complex in physical space.
    template <class F>
    static ComplexField from_function(const Grid& grid, F&& f)
    {
        ComplexField out(grid);
        for (std::size_t p = 0; p < grid.size(); ++p)
            out[p] = f(grid.point(p));
        return out;
    }

private:
    Grid grid_;
    Space space_ = Space::physical;
    ComplexVector data_;
};

ComplexField operator-(ComplexField a, const ComplexField& b);
ComplexField operator+(ComplexField a, const ComplexField& b);

/// Calls f(flat, i0, i1, i2) for every sample in storage order; unused axes get 0.
template <class F>
void for_each_index(const Grid& grid, F&& f)
{
    const int n = grid.n();
    const int n1 = grid.dim() >= 2 ? n : 1;
    const int n2 = grid.dim() >= 3 ? n : 1;
    std::size_t p = 0;
    for (int i0 = 0; i0 < n; ++i0)
        for (int i1 = 0; i1 < n1; ++i1)
            for (int i2 = 0; i2 < n2; ++i2, ++p)
                f(p, i0, i1, i2);
}

/// Throws NumericalError naming the first non-finite sample, if any.
void require_finite(std::span<const Complex> values, const char* what);

} // namespace dnls
