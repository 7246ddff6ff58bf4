#include "dnls/grid.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "dnls/errors.hpp"

namespace dnls {

Grid::Grid(int dim, int points_per_axis, double half_length)
    : dim_(dim), n_(points_per_axis), half_length_(half_length)
{
    if (dim < 1 || dim > 3)
        throw ConfigError("grid dimension must be 1, 2 or 3");
    if (points_per_axis < 8 || points_per_axis % 8 != 0)
        throw ConfigError("grid N must be a multiple of 8 and at least 8");
    if (!(half_length > 0.0) || !std::isfinite(half_length))
        throw ConfigError("grid half-length L must be positive");
    size_ = 1;
    for (int j = 0; j < dim; ++j)
        size_ *= static_cast<std::size_t>(points_per_axis);
}

double Grid::cell_volume() const { return std::pow(spacing(), dim_); }

double Grid::box_volume() const { return std::pow(2.0 * half_length_, dim_); }

double Grid::wavenumber(int i) const { return std::numbers::pi / half_length_ * mode(i); }

std::array<int, 3> Grid::indices(std::size_t flat) const
{
    std::array<int, 3> idx{0, 0, 0};
    for (int j = dim_ - 1; j >= 0; --j) {
        idx[j] = static_cast<int>(flat % n_);
        flat /= n_;
    }
    return idx;
}

Point Grid::point(std::size_t flat) const
{
    const auto idx = indices(flat);
    Point x{0.0, 0.0, 0.0};
    for (int j = 0; j < dim_; ++j)
        x[j] = coordinate(idx[j]);
    return x;
}

bool Grid::in_outer_shell(std::size_t flat) const
{
    const int band = n_ / 8;
    const auto idx = indices(flat);
    for (int j = 0; j < dim_; ++j)
        if (idx[j] < band || idx[j] >= n_ - band)
            return true;
    return false;
}

ComplexField::ComplexField(const Grid& grid, Space space)
    : grid_(grid), space_(space), data_(grid.size(), Complex{0.0, 0.0})
{
}

ComplexField::ComplexField(const Grid& grid, ComplexVector data, Space space)
    : grid_(grid), space_(space), data_(std::move(data))
{
    if (data_.size() != grid.size())
        throw ConfigError("field sample count does not match grid size");
}

ComplexField& ComplexField::operator+=(const ComplexField& other)
{
    for (std::size_t i = 0; i < data_.size(); ++i)
        data_[i] += other.data_[i];
    return *this;
}

ComplexField& ComplexField::operator-=(const ComplexField& other)
{
    for (std::size_t i = 0; i < data_.size(); ++i)
        data_[i] -= other.data_[i];
    return *this;
}

ComplexField& ComplexField::operator*=(Complex s)
{
    for (auto& v : data_)
        v *= s;
    return *this;
}

ComplexField operator-(ComplexField a, const ComplexField& b) { return a -= b; }

ComplexField operator+(ComplexField a, const ComplexField& b) { return a += b; }

void require_finite(std::span<const Complex> values, const char* what)
{
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i].real()) || !std::isfinite(values[i].imag())) {
            std::ostringstream msg;
            msg << what << ": non-finite sample at index " << i;
            throw NumericalError(msg.str());
        }
    }
}

} // namespace dnls
