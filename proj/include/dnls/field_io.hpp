#pragma once

#include <filesystem>
#include <iosfwd>

#include "dnls/grid.hpp"

namespace dnls {

/// DNLSFLD1 snapshot layout, all little-endian:
///   8 bytes  magic "DNLSFLD1"
///   8 bytes  d (unsigned 64-bit)
///   8 bytes  N (unsigned 64-bit)
///   8 bytes  L (IEEE-754 double)
///   N^d * 16 bytes  samples as (re, im) double pairs, row-major
void write_field(std::ostream& out, const ComplexField& f);
ComplexField read_field(std::istream& in);

void write_field(const std::filesystem::path& path, const ComplexField& f);
ComplexField read_field(const std::filesystem::path& path);

} // namespace dnls
