#include "dnls/field_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "dnls/errors.hpp"
#include "dnls/spectral.hpp"

namespace dnls {

namespace {

constexpr char kMagic[8] = {'D', 'N', 'L', 'S', 'F', 'L', 'D', '1'};

void put_u64(std::ostream& out, std::uint64_t v)
{
    std::array<unsigned char, 8> b{};
    for (int i = 0; i < 8; ++i)
        b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffu);
    out.write(reinterpret_cast<const char*>(b.data()), 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& in)
{
    std::array<unsigned char, 8> b{};
    in.read(reinterpret_cast<char*>(b.data()), 8);
    if (!in)
        throw ConfigError("DNLSFLD1: truncated file");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i)
        v = (v << 8) | b[i];
    return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

} // namespace

void write_field(std::ostream& out, const ComplexField& f)
{
    const ComplexField phys = to_physical(f);
    const Grid& g = phys.grid();
    out.write(kMagic, 8);
    put_u64(out, static_cast<std::uint64_t>(g.dim()));
    put_u64(out, static_cast<std::uint64_t>(g.n()));
    put_f64(out, g.half_length());
    for (const auto& v : phys.values()) {
        put_f64(out, v.real());
        put_f64(out, v.imag());
    }
}

ComplexField read_field(std::istream& in)
{
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw ConfigError("DNLSFLD1: bad magic");
    const auto d = get_u64(in);
    const auto n = get_u64(in);
    const double L = get_f64(in);
    if (d < 1 || d > 3 || n > (1u << 20))
        throw ConfigError("DNLSFLD1: implausible header");
    const Grid g(static_cast<int>(d), static_cast<int>(n), L);
    ComplexField f(g);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const double re = get_f64(in);
        const double im = get_f64(in);
        f[p] = Complex{re, im};
    }
    return f;
}

void write_field(const std::filesystem::path& path, const ComplexField& f)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_field(out, f);
}

ComplexField read_field(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open field file " + path.string());
    return read_field(in);
}

} // namespace dnls
