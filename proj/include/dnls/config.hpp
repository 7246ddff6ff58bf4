#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dnls/grid.hpp"
#include "dnls/problem.hpp"
#include "dnls/profiles.hpp"

namespace dnls {

struct GridConfig {
    int d = 3;
    int N = 64;
    double L = 16.0;
};

struct PhysicsConfig {
    Exponents exponents;
    ProfileSpec a = ProfileSpec::zero();
    ProfileSpec V = ProfileSpec::zero();
};

/// Initial data: a profile times exp(i k.x), optionally multiplied by
/// (1 + perturbation * smooth seeded noise), or a DNLSFLD1 file.
struct InitialConfig {
    ProfileSpec profile = ProfileSpec::gaussian(1.0, 1.0);
    Point k{0.0, 0.0, 0.0};
    double perturbation = 0.0;
    std::string file;
};

struct IntegratorConfig {
    double dt = 1e-2;
    double T = 1.0;
    int cadence = 10;
    bool dealias = false;
};

struct DiagnosticsConfig {
    bool virial = true;
    bool interaction_B = false;
    int snapshots = 0;  ///< field-file stride in steps, 0 disables
    bool dyadic_scattering = false;
    double dyadic_t0 = 0.0;  ///< 0 means cadence * dt
    double leak_tol = 1e-8;
    double C_mon = 10.0;
    bool calibrate = true;
    bool order_check = false;
    /// Zero-padding factor for the chi-weighted integrals, 1 to 4.
    int virial_oversample = 2;
    double scattering_threshold = 0.1;
};

struct OutputConfig {
    std::string directory = "dnls_out";
    bool csv = true;
    bool json = true;
    bool fields = false;
};

struct OverrideConfig {
    std::optional<double> lambda;
    std::optional<double> eta;
};

struct SweepAxis {
    std::string name;
    std::vector<double> values;
};

struct SweepConfig {
    std::vector<SweepAxis> axes;
    int cap = 64;
};

struct RunConfig {
    GridConfig grid;
    PhysicsConfig physics;
    InitialConfig initial;
    IntegratorConfig integrator;
    DiagnosticsConfig diagnostics;
    OutputConfig output;
    OverrideConfig overrides;
    SweepConfig sweep;
    std::uint64_t seed = 0;
};

/// Parses the TOML-style run configuration and validates it completely.
/// Every failure is a ConfigError carrying a line number where one applies.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Checks cross-field constraints (exponent ordering, dt <= T, grid shape, ...).
void validate(const RunConfig& config);

/// Names accepted as sweep axes.
const std::vector<std::string>& sweep_axis_names();

/// Applies one sweep-axis value to a copy of the config.
void apply_axis(RunConfig& config, const std::string& axis, double value);

Grid make_grid(const RunConfig& config);
ProblemSpec make_problem(const RunConfig& config);
ComplexField make_initial(const RunConfig& config, const Grid& grid);

} // namespace dnls
