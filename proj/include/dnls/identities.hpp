#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dnls/evolution.hpp"
#include "dnls/hypotheses.hpp"

namespace dnls {

enum class Verdict { pass, fail, inconclusive };
std::string to_string(Verdict v);

/// Per-checkpoint left-minus-right of one evolution identity.
struct ResidualProfile {
    std::string identity;
    std::vector<double> t;
    std::vector<double> absolute;
    std::vector<double> relative;
    double scale = 0.0;
    double max_abs = 0.0;
    double max_rel = 0.0;
    std::optional<double> measured_order;
    double tolerance = 0.0;
    Verdict verdict = Verdict::pass;
    std::string note;
};

struct IdentityOptions {
    /// Tolerance is c_id dt^2; the default puts 1e-4 at dt = 2e-3.
    double c_id_default = 25.0;
    /// Measure the discretization baseline on a reference run for this grid and dt.
    bool calibrate = true;
    double leak_tol = 1e-8;
    /// Allowed share of ||u0||_{H^1}^2 in the top third of the band for the energy law.
    double regularity_tol = 1e-6;
    /// Quadrature refinement used by the calibration run, matching the judged run.
    int virial_oversample = 1;
};

/// Raw residual columns, one entry per checkpoint.
struct ResidualColumns {
    std::vector<double> t, mass, energy, virial;
};
ResidualColumns residual_columns(const DiagnosticsSeries& series);

/// Normalizations for relative residuals: max_t |F| plus the max_t of every
/// accumulated right-hand-side piece.
struct ResidualScales {
    double mass = 0.0, energy = 0.0, virial = 0.0;
};
ResidualScales residual_scales(const DiagnosticsSeries& series);

/// Shared verdict logic; also used when re-judging a stored CSV.
ResidualProfile judge_residuals(const std::string& identity, const std::vector<double>& t,
                                const std::vector<double>& absolute, double scale, double tolerance);

/// Order p from max residuals of two runs: r_coarse/r_fine = (dt_coarse/dt_fine)^p.
std::optional<double> measured_order(double max_coarse, double dt_coarse, double max_fine, double dt_fine);

/// C_id for (grid, dt). With calibration, a short cubic defocusing run from a
/// unit Gaussian sets C_id = max(default, 10 r/dt^2); results are cached.
double calibrated_c_id(const Grid& grid, double dt, const IdentityOptions& options);

ResidualProfile verify_mass_law(const DiagnosticsSeries& series, double tolerance,
                                const DiagnosticsSeries* refined = nullptr);
ResidualProfile verify_energy_law(const DiagnosticsSeries& series, double tolerance, double regularity_tol,
                                  const DiagnosticsSeries* refined = nullptr);
ResidualProfile verify_virial(const DiagnosticsSeries& series, double tolerance, double leak_tol,
                              const DiagnosticsSeries* refined = nullptr);

struct IdentityReport {
    double c_id = 0.0;
    double tolerance = 0.0;
    ResidualProfile mass, energy, virial;
    bool any_fail() const;
};

/// All three verifiers. `refined` is an optional run of the same problem at a
/// smaller dt, used only for the measured order.
IdentityReport verify_identities(const DiagnosticsSeries& series, const Grid& grid, const IdentityOptions& options,
                                 const DiagnosticsSeries* refined = nullptr);

/// Quadrature of |u|^2 over the outer 1/8 of the box on each side of each axis.
double boundary_leak(const ComplexField& u);

struct MonitorOptions {
    double c_mon = 10.0;
    /// led and a_int plateau when their last-quarter increment is at most this share of the total.
    double plateau_share = 0.1;
};

struct BoundMonitor {
    double sup_energy_plus = 0.0;
    double sup_abs_modified = 0.0;
    double sup_abs_energy = 0.0;
    double sup_h1_sq = 0.0;
    double h1_sq_initial = 0.0;
    double led_T = 0.0;
    double a_int_T = 0.0;
    double l4_T = 0.0;
    double morawetz_l4 = 0.0;      ///< 4 pi l4(T)
    double morawetz_budget = 0.0;  ///< 2 sup_t |B|, NaN when B was not tracked
    double led_last_quarter_share = 0.0;
    double a_int_last_quarter_share = 0.0;
    double l4_third_quarter = 0.0;
    double l4_last_quarter = 0.0;
    std::vector<double> shell_mass;
    std::vector<std::string> flags;
    /// False when the hypothesis report failed: flags are then informational.
    bool within_hypotheses = true;
    bool green() const { return flags.empty(); }
};

BoundMonitor monitor_bounds(const DiagnosticsSeries& series, const HypothesisReport* hypotheses,
                            const MonitorOptions& options = {});

/// Linear interpolation of a cumulative column at time t.
double interpolate_at(const std::vector<double>& t, const std::vector<double>& values, double at);

nlohmann::json to_json(const ResidualProfile& p);
nlohmann::json to_json(const IdentityReport& r);
nlohmann::json to_json(const BoundMonitor& m);

} // namespace dnls
