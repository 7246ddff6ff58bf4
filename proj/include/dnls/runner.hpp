#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dnls/config.hpp"
#include "dnls/evolution.hpp"
#include "dnls/hypotheses.hpp"
#include "dnls/identities.hpp"
#include "dnls/scattering.hpp"

namespace dnls {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitAbort = 2;
inline constexpr int kExitConfig = 3;

/// Fixed column order of the time-series CSV.
const std::vector<std::string>& csv_columns();

struct RunOptions {
    /// Replaces output.directory when set.
    std::optional<std::filesystem::path> out_dir;
    bool quiet = false;
    /// Progress and summary lines; null silences them.
    std::ostream* log = nullptr;
};

struct RunResult {
    int exit_code = kExitOk;
    std::filesystem::path directory;
    HypothesisReport hypotheses;
    std::optional<DiagnosticsSeries> series;
    std::optional<IdentityReport> identities;
    std::optional<BoundMonitor> monitor;
    std::optional<ScatteringReport> scattering;
    std::string scattering_error;
    std::string abort_message;
};

/// Hypotheses only; writes hypotheses.json.
HypothesisReport check(const RunConfig& config, const RunOptions& options);

/// hypotheses -> evolve -> identities -> scattering, writing every artifact.
/// Exit code 0 unless an identity verdict is FAIL (1) or the run aborted (2).
RunResult run(const RunConfig& config, const RunOptions& options);

struct SweepRow {
    std::size_t cell = 0;
    std::vector<double> axis_values;
    RunConfig config;
    int exit_code = kExitOk;
    std::string error;
    bool control_holds = false;
    bool bounded_energy_hypotheses = false;
    std::string pair_a, pair_V;
    double sup_h1_sq = 0.0, led_T = 0.0, l4_T = 0.0;
    std::array<double, 3> max_abs{};  ///< mass, energy, virial
    std::array<double, 3> max_rel{};
    std::array<std::string, 3> verdicts;
    std::array<std::optional<double>, 3> order;
    std::string scattering = "n/a";
};

struct SweepResult {
    std::vector<std::string> axes;
    std::vector<SweepRow> rows;
    int exit_code() const;
};

/// Cartesian product of the [sweep] axes, each cell run independently in a
/// pool of `workers` threads. Writes <out>/summary.csv and per-cell directories.
SweepResult sweep(const RunConfig& base, const RunOptions& options, int workers);

void write_summary_csv(std::ostream& out, const SweepResult& result);

/// Re-judges the identity verdicts of a finished run directory from its
/// series.csv and run_meta.json, and redoes the scattering report from stored
/// dyadic snapshots when present. Returns the exit code a run would have had.
int verify(const std::filesystem::path& directory, const RunOptions& options);

} // namespace dnls
