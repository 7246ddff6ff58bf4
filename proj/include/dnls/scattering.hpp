#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dnls/evolution.hpp"

namespace dnls {

/// v(t) = exp(-i t Delta) u(t): the state pulled back along the free flow.
ComplexField pullback(const ComplexField& u, double t);

struct Snapshot {
    long step = 0;
    double t = 0.0;
    ComplexField u;
    double shell_mass = 0.0;
};

/// Steps t0, 2 t0, 4 t0, ... up to T; t0 must be a multiple of dt.
std::vector<long> dyadic_steps(double t0, double dt, double T);

/// Observer that keeps copies of the state at a fixed set of steps.
class SnapshotRecorder : public Observer {
public:
    explicit SnapshotRecorder(std::vector<long> steps) : steps_(std::move(steps)) {}
    void on_step(const StepView& view) override;
    const std::vector<Snapshot>& snapshots() const { return snapshots_; }
    std::vector<Snapshot>& snapshots() { return snapshots_; }

private:
    std::vector<long> steps_;
    std::vector<Snapshot> snapshots_;
};

enum class ScatteringVerdict { consistent, not_consistent, no_verdict };
std::string to_string(ScatteringVerdict v);

struct ScatteringOptions {
    /// Final Cauchy difference must not exceed this multiple of ||u0||_{H^1}.
    double threshold_rel = 0.1;
    double leak_tol = 1e-8;
    double plateau_share = 0.1;
};

/// Inputs besides the snapshots: initial mass and H1 norm, the first time the
/// shell guard tripped (if ever), and for the asymptotically flat case the
/// L^{2 s2 + 2} accumulator history.
struct ScatteringContext {
    double mass0 = 0.0;
    double h1_initial = 0.0;
    std::optional<double> first_leak_time;
    bool asymptotically_flat_case = false;
    std::vector<double> l2s2_t;
    std::vector<double> l2s2;
};

struct ScatteringReport {
    std::vector<double> times;
    /// cauchy[i][j] = ||v(T_i) - v(T_j)||_{H^1} for j < i.
    std::vector<std::vector<double>> cauchy;
    std::vector<double> successive;     ///< c_{i,i+1}
    std::vector<double> forward_errors; ///< ||u(T_i) - exp(i T_i Delta) u_+||_{H^1}
    double unitarity_defect = 0.0;      ///< max_i |e_i - c_{im}| relative to max(1, max e_i)
    double final_h1_gap = 0.0;
    double threshold = 0.0;
    bool monotone_tail = false;
    std::optional<ComplexField> u_plus;
    std::optional<double> l2s2_last_quarter_share;
    bool l2s2_plateau = true;
    ScatteringVerdict verdict = ScatteringVerdict::no_verdict;
    std::string note;
};

/// Cauchy test on pulled-back snapshots. Snapshots at or after the first leak
/// are dropped; throws std::invalid_argument when fewer than four remain and
/// the leak guard never tripped.
ScatteringReport scattering_report(const std::vector<Snapshot>& snapshots, const ScatteringContext& context,
                                   const ScatteringOptions& options = {});

nlohmann::json to_json(const ScatteringReport& r);

} // namespace dnls
