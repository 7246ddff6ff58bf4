#include "dnls/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dnls/identities.hpp"
#include "dnls/spectral.hpp"

namespace dnls {

namespace {

constexpr std::size_t kMinSnapshots = 4;

} // namespace

ComplexField pullback(const ComplexField& u, double t)
{
    return free_propagate(u, -t);
}

std::vector<long> dyadic_steps(double t0, double dt, double T)
{
    if (!(t0 > 0.0))
        throw ConfigError("first dyadic time must be positive");
    const long first = step_count(t0, dt);
    const long last = step_count(T, dt);
    std::vector<long> out;
    for (long s = first; s <= last && s > 0; s *= 2)
        out.push_back(s);
    return out;
}

void SnapshotRecorder::on_step(const StepView& view)
{
    if (!std::binary_search(steps_.begin(), steps_.end(), view.step))
        return;
    snapshots_.push_back({view.step, view.t, view.u, boundary_leak(view.u)});
}

std::string to_string(ScatteringVerdict v)
{
    switch (v) {
    case ScatteringVerdict::consistent:
        return "SCATTERING-CONSISTENT";
    case ScatteringVerdict::not_consistent:
        return "NOT-CONSISTENT";
    case ScatteringVerdict::no_verdict:
        return "NO-VERDICT";
    }
    return "?";
}

ScatteringReport scattering_report(const std::vector<Snapshot>& snapshots, const ScatteringContext& ctx,
                                   const ScatteringOptions& options)
{
    ScatteringReport rep;
    std::vector<const Snapshot*> kept;
    bool leaked = false;
    for (const auto& s : snapshots) {
        const bool past_leak = ctx.first_leak_time && s.t >= *ctx.first_leak_time;
        if (past_leak || s.shell_mass > options.leak_tol * ctx.mass0) {
            leaked = true;
            break;
        }
        kept.push_back(&s);
    }
    if (kept.size() < kMinSnapshots) {
        if (!leaked && !ctx.first_leak_time)
            throw std::invalid_argument("scattering report needs at least 4 retained dyadic snapshots");
        for (const Snapshot* s : kept)
            rep.times.push_back(s->t);
        rep.verdict = ScatteringVerdict::no_verdict;
        rep.note = "boundary leak guard tripped before four dyadic snapshots";
        return rep;
    }

    const std::size_t m = kept.size();
    std::vector<ComplexField> v;
    v.reserve(m);
    for (const Snapshot* s : kept) {
        rep.times.push_back(s->t);
        v.push_back(to_frequency(pullback(s->u, s->t)));
    }
    rep.cauchy.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        rep.cauchy[i].resize(i);
        for (std::size_t j = 0; j < i; ++j)
            rep.cauchy[i][j] = h1_norm(v[i] - v[j]);
    }
    for (std::size_t i = 0; i + 1 < m; ++i)
        rep.successive.push_back(rep.cauchy[i + 1][i]);

    rep.u_plus = to_physical(v.back());
    double emax = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double e = h1_norm(kept[i]->u - free_propagate(*rep.u_plus, kept[i]->t));
        rep.forward_errors.push_back(e);
        emax = std::max(emax, e);
    }
    for (std::size_t i = 0; i < m; ++i) {
        const double c = i + 1 < m ? rep.cauchy[m - 1][i] : 0.0;
        rep.unitarity_defect = std::max(rep.unitarity_defect, std::abs(rep.forward_errors[i] - c));
    }
    rep.unitarity_defect /= std::max(1.0, emax);

    // Last three dyadic intervals must not increase.
    const double slack = 1e-12 * std::max(ctx.h1_initial, 1e-300);
    const auto& c = rep.successive;
    rep.monotone_tail = true;
    for (std::size_t k = c.size() - 3; k + 1 < c.size(); ++k)
        if (c[k + 1] > c[k] + slack)
            rep.monotone_tail = false;
    rep.final_h1_gap = c.back();
    rep.threshold = options.threshold_rel * ctx.h1_initial;

    if (ctx.asymptotically_flat_case && !ctx.l2s2.empty()) {
        const double total = ctx.l2s2.back();
        const double T = ctx.l2s2_t.back();
        const double share = total > 0.0 ? (total - interpolate_at(ctx.l2s2_t, ctx.l2s2, 0.75 * T)) / total : 0.0;
        rep.l2s2_last_quarter_share = share;
        rep.l2s2_plateau = share <= options.plateau_share;
    }

    rep.verdict = rep.monotone_tail && rep.final_h1_gap <= rep.threshold ? ScatteringVerdict::consistent
                                                                         : ScatteringVerdict::not_consistent;
    if (leaked)
        rep.note = "snapshots after the first boundary leak were dropped";
    return rep;
}

nlohmann::json to_json(const ScatteringReport& r)
{
    nlohmann::json j;
    j["times"] = r.times;
    j["cauchy"] = r.cauchy;
    j["successive"] = r.successive;
    j["forward_errors"] = r.forward_errors;
    j["unitarity_defect"] = r.unitarity_defect;
    j["final_h1_gap"] = r.final_h1_gap;
    j["threshold"] = r.threshold;
    j["monotone_tail"] = r.monotone_tail;
    j["verdict"] = to_string(r.verdict);
    if (r.l2s2_last_quarter_share) {
        j["l2s2_last_quarter_share"] = *r.l2s2_last_quarter_share;
        j["l2s2_plateau"] = r.l2s2_plateau;
    }
    if (!r.note.empty())
        j["note"] = r.note;
    return j;
}

} // namespace dnls
