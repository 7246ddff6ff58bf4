#include "dnls/identities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "dnls/profiles.hpp"

namespace dnls {

namespace {

double max_abs_of(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

template <class F>
double max_over(const DiagnosticsSeries& s, F&& f)
{
    double m = 0.0;
    for (const auto& c : s.checkpoints)
        m = std::max(m, std::abs(f(c)));
    return m;
}

void attach_order(ResidualProfile& p, const DiagnosticsSeries& coarse, const DiagnosticsSeries* refined,
                  const std::vector<double>& fine_abs)
{
    if (refined == nullptr)
        return;
    p.measured_order = measured_order(p.max_abs, coarse.dt, max_abs_of(fine_abs), refined->dt);
}

} // namespace

std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::pass:
        return "PASS";
    case Verdict::fail:
        return "FAIL";
    case Verdict::inconclusive:
        return "INCONCLUSIVE";
    }
    return "?";
}

ResidualColumns residual_columns(const DiagnosticsSeries& series)
{
    ResidualColumns out;
    if (series.checkpoints.empty())
        return out;
    const auto& first = series.checkpoints.front().record;
    for (const auto& c : series.checkpoints) {
        out.t.push_back(c.record.t);
        out.mass.push_back(c.record.mass - first.mass + 2.0 * c.accum.diss_mass);
        out.energy.push_back(c.record.energy.total() - first.energy.total() - c.accum.energy_rhs());
        out.virial.push_back(c.record.morawetz - first.morawetz - c.accum.virial_total());
    }
    return out;
}

ResidualScales residual_scales(const DiagnosticsSeries& s)
{
    ResidualScales out;
    out.mass = max_over(s, [](const Checkpoint& c) { return c.record.mass; })
        + 2.0 * max_over(s, [](const Checkpoint& c) { return c.accum.diss_mass; });
    out.energy = max_over(s, [](const Checkpoint& c) { return c.record.energy.total(); });
    for (std::size_t i = 0; i < 5; ++i)
        out.energy += max_over(s, [i](const Checkpoint& c) { return c.accum.energy[i]; });
    out.virial = max_over(s, [](const Checkpoint& c) { return c.record.morawetz; });
    for (std::size_t i = 0; i < 6; ++i)
        out.virial += max_over(s, [i](const Checkpoint& c) { return c.accum.virial[i]; });
    return out;
}

ResidualProfile judge_residuals(const std::string& identity, const std::vector<double>& t,
                                const std::vector<double>& absolute, double scale, double tolerance)
{
    ResidualProfile p;
    p.identity = identity;
    p.t = t;
    p.absolute = absolute;
    p.scale = scale;
    p.tolerance = tolerance;
    p.relative.reserve(absolute.size());
    bool finite = std::isfinite(scale);
    for (double r : absolute) {
        const double rel = scale > 0.0 ? std::abs(r) / scale : std::abs(r);
        p.relative.push_back(rel);
        // std::max would silently drop a NaN, so track it separately.
        finite = finite && std::isfinite(rel);
        p.max_rel = std::max(p.max_rel, rel);
        p.max_abs = std::max(p.max_abs, std::abs(r));
    }
    if (!finite)
        p.max_rel = std::numeric_limits<double>::quiet_NaN();
    p.verdict = finite && p.max_rel <= tolerance ? Verdict::pass : Verdict::fail;
    return p;
}

std::optional<double> measured_order(double max_coarse, double dt_coarse, double max_fine, double dt_fine)
{
    if (!(max_coarse > 0.0) || !(max_fine > 0.0) || !(dt_coarse > dt_fine) || !(dt_fine > 0.0))
        return std::nullopt;
    return std::log(max_coarse / max_fine) / std::log(dt_coarse / dt_fine);
}

double calibrated_c_id(const Grid& grid, double dt, const IdentityOptions& options)
{
    if (!options.calibrate)
        return options.c_id_default;

    using Key = std::tuple<int, int, double, double, int>;
    static std::mutex mutex;
    static std::map<Key, double> cache;
    const Key key{grid.dim(), grid.n(), grid.half_length(), dt, options.virial_oversample};
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(key); it != cache.end())
            return std::max(options.c_id_default, it->second);
    }

    // Reference: cubic defocusing, no damping or potential, unit Gaussian.
    const ProblemSpec ref = make_problem(grid, Exponents{1.0, 1.0, 0.5}, ProfileSpec::zero(), ProfileSpec::zero());
    SimState state;
    state.u = ComplexField::from_function(grid, [&](const Point& x) {
        double r2 = 0.0;
        for (int j = 0; j < grid.dim(); ++j)
            r2 += x[j] * x[j];
        return Complex(std::exp(-0.5 * r2), 0.0);
    });
    EvolveOptions eo;
    eo.dt = dt;
    eo.T = 50 * dt;
    eo.cadence = 5;
    eo.virial_oversample = options.virial_oversample;
    const DiagnosticsSeries s = evolve(state, ref, eo);
    const ResidualColumns cols = residual_columns(s);
    const ResidualScales scales = residual_scales(s);
    double measured = 0.0;
    if (scales.energy > 0.0)
        measured = std::max(measured, max_abs_of(cols.energy) / scales.energy);
    if (scales.virial > 0.0)
        measured = std::max(measured, max_abs_of(cols.virial) / scales.virial);
    const double c = 10.0 * measured / (dt * dt);
    {
        std::lock_guard lock(mutex);
        cache[key] = c;
    }
    return std::max(options.c_id_default, c);
}

ResidualProfile verify_mass_law(const DiagnosticsSeries& series, double tolerance, const DiagnosticsSeries* refined)
{
    const ResidualColumns cols = residual_columns(series);
    ResidualProfile p = judge_residuals("mass", cols.t, cols.mass, residual_scales(series).mass, tolerance);
    if (refined)
        attach_order(p, series, refined, residual_columns(*refined).mass);
    return p;
}

ResidualProfile verify_energy_law(const DiagnosticsSeries& series, double tolerance, double regularity_tol,
                                  const DiagnosticsSeries* refined)
{
    const ResidualColumns cols = residual_columns(series);
    ResidualProfile p = judge_residuals("energy", cols.t, cols.energy, residual_scales(series).energy, tolerance);
    if (refined)
        attach_order(p, series, refined, residual_columns(*refined).energy);
    if (series.initial_high_band_fraction > regularity_tol) {
        p.verdict = Verdict::inconclusive;
        p.note = "initial data not resolved: high-band share of H1 norm exceeds regularity tolerance";
    }
    return p;
}

ResidualProfile verify_virial(const DiagnosticsSeries& series, double tolerance, double leak_tol,
                              const DiagnosticsSeries* refined)
{
    const ResidualColumns cols = residual_columns(series);
    ResidualProfile p = judge_residuals("virial", cols.t, cols.virial, residual_scales(series).virial, tolerance);
    if (refined)
        attach_order(p, series, refined, residual_columns(*refined).virial);
    if (!series.checkpoints.empty()) {
        const double m0 = series.checkpoints.front().record.mass;
        for (const auto& c : series.checkpoints) {
            if (c.record.shell_mass > leak_tol * m0) {
                p.verdict = Verdict::inconclusive;
                p.note = "boundary leak";
                break;
            }
        }
    }
    return p;
}

bool IdentityReport::any_fail() const
{
    return mass.verdict == Verdict::fail || energy.verdict == Verdict::fail || virial.verdict == Verdict::fail;
}

IdentityReport verify_identities(const DiagnosticsSeries& series, const Grid& grid, const IdentityOptions& options,
                                 const DiagnosticsSeries* refined)
{
    IdentityReport r;
    r.c_id = calibrated_c_id(grid, series.dt, options);
    r.tolerance = r.c_id * series.dt * series.dt;
    r.mass = verify_mass_law(series, r.tolerance, refined);
    r.energy = verify_energy_law(series, r.tolerance, options.regularity_tol, refined);
    r.virial = verify_virial(series, r.tolerance, options.leak_tol, refined);
    return r;
}

double boundary_leak(const ComplexField& u)
{
    if (u.space() != Space::physical)
        throw std::invalid_argument("boundary_leak expects a physical-space field");
    const Grid& g = u.grid();
    double sum = 0.0;
    for (std::size_t p = 0; p < u.size(); ++p)
        if (g.in_outer_shell(p))
            sum += std::norm(u[p]);
    return sum * g.cell_volume();
}

double interpolate_at(const std::vector<double>& t, const std::vector<double>& values, double at)
{
    if (t.empty())
        return 0.0;
    if (at <= t.front())
        return values.front();
    if (at >= t.back())
        return values.back();
    const auto it = std::upper_bound(t.begin(), t.end(), at);
    const std::size_t j = static_cast<std::size_t>(it - t.begin());
    const double w = (at - t[j - 1]) / (t[j] - t[j - 1]);
    return (1.0 - w) * values[j - 1] + w * values[j];
}

BoundMonitor monitor_bounds(const DiagnosticsSeries& series, const HypothesisReport* hypotheses,
                            const MonitorOptions& options)
{
    BoundMonitor m;
    m.within_hypotheses = hypotheses == nullptr || hypotheses->bounded_energy_hypotheses();
    if (series.checkpoints.empty())
        return m;

    std::vector<double> t, led, a_int, l4;
    double sup_abs_B = 0.0;
    bool have_B = false;
    bool mass_increase = false, coercivity = false, morawetz_bound = false, interaction_bound = false;
    double prev_mass = series.checkpoints.front().record.mass;
    const double roundoff = 1e-12 * std::max(prev_mass, 1e-300);
    m.h1_sq_initial = std::pow(series.checkpoints.front().record.h1, 2);

    for (const auto& c : series.checkpoints) {
        const auto& r = c.record;
        t.push_back(r.t);
        led.push_back(c.accum.led);
        a_int.push_back(c.accum.a_int);
        l4.push_back(c.accum.l4);
        m.sup_energy_plus = std::max(m.sup_energy_plus, r.energy_plus);
        m.sup_abs_modified = std::max(m.sup_abs_modified, std::abs(r.modified_energy));
        m.sup_abs_energy = std::max(m.sup_abs_energy, std::abs(r.energy.total()));
        m.sup_h1_sq = std::max(m.sup_h1_sq, r.h1 * r.h1);
        m.shell_mass.push_back(r.shell_mass);

        if (r.mass > prev_mass + roundoff)
            mass_increase = true;
        prev_mass = r.mass;
        const double half_grad = 0.5 * r.grad_l2 * r.grad_l2;
        if (r.energy_plus < half_grad - 1e-12 * std::max(1.0, half_grad))
            coercivity = true;
        const double l2 = std::sqrt(r.mass);
        const double bound_I = l2 * r.grad_l2;
        if (std::abs(r.morawetz) > bound_I * (1.0 + 1e-12) + 1e-300)
            morawetz_bound = true;
        if (std::isfinite(r.interaction_B)) {
            have_B = true;
            sup_abs_B = std::max(sup_abs_B, std::abs(r.interaction_B));
            if (std::abs(r.interaction_B) > l2 * l2 * l2 * r.grad_l2 * (1.0 + 1e-12) + 1e-300)
                interaction_bound = true;
        }
    }

    const double T = t.back();
    m.led_T = led.back();
    m.a_int_T = a_int.back();
    m.l4_T = l4.back();
    m.morawetz_l4 = 4.0 * std::numbers::pi * m.l4_T;
    m.morawetz_budget = have_B ? 2.0 * sup_abs_B : std::numeric_limits<double>::quiet_NaN();
    auto last_quarter_share = [&](const std::vector<double>& v) {
        const double total = v.back();
        if (!(total > 0.0))
            return 0.0;
        return (total - interpolate_at(t, v, 0.75 * T)) / total;
    };
    m.led_last_quarter_share = last_quarter_share(led);
    m.a_int_last_quarter_share = last_quarter_share(a_int);
    m.l4_third_quarter = interpolate_at(t, l4, 0.75 * T) - interpolate_at(t, l4, 0.5 * T);
    m.l4_last_quarter = m.l4_T - interpolate_at(t, l4, 0.75 * T);

    if (m.sup_h1_sq > options.c_mon * m.h1_sq_initial)
        m.flags.push_back("h1_growth");
    if (m.led_last_quarter_share > options.plateau_share)
        m.flags.push_back("led_no_plateau");
    if (m.a_int_last_quarter_share > options.plateau_share)
        m.flags.push_back("a_int_no_plateau");
    if (m.l4_last_quarter > m.l4_third_quarter && m.l4_last_quarter > 0.0)
        m.flags.push_back("l4_superlinear");
    if (!std::isfinite(m.l4_T))
        m.flags.push_back("l4_not_finite");
    if (mass_increase)
        m.flags.push_back("mass_increase");
    if (coercivity)
        m.flags.push_back("energy_plus_below_half_gradient");
    if (morawetz_bound)
        m.flags.push_back("morawetz_bound");
    if (interaction_bound)
        m.flags.push_back("interaction_bound");
    return m;
}

nlohmann::json to_json(const ResidualProfile& p)
{
    nlohmann::json j;
    j["identity"] = p.identity;
    j["max_rel_residual"] = p.max_rel;
    j["max_abs_residual"] = p.max_abs;
    j["measured_order"] = p.measured_order ? nlohmann::json(*p.measured_order) : nlohmann::json(nullptr);
    j["verdict"] = to_string(p.verdict);
    j["tolerance"] = p.tolerance;
    j["scale"] = p.scale;
    if (!p.note.empty())
        j["note"] = p.note;
    return j;
}

nlohmann::json to_json(const IdentityReport& r)
{
    return nlohmann::json::array({to_json(r.mass), to_json(r.energy), to_json(r.virial)});
}

nlohmann::json to_json(const BoundMonitor& m)
{
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    nlohmann::json j;
    j["sup_energy_plus"] = m.sup_energy_plus;
    j["sup_abs_modified_energy"] = m.sup_abs_modified;
    j["sup_abs_energy"] = m.sup_abs_energy;
    j["sup_h1_sq"] = m.sup_h1_sq;
    j["h1_sq_initial"] = m.h1_sq_initial;
    j["led_T"] = m.led_T;
    j["a_int_T"] = m.a_int_T;
    j["l4_T"] = m.l4_T;
    j["four_pi_l4_T"] = m.morawetz_l4;
    j["morawetz_budget"] = num(m.morawetz_budget);
    j["led_last_quarter_share"] = m.led_last_quarter_share;
    j["a_int_last_quarter_share"] = m.a_int_last_quarter_share;
    j["l4_third_quarter_increment"] = m.l4_third_quarter;
    j["l4_last_quarter_increment"] = m.l4_last_quarter;
    j["max_shell_mass"] = m.shell_mass.empty() ? 0.0 : *std::max_element(m.shell_mass.begin(), m.shell_mass.end());
    j["flags"] = m.flags;
    j["within_hypotheses"] = m.within_hypotheses;
    j["status"] = m.within_hypotheses ? (m.green() ? "green" : "flagged") : "outside theorem hypotheses";
    return j;
}

} // namespace dnls
