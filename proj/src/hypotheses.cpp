#include "dnls/hypotheses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dnls/errors.hpp"
#include "dnls/weights.hpp"

namespace dnls {

namespace {

constexpr double kAFloorFactor = 1e-10;
constexpr double kTrappingVanishTol = 1e-12;
constexpr double kTwoThirds = 2.0 / 3.0;

WorstPoint make_point(const Grid& g, std::size_t p, double ratio) { return {p, g.point(p), ratio}; }

double radius(const Point& x, int dim)
{
    double r2 = 0.0;
    for (int j = 0; j < dim; ++j)
        r2 += x[j] * x[j];
    return std::sqrt(r2);
}

DecayCheck decay_check(const Grid& grid, const RealVector& magnitude, double metadata_rate, bool known, double required,
                       const std::string& what)
{
    DecayCheck out;
    out.required_rate = required;
    out.metadata_rate = metadata_rate;
    const auto shells = dyadic_shell_maxima(grid, magnitude, required);
    out.sampled_stabilized = shells.stabilized;
    if (known) {
        out.holds = metadata_rate >= required;
        if (out.holds && !shells.stabilized)
            out.caveats.push_back(what + ": sampled ratio still growing at the box edge; decay beyond radius L "
                                         "is taken from profile metadata");
    } else {
        out.numerical_only = true;
        out.holds = shells.stabilized;
        out.caveats.push_back(what + ": numerical-only verdict from dyadic shell ratios");
    }
    return out;
}

} // namespace

std::string to_string(PairClass c)
{
    switch (c) {
    case PairClass::intercritical: return "intercritical";
    case PairClass::critical: return "critical";
    case PairClass::neither: return "neither";
    }
    return "neither";
}

ControlResult check_control(const EvaluatedProfile& a, const EvaluatedProfile& V, double sigma2, double sigma3)
{
    const Grid& g = a.grid;
    const RealVector trap = trapping_part(V);
    const double a_floor = kAFloorFactor * a.sup_norm;
    const double vanish_tol = kTrappingVanishTol * V.sup_norm;
    const double q = (sigma3 + 1.0) / (sigma2 + 1.0);

    ControlResult out;
    double worst_violation = -1.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
        const double av = a.value[p];
        if (av > a_floor) {
            const double ratio = trap[p] / std::pow(av, q);
            if (ratio > out.c0) {
                out.c0 = ratio;
                out.argsup = make_point(g, p, ratio);
            }
        } else if (trap[p] > vanish_tol && trap[p] > worst_violation) {
            worst_violation = trap[p];
            out.violation = make_point(g, p, trap[p]);
        }
    }
    out.holds = !out.violation.has_value();
    return out;
}

ShellProfile dyadic_shell_maxima(const Grid& grid, const RealVector& values, double rate)
{
    const int d = grid.dim();
    const double rmax = std::sqrt(static_cast<double>(d)) * grid.half_length();
    ShellProfile out;
    double outer = 1.0;
    out.radii.push_back(outer);
    while (outer < rmax) {
        outer *= 2.0;
        out.radii.push_back(outer);
    }
    out.maxima.assign(out.radii.size(), 0.0);
    std::vector<char> populated(out.radii.size(), 0);
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const Point x = grid.point(p);
        const double r = radius(x, d);
        std::size_t shell = 0;
        while (shell + 1 < out.radii.size() && r >= out.radii[shell])
            ++shell;
        const double w = std::isinf(rate) ? 1.0 : std::pow(1.0 + r * r, 0.5 * rate);
        const double v = std::abs(values[p]) * w;
        out.maxima[shell] = std::max(out.maxima[shell], v);
        populated[shell] = 1;
    }
    // Shells holding no grid points say nothing about growth.
    std::size_t last = out.maxima.size();
    while (last > 1 && !populated[last - 1])
        --last;
    double inner = 0.0;
    for (std::size_t s = 0; s + 1 < last; ++s)
        inner = std::max(inner, out.maxima[s]);
    const double edge = out.maxima[last - 1];
    out.stabilized = edge == 0.0 || (last > 1 && edge <= inner * (1.0 + 1e-9));
    return out;
}

DecayCheck check_delta_a_decay(const EvaluatedProfile& a, double sigma1, double sigma2)
{
    const double required = exponents_equal(sigma1, sigma2) ? 1.0 : 7.0 * (sigma2 + 1.0);
    const auto info = decay_info(a.spec, a.grid.dim());
    return decay_check(a.grid, a.laplacian, info.laplacian, info.known, required, "|Delta a|");
}

DecayCheck check_trapping_decay(const EvaluatedProfile& V, double sigma1, double sigma2, double sigma3)
{
    if (exponents_equal(sigma2, sigma3)) {
        DecayCheck out;
        out.not_required = true;
        return out;
    }
    const double required = sigma3 < sigma2 ? 7.0 * (sigma3 + 1.0) : (sigma3 + 1.0) / (sigma1 + 1.0);
    const auto info = decay_info(V.spec, V.grid.dim());
    return decay_check(V.grid, trapping_part(V), info.trapping, info.known, required, "trapping part");
}

PairClass classify_pair(const ProfileSpec& psi, double sigma)
{
    if (!(sigma > 0.0 && sigma < 2.0))
        throw std::invalid_argument("classify_pair: sigma must lie in (0, 2)");
    if (std::abs(sigma - kTwoThirds) <= kExponentTol)
        return PairClass::critical;
    if (sigma > kTwoThirds)
        return PairClass::intercritical;
    // <x>^{-m} lies in L^p(R^3) iff m p > 3; here p = 6/(4 - 5 sigma).
    const double threshold = (4.0 - 5.0 * sigma) / 2.0;
    const auto info = decay_info(psi, 3);
    const double rate = std::min(info.value, info.gradient);
    return rate > threshold ? PairClass::intercritical : PairClass::neither;
}

double compute_lambda(double v_sup, double sigma1, double sigma3)
{
    if (v_sup < 0.0 || !std::isfinite(v_sup))
        throw std::invalid_argument("compute_lambda: V_sup must be finite and nonnegative");
    if (!(sigma3 > 0.0 && sigma3 < sigma1))
        throw std::invalid_argument("compute_lambda: requires 0 < sigma3 < sigma1");
    if (v_sup == 0.0)
        return 0.0;
    // With s = x^2 maximize f(s) = V s^{s3} - s^{s1}/(2 s1 + 2).
    const double c = 2.0 * sigma1 + 2.0;
    auto f = [&](double s) { return v_sup * std::pow(s, sigma3) - std::pow(s, sigma1) / c; };
    const double s_star = std::pow(sigma3 * v_sup * c / sigma1, 1.0 / (sigma1 - sigma3));
    double best = f(s_star);

    // Golden-section refinement in log s around the stationary point.
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = std::log(s_star) - 0.5, hi = std::log(s_star) + 0.5;
    double m1 = hi - phi * (hi - lo), m2 = lo + phi * (hi - lo);
    double f1 = f(std::exp(m1)), f2 = f(std::exp(m2));
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        if (f1 < f2) {
            lo = m1;
            m1 = m2;
            f1 = f2;
            m2 = lo + phi * (hi - lo);
            f2 = f(std::exp(m2));
        } else {
            hi = m2;
            m2 = m1;
            f2 = f1;
            m1 = hi - phi * (hi - lo);
            f1 = f(std::exp(m1));
        }
    }
    best = std::max({best, f1, f2});
    return std::max(0.0, best);
}

double lambda_audit(double lambda, double v_sup, double sigma1, double sigma3, int n)
{
    double worst = -std::numeric_limits<double>::infinity();
    const double lmin = std::log(1e-6), lmax = std::log(1e6);
    for (int i = 0; i < n; ++i) {
        const double x = std::exp(lmin + (lmax - lmin) * i / (n - 1));
        const double lhs = v_sup * std::pow(x, 2.0 * sigma3 + 2.0);
        const double rhs = lambda * x * x + std::pow(x, 2.0 * sigma1 + 2.0) / (2.0 * sigma1 + 2.0);
        worst = std::max(worst, (lhs - rhs) / rhs);
    }
    return worst;
}

EtaResult compute_eta(const EvaluatedProfile& a, double sigma1, double sigma2)
{
    const Grid& g = a.grid;
    EtaResult out;
    out.theta = sigma2 / sigma1;
    const double e1 = 1.0 / (sigma2 + 1.0);
    const double e2 = (sigma1 + 1.0) / (sigma2 + 1.0);
    RealVector r1(g.size()), r2(g.size());
    for (std::size_t p = 0; p < g.size(); ++p) {
        const auto chi = weight::chi_stack(g.point(p), 3);
        const double lap_a = std::abs(a.laplacian[p]);
        r1[p] = lap_a == 0.0 ? 0.0 : std::pow(lap_a, e1) / (-chi.bilap);
        r2[p] = lap_a == 0.0 ? 0.0 : std::pow(lap_a, e2) / chi.lap;
        out.k1 = std::max(out.k1, r1[p]);
        out.k2 = std::max(out.k2, r2[p]);
    }
    const bool need_k1 = 1.0 - out.theta > 0.0;
    if ((need_k1 && !dyadic_shell_maxima(g, r1, 0.0).stabilized) || !dyadic_shell_maxima(g, r2, 0.0).stabilized)
        throw NumericalError("Delta a decay hypothesis violated numerically: eta supremum still growing at the "
                             "outermost dyadic shell");
    const double scale = 4.0 / (2.0 * sigma2 + 2.0);
    const double term1 = (1.0 - out.theta) * out.k1;
    const double term2 = out.theta * out.k2 * (sigma1 + 1.0) / sigma1;
    out.eta = std::max(1.0, scale * std::max(term1, term2));
    return out;
}

double eta_audit(const EvaluatedProfile& a, double sigma1, double sigma2, double eta, const std::vector<double>& ys)
{
    const Grid& g = a.grid;
    double worst = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
        const auto chi = weight::chi_stack(g.point(p), 3);
        const double lap_a = std::abs(a.laplacian[p]);
        for (double y : ys) {
            const double lhs = lap_a * std::pow(y, sigma2 + 1.0) / (2.0 * sigma2 + 2.0);
            const double rhs = 0.25 * eta * ((-chi.bilap) * y + chi.lap * std::pow(y, sigma1 + 1.0));
            if (lhs > 0.0)
                worst = std::max(worst, lhs / rhs);
        }
    }
    return worst;
}

bool HypothesisReport::bounded_energy_hypotheses() const
{
    return control.holds && delta_a_decay.holds && (trapping_decay.not_required || trapping_decay.holds);
}

HypothesisReport check_hypotheses(const ProblemSpec& problem, const HypothesisOverrides& overrides)
{
    const auto& e = problem.exponents;
    const auto& a = problem.damping;
    const auto& V = problem.potential;
    HypothesisReport r;
    r.control = check_control(a, V, e.sigma2, e.sigma3);
    r.delta_a_decay = check_delta_a_decay(a, e.sigma1, e.sigma2);
    r.trapping_decay = check_trapping_decay(V, e.sigma1, e.sigma2, e.sigma3);
    r.pair_a = classify_pair(a.spec, e.sigma2);
    r.pair_V = classify_pair(V.spec, e.sigma3);
    for (const auto* c : {&r.delta_a_decay, &r.trapping_decay})
        r.caveats.insert(r.caveats.end(), c->caveats.begin(), c->caveats.end());
    r.caveats.push_back("decay and control are checked on the box [-L, L)^d only; behaviour beyond radius L is "
                        "not certified by sampling");
    if (a.grid.dim() != 3)
        r.caveats.push_back("eta uses the three-dimensional chi stack; grid dimension differs");

    if (overrides.lambda) {
        r.lambda = *overrides.lambda;
        r.lambda_overridden = true;
        r.caveats.push_back("lambda overridden by configuration");
    } else {
        r.lambda = compute_lambda(V.sup_norm, e.sigma1, e.sigma3);
    }
    if (overrides.eta) {
        r.eta.eta = *overrides.eta;
        r.eta_overridden = true;
        r.caveats.push_back("eta overridden by configuration");
    } else {
        try {
            r.eta = compute_eta(a, e.sigma1, e.sigma2);
        } catch (const NumericalError& err) {
            r.eta = EtaResult{};
            r.caveats.push_back(std::string(err.what()) + "; eta set to 1");
        }
    }

    const auto a_info = decay_info(a.spec, a.grid.dim());
    const bool crit_or_inter_V = r.pair_V != PairClass::neither;
    r.scattering_case1 = e.sigma1 > kTwoThirds && r.pair_a == PairClass::intercritical
        && r.pair_V == PairClass::intercritical;
    r.scattering_case2 = a_info.one_minus_compact && e.sigma1 >= kTwoThirds - kExponentTol
        && e.sigma2 >= kTwoThirds - kExponentTol && crit_or_inter_V;
    return r;
}

nlohmann::json to_json(const HypothesisReport& r)
{
    using nlohmann::json;
    auto point_json = [](const WorstPoint& w) {
        return json{{"index", w.index}, {"x", w.location}, {"ratio", w.ratio}};
    };
    auto decay_json = [](const DecayCheck& c) -> json {
        if (c.not_required)
            return "not-required";
        return c.holds;
    };
    json worst = json::object();
    worst["control_argsup"] = point_json(r.control.argsup);
    if (r.control.violation)
        worst["control_violation"] = point_json(*r.control.violation);
    json j;
    j["control_holds"] = r.control.holds;
    j["c0"] = r.control.c0;
    j["eta"] = r.eta.eta;
    j["lambda"] = r.lambda;
    j["pair_a"] = to_string(r.pair_a);
    j["pair_V"] = to_string(r.pair_V);
    j["delta_a_decay"] = decay_json(r.delta_a_decay);
    j["trapping_decay"] = decay_json(r.trapping_decay);
    j["caveats"] = r.caveats;
    j["worst_points"] = worst;
    j["eta_overridden"] = r.eta_overridden;
    j["lambda_overridden"] = r.lambda_overridden;
    j["scattering_case1"] = r.scattering_case1;
    j["scattering_case2"] = r.scattering_case2;
    return j;
}

} // namespace dnls
