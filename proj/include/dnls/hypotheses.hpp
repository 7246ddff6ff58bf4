#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dnls/problem.hpp"
#include "dnls/profiles.hpp"

namespace dnls {

enum class PairClass { intercritical, critical, neither };
std::string to_string(PairClass c);

struct WorstPoint {
    std::size_t index = 0;
    Point location{0.0, 0.0, 0.0};
    double ratio = 0.0;
};

struct ControlResult {
    bool holds = true;
    double c0 = 0.0;
    /// Sample attaining c0.
    WorstPoint argsup;
    /// Largest trapping value where the damping vanishes, when it breaks the check.
    std::optional<WorstPoint> violation;
};

/// V_- + (grad V . x)_+ <= c0 a^{(s3+1)/(s2+1)} on the grid, with
/// a_floor = 1e-10 ||a||_inf separating "a positive" from "a vanishes".
ControlResult check_control(const EvaluatedProfile& a, const EvaluatedProfile& V, double sigma2, double sigma3);

/// Maximum of |f| <x>^rate over dyadic radial shells [0,1), [1,2), [2,4), ...
struct ShellProfile {
    std::vector<double> radii;   ///< outer radius of each shell
    std::vector<double> maxima;
    /// Outermost shell does not exceed the inner maximum.
    bool stabilized = true;
};

ShellProfile dyadic_shell_maxima(const Grid& grid, const RealVector& values, double rate);

struct DecayCheck {
    bool holds = true;
    bool not_required = false;
    double required_rate = 0.0;
    double metadata_rate = DecayInfo::infinite;
    bool numerical_only = false;
    bool sampled_stabilized = true;
    std::vector<std::string> caveats;
};

/// |Delta a| <~ <x>^{-7(s2+1)} for s2 < s1, <x>^{-1} for s2 = s1.
DecayCheck check_delta_a_decay(const EvaluatedProfile& a, double sigma1, double sigma2);

/// Decay of the trapping part: not required when s2 = s3; otherwise rate
/// 7(s3+1) if s3 < s2 and (s3+1)/(s1+1) if s3 > s2.
DecayCheck check_trapping_decay(const EvaluatedProfile& V, double sigma1, double sigma2, double sigma3);

/// Critical iff sigma = 2/3; intercritical if sigma > 2/3 or psi, grad psi in
/// L^{6/(4-5 sigma)}(R^3) (decay rate > (4 - 5 sigma)/2); neither otherwise.
PairClass classify_pair(const ProfileSpec& psi, double sigma);

/// Smallest Lambda >= 0 with V_sup x^{2 s3+2} <= Lambda x^2 + x^{2 s1+2}/(2 s1+2).
double compute_lambda(double v_sup, double sigma1, double sigma3);

/// Largest violation of the Lambda inequality over n log-spaced x in [1e-6, 1e6],
/// relative to the right-hand side. Nonpositive means the audit passes.
double lambda_audit(double lambda, double v_sup, double sigma1, double sigma3, int n = 10000);

struct EtaResult {
    double eta = 1.0;
    double theta = 1.0;
    double k1 = 0.0;  ///< sup |Delta a|^{1/(s2+1)} / (-Delta^2 chi)
    double k2 = 0.0;  ///< sup |Delta a|^{(s1+1)/(s2+1)} / Delta chi
};

/// Weight eta making the Delta a energy term absorbable by the virial terms.
/// Uses the three-dimensional chi stack. Throws NumericalError when a
/// supremum is still growing in the outermost dyadic shell.
EtaResult compute_eta(const EvaluatedProfile& a, double sigma1, double sigma2);

/// Worst ratio LHS/RHS of (1/(2s2+2))|Delta a| y^{s2+1} <= (eta/4)[(-Delta^2 chi) y + Delta chi y^{s1+1}]
/// over every grid sample and the given y values. <= 1 means the audit passes.
double eta_audit(const EvaluatedProfile& a, double sigma1, double sigma2, double eta, const std::vector<double>& ys);

struct HypothesisReport {
    ControlResult control;
    DecayCheck delta_a_decay;
    DecayCheck trapping_decay;
    PairClass pair_a = PairClass::neither;
    PairClass pair_V = PairClass::neither;
    double lambda = 0.0;
    EtaResult eta;
    bool lambda_overridden = false;
    bool eta_overridden = false;
    /// Scattering-theorem hypotheses: case 1 (intercritical pairs) and case 2
    /// (1 - a compactly supported, s1, s2 >= 2/3).
    bool scattering_case1 = false;
    bool scattering_case2 = false;
    std::vector<std::string> caveats;

    /// Control, both decay checks and the exponent ordering all hold.
    bool bounded_energy_hypotheses() const;
};

struct HypothesisOverrides {
    std::optional<double> lambda;
    std::optional<double> eta;
};

HypothesisReport check_hypotheses(const ProblemSpec& problem, const HypothesisOverrides& overrides = {});

nlohmann::json to_json(const HypothesisReport& report);

} // namespace dnls
