#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "blochop/funcalg.hpp"

// Radial weights, kernels, and the numerical admissibility checks gating the
// function spaces.

namespace blochop {

struct NormalityParams {
    double a = 0.0;
    double b = 0.0;
    double delta = 0.0; // search start; the exponent pinch may establish later
};

/// Radial weight mu(|z|) > 0 on [0, 1).
class Weight {
public:
    static Weight alpha(double alpha);
    static Weight tabulated(std::vector<double> radii, std::vector<double> values);

    double at_radius(double r) const;
    bool is_alpha() const { return kind_ == Kind::Alpha; }
    double alpha_exponent() const { return alpha_; }

    std::optional<NormalityParams> normality_params; // user-supplied hint

private:
    enum class Kind { Alpha, Tabulated };
    Kind kind_ = Kind::Alpha;
    double alpha_ = 1.0;
    std::vector<double> radii_, values_;
};

/// mu(z) = mu(|z|); requires |z| < 1.
double weight_at(const Weight& w, Cx z);

/// Nondecreasing continuous kernel K on [0, infinity).
class Kernel {
public:
    static Kernel power(double s);       // K(t) = t^s, s > 0
    static Kernel sampled(std::vector<double> ts, std::vector<double> values);

    double operator()(double t) const;
    bool is_power() const { return kind_ == Kind::Power; }
    double power_exponent() const { return s_; }

private:
    enum class Kind { Power, Sampled };
    Kind kind_ = Kind::Power;
    double s_ = 1.0;
    std::vector<double> ts_, values_;
};

struct SpaceParams {
    double p = 2.0;
    double q = 0.0;
    Kernel kernel = Kernel::power(1.0);
    double gamma = 1.0; // (q + 2) / p, derived

    static SpaceParams make(double p, double q, Kernel kernel);
};

struct NormalityReport {
    bool ok = false;
    double established_from = 0.0; // radius from which both pinches held
    std::string detail;
    // first/last offending adjacent pair when monotonicity never settles
    std::optional<std::pair<double, double>> witness;
    std::optional<std::pair<double, double>> witness_values;
};

/// Check the two normal-weight pinch conditions for exponents b > a > 0 on a
/// refining radial grid over [delta, 1). The start delta is a lower bound:
/// the conditions may establish at a later grid radius, matching the
/// existential constant in the definition.
NormalityReport check_normal(const Weight& w, double a, double b, double delta,
                             int levels = 24);

/// Sweep variant: uses the weight's stored hint, or (alpha/2, 2*alpha, 0) for
/// alpha weights.
NormalityReport check_normal(const Weight& w, int levels = 24);

struct DyadicQuadReport {
    bool finite = false;     // verdict
    bool converged = false;  // increments fell below tolerance before the cap
    double value = 0.0;
    int levels_used = 0;
    std::string detail;
};

/// Integral of (1-r^2)^q K(-log r) r dr over [0,1) by dyadic panel
/// refinement toward both endpoints; divergence is declared when the last
/// three same-side panel increments each grow by a factor > 1.5, or when the
/// level cap is hit with non-decaying increments.
DyadicQuadReport check_kernel_integrability(const SpaceParams& params);

/// Integral of K(-log r) (1-r)^(min(-1,q)) log(1/(1-r))^[q = -1] r dr over
/// [0,1), same contract. The characteristic exponent uses exact comparison
/// q == -1.
DyadicQuadReport check_condition_8(const SpaceParams& params);

} // namespace blochop
