#pragma once

#include <functional>
#include <string>
#include <vector>

#include "blochop/norms.hpp"
#include "blochop/operators.hpp"
#include "blochop/testfn.hpp"

// Boundary limsup quantities and the essential-norm estimators. A limsup as
// |phi(z)| -> 1 has no constructive content; the numerical surrogate is the
// stabilized tail of per-level suprema over the sets {|phi(z)| >= 1 - eps_j}.

namespace blochop {

struct LimsupLevel {
    double eps = 0.0;
    double sup = 0.0;
    long count = 0; // grid points inside the level set
};

struct LimsupEstimate {
    double value = 0.0;
    std::vector<LimsupLevel> levels;
    bool empty_boundary = false; // no grid point reaches the first level
    bool diverged = false;       // level sups grow by > 1.5x repeatedly
    bool stabilized = false;     // last two level sups within 5%
};

struct AQuantityOptions {
    int M = 24;                  // base grid level (rings extend to 4J for the levels)
    int J = 12;                  // number of boundary levels, eps_j = 4^-j
    int max_angles = 4096;
    double stability_rel = 0.05;
    double growth_factor = 1.5;
};

/// A(u, phi, g) = limsup_{|phi(z)|->1} mu(z) |u(z)| / (1-|phi(z)|^2)^g,
/// estimated by per-level suprema on a boundary-refined ring grid.
LimsupEstimate a_quantity(const std::function<Cx(Cx)>& u, const AnalyticFunction& phi,
                          double gamma_exp, const Weight& w, const AQuantityOptions& opts = {});

enum class Verdict { Compact, NonCompact, Inconclusive };

std::string to_string(Verdict v);

struct TermEstimate {
    std::string label;
    int order = 0;
    double exponent = 0.0;
    LimsupEstimate estimate;
};

struct LowerSample {
    std::string family;
    Cx z{0.0, 0.0};    // testing point
    Cx base{0.0, 0.0}; // phi(z), the family base point
    double value = 0.0;
    double norm = 0.0; // computed source-space norm used for renormalization
};

struct EstimateReport {
    double lower = 0.0;
    double upper_max = 0.0;
    double upper_sum = 0.0;
    std::vector<TermEstimate> terms;
    std::vector<LowerSample> lower_samples;
    double fi_norm_limsup = 0.0; // H-inf diagnostic: max_i tail ||T f_i||_Bmu
    Verdict verdict = Verdict::Inconclusive;
    double tol_used = 0.0;
    BoundednessReport bounded;
    std::vector<std::string> diagnostics;
};

struct EssnormOptions {
    AQuantityOptions levels;
    DiskGridSpec norm_grid;            // Bloch-norm sups in lower estimates
    QkNormOptions qk_norm_opts = coarse_xi_options(); // renormalization sweep
    double lower_modulus_cap = 1.0;    // optional cap on base-point moduli
    int lower_points = 3;              // deepest level bands to test from
    double verdict_scale_rel = 1e-3;   // tol = rel * max boundedness supremum
    EvalOptions eval;

    static QkNormOptions coarse_xi_options() {
        QkNormOptions o;
        o.xi_level = 2;
        return o;
    }
};

/// Essential norm of T^n : Q_K(p,q) -> B_mu. Upper terms are the three
/// A-quantities with exponents gamma+n-1, gamma+n, gamma+n+1; the lower bound
/// tests the f/g/h families at the deepest boundary-approach points,
/// renormalized by their computed Q_K norms.
EstimateReport essnorm_qk_to_bloch(const OperatorSpec& spec, const SpaceParams& params,
                                   const Weight& w, const EssnormOptions& opts = {});

/// Essential norm of T^(m,n) : H-inf -> B_mu for m+1 < n (four terms with
/// exponents equal to the orders) and m+1 = n (merged middle coefficient).
/// The lower bound extracts single terms with the derivative-delta families;
/// the f_i-family norm form is recorded as a diagnostic.
EstimateReport essnorm_hinf_mn(const OperatorSpec& spec, const Weight& w,
                               const EssnormOptions& opts = {});
EstimateReport essnorm_hinf_m1n(const OperatorSpec& spec, const Weight& w,
                                const EssnormOptions& opts = {});

/// Verdict from the report: compact iff upper_sum <= tol, non-compact iff
/// lower >= 10 tol. Throws on lower > 1.05 * upper_sum (estimator
/// inconsistency).
Verdict compactness_verdict(double lower, double upper_sum, double tol);

struct DilationPoint {
    double r = 1.0;
    double value = 0.0; // sup over the normalized suite of ||(T - T_r) f||_Bmu
};

/// Monitoring sequence for ||T - T_r|| over a dilation schedule, evaluated on
/// a unit-normalized test suite. This is a lower bound on the operator-norm
/// difference (a heuristic monitor, not a certified upper bound).
std::vector<DilationPoint> dilation_upper_bound(
    const OperatorSpec& spec, const Weight& w, const std::vector<double>& r_schedule,
    const std::vector<std::pair<AnalyticFunction, double>>& normalized_suite,
    const DiskGridSpec& grid = {}, const EvalOptions& eval_opts = {});

/// |T f(0)| + sup mu |(T f)'| for an arbitrary argument function.
double bloch_mu_norm_of_image(const OperatorSpec& spec, const AnalyticFunction& f,
                              const Weight& w, const DiskGridSpec& grid = {},
                              const EvalOptions& eval_opts = {});

} // namespace blochop
