#pragma once

#include <map>
#include <optional>
#include <vector>

#include "blochop/funcalg.hpp"
#include "blochop/grid.hpp"
#include "blochop/weights.hpp"

// The generalized Stevic-Sharma operators
//   (T^n f)(z)     = psi1(z) f^(n)(phi(z))  + psi2(z) f^(n+1)(phi(z))
//   (T^(m,n) f)(z) = psi1(z) f^(m)(phi(z))  + psi2(z) f^(n)(phi(z)),  m < n
// together with the coefficient decomposition of (T f)' and the dilation
// family used for upper bounds.

namespace blochop {

enum class OperatorKind { Tn, Tmn };

struct SymbolConfig {
    AnalyticFunction psi1;
    AnalyticFunction psi2;
    AnalyticFunction phi; // numerically validated self-map
    double phi_sup = 0.0; // grid estimate of ||phi||_inf

    /// Validates sup |phi| <= 1 + 1e-9 on the grid; throws otherwise.
    static SymbolConfig make(AnalyticFunction psi1, AnalyticFunction psi2, AnalyticFunction phi,
                             const DiskGridSpec& grid = {.M = 16});
};

struct OperatorSpec {
    OperatorKind kind = OperatorKind::Tn;
    SymbolConfig symbols;
    int n = 0;              // Tn: n >= 0; Tmn: n >= 1
    int m = 0;              // Tmn only, m >= 0, m < n
    double dilation_r = 1.0;

    static OperatorSpec tn(SymbolConfig symbols, int n, double dilation_r = 1.0);
    static OperatorSpec tmn(SymbolConfig symbols, int m, int n, double dilation_r = 1.0);

    /// Derivative orders of f used by apply: {n, n+1} or {m, n}.
    std::pair<int, int> value_orders() const;
    /// Orders carried by the E-coefficient map of (T f)'.
    std::vector<int> e_orders() const;
};

/// E_i(z) in (T f)'(z) = sum_i E_i(z) f^(i)(phi(z)). For Tn the orders are
/// {n, n+1, n+2} with values {psi1', psi1 phi' + psi2', psi2 phi'}; for Tmn
/// with m+1 < n they are {m, m+1, n, n+1} with {psi1', psi1 phi', psi2',
/// psi2 phi'}; for m+1 = n the middle orders merge to psi1 phi' + psi2'.
std::map<int, Cx> e_coefficients(const OperatorSpec& spec, Cx z,
                                 const EvalOptions& eval_opts = {});

/// Pointwise evaluator for (T f)(z); dilation r < 1 replaces f by f(r .).
class OperatorEvaluator {
public:
    OperatorEvaluator(OperatorSpec spec, const AnalyticFunction& f, EvalOptions eval_opts = {});
    Cx operator()(Cx z) const;

private:
    OperatorSpec spec_;
    AnalyticFunction g_; // dilated argument function
    EvalOptions eval_opts_;
};

inline OperatorEvaluator apply(const OperatorSpec& spec, const AnalyticFunction& f,
                               const EvalOptions& eval_opts = {}) {
    return OperatorEvaluator(spec, f, eval_opts);
}

/// (T f)'(z) through the E-coefficient decomposition; agrees with the stencil
/// derivative of apply.
Cx derivative_decomposed(const OperatorSpec& spec, const AnalyticFunction& f, Cx z,
                         const EvalOptions& eval_opts = {});

struct OrderSupremum {
    int order = 0;
    double sup_plain = 0.0;      // sup mu |E_i|
    Cx argmax{0.0, 0.0};
    double exponent = 0.0;       // weighted-form exponent
    double sup_weighted = 0.0;   // sup mu |E_i| / (1 - |phi|^2)^exponent
    bool weighted_converged = false;
};

struct BoundednessReport {
    std::vector<OrderSupremum> orders;
    int grid_level = 0;
};

/// Necessary-boundedness suprema sup mu |E_i| plus the weighted forms used by
/// the essential-norm criteria. For Tn the weighted exponent is
/// gamma + (i - n) - 1 (gamma required); for Tmn it is the order i itself.
BoundednessReport boundedness_suprema(const OperatorSpec& spec, const Weight& w,
                                      const DiskGridSpec& grid = {},
                                      std::optional<double> gamma = std::nullopt,
                                      const EvalOptions& eval_opts = {});

struct RhoReport {
    double value = 0.0;
    bool boundary_trend = false; // sup still climbing on the outer rings
    int grid_level = 0;
};

/// Grid estimate of rho = ||phi||_inf.
RhoReport rho(const OperatorSpec& spec, const DiskGridSpec& grid = {},
              const EvalOptions& eval_opts = {});

} // namespace blochop
