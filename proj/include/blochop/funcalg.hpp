#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <variant>
#include <vector>

// Representations of functions analytic on the unit disk with exact (or
// tail-bounded) evaluation of arbitrary-order derivatives.

namespace blochop {

using Cx = std::complex<double>;

/// Rising factorial (x)_k = x (x+1) ... (x+k-1); empty product for k = 0.
double rising_factorial(double x, int k);

/// Falling factorial j (j-1) ... (j-k+1) as a double.
double falling_factorial(int j, int k);

struct EvalOptions {
    int max_order = 12;            // cap on requested derivative order
    double series_tail_tol = 1e-6; // truncated-series tail budget (absolute)
};

/// Polynomial with complex coefficients, degree 0 upward.
struct Polynomial {
    std::vector<Cx> coeffs;

    Polynomial() = default;
    explicit Polynomial(std::vector<Cx> c) : coeffs(std::move(c)) { trim(); }

    void trim(); // drop trailing zeros (zero polynomial keeps one 0 entry)
    int degree() const { return static_cast<int>(coeffs.size()) - 1; }

    Cx eval(Cx z) const;
    Cx derivative(int k, Cx z) const;
};

/// z |-> c * (1 - conj(a) z)^(-beta), principal branch.
///
/// Well defined on the disk for |a| <= 1 since Re(1 - conj(a) z) > 0 there.
/// The k-th derivative has the closed form
///   c * (beta)_k * conj(a)^k * (1 - conj(a) z)^(-beta - k).
struct MobiusPowerTerm {
    Cx c;
    Cx a;
    double beta = 1.0;

    Cx base(Cx z) const { return 1.0 - std::conj(a) * z; } // 1 - conj(a) z
    Cx eval(Cx z) const;
    Cx derivative(int k, Cx z) const;

    /// The term representing d/dz of this term (c * beta * conj(a), beta+1).
    MobiusPowerTerm differentiated() const;
};

struct MobiusPowerSum {
    std::vector<MobiusPowerTerm> terms;

    Cx eval(Cx z) const;
    Cx derivative(int k, Cx z) const;
};

/// Truncated power series, valid for |z| <= rho_max < 1.
///
/// The dropped tail is estimated from the trailing coefficients assuming a
/// geometric continuation; evaluation fails when the estimate exceeds the
/// configured tolerance.
struct PowerSeries {
    std::vector<Cx> coeffs;
    double rho_max = 0.99;

    Cx eval(Cx z, double tail_tol) const;
    Cx derivative(int k, Cx z, double tail_tol) const;
    double tail_bound(int k, double r) const;
};

/// A disk-analytic function: one of the concrete representations above.
class AnalyticFunction {
public:
    using Rep = std::variant<Polynomial, MobiusPowerSum, PowerSeries>;

    AnalyticFunction() : rep_(Polynomial{{Cx(0.0)}}) {}
    AnalyticFunction(Polynomial p) : rep_(std::move(p)) {}
    AnalyticFunction(MobiusPowerTerm t) : rep_(MobiusPowerSum{{t}}) {}
    AnalyticFunction(MobiusPowerSum s) : rep_(std::move(s)) {}
    AnalyticFunction(PowerSeries s) : rep_(std::move(s)) {}

    const Rep& rep() const { return rep_; }
    bool is_polynomial() const { return std::holds_alternative<Polynomial>(rep_); }
    bool is_mobius() const { return std::holds_alternative<MobiusPowerSum>(rep_); }
    bool is_series() const { return std::holds_alternative<PowerSeries>(rep_); }

private:
    Rep rep_;
};

/// Value of f at z, |z| < 1 (and |z| <= rho_max for series).
Cx eval(const AnalyticFunction& f, Cx z, const EvalOptions& opts = {});

/// k-th complex derivative at z; k = 0 is eval.
Cx eval_derivative(const AnalyticFunction& f, int k, Cx z, const EvalOptions& opts = {});

/// Pointwise sum_i coeffs[i] * fs[i]. Polynomials are promoted to series when
/// mixed with a series; Mobius sums combine only with Mobius sums.
AnalyticFunction linear_combine(const std::vector<Cx>& coeffs,
                                const std::vector<AnalyticFunction>& fs);

/// The function z |-> f(r z), 0 < r <= 1.
AnalyticFunction dilate(const AnalyticFunction& f, double r);

/// k-th derivative via trapezoidal sampling of the Cauchy integral on a
/// circle of radius h (the complex-step central stencil generalised to all
/// orders). Independent of the closed-form derivative paths; the stencil
/// circle must stay inside the disk.
Cx finite_difference_derivative(const AnalyticFunction& f, int k, Cx z, double h,
                                const EvalOptions& opts = {});

} // namespace blochop
