#include "blochop/funcalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace blochop {

double rising_factorial(double x, int k) {
    double p = 1.0;
    for (int t = 0; t < k; ++t) p *= x + t;
    return p;
}

double falling_factorial(int j, int k) {
    double p = 1.0;
    for (int t = 0; t < k; ++t) p *= j - t;
    return p;
}

namespace {

constexpr double kPoleEps = 1e-14;

void check_order(int k, const EvalOptions& opts) {
    if (k < 0) throw std::invalid_argument("derivative order must be >= 0");
    if (k > opts.max_order)
        throw std::domain_error("derivative order " + std::to_string(k) +
                                " exceeds configured max " + std::to_string(opts.max_order));
}

void check_in_disk(Cx z) {
    if (std::abs(z) >= 1.0)
        throw std::domain_error("evaluation point outside the open unit disk");
}

// Integer power by repeated multiplication; k is small here.
Cx ipow(Cx w, int k) {
    Cx p = 1.0;
    for (int t = 0; t < k; ++t) p *= w;
    return p;
}

} // namespace

void Polynomial::trim() {
    while (coeffs.size() > 1 && coeffs.back() == Cx(0.0)) coeffs.pop_back();
    if (coeffs.empty()) coeffs.push_back(Cx(0.0));
}

Cx Polynomial::eval(Cx z) const {
    Cx acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
    return acc;
}

Cx Polynomial::derivative(int k, Cx z) const {
    Cx acc = 0.0;
    const int n = static_cast<int>(coeffs.size());
    for (int j = n - 1; j >= k; --j) acc = acc * z + coeffs[j] * falling_factorial(j, k);
    return acc;
}

Cx MobiusPowerTerm::eval(Cx z) const {
    const Cx b = base(z);
    if (std::abs(b) < kPoleEps)
        throw std::domain_error("MobiusPowerTerm: evaluation at pole contact (|1 - conj(a) z| ~ 0)");
    return c * std::pow(b, -beta);
}

Cx MobiusPowerTerm::derivative(int k, Cx z) const {
    const Cx b = base(z);
    if (std::abs(b) < kPoleEps)
        throw std::domain_error("MobiusPowerTerm: evaluation at pole contact (|1 - conj(a) z| ~ 0)");
    return c * rising_factorial(beta, k) * ipow(std::conj(a), k) * std::pow(b, -(beta + k));
}

MobiusPowerTerm MobiusPowerTerm::differentiated() const {
    return MobiusPowerTerm{c * beta * std::conj(a), a, beta + 1.0};
}

Cx MobiusPowerSum::eval(Cx z) const {
    Cx acc = 0.0;
    for (const auto& t : terms) acc += t.eval(z);
    return acc;
}

Cx MobiusPowerSum::derivative(int k, Cx z) const {
    Cx acc = 0.0;
    for (const auto& t : terms) acc += t.derivative(k, z);
    return acc;
}

double PowerSeries::tail_bound(int k, double r) const {
    const int n = static_cast<int>(coeffs.size());
    if (n == 0) return 0.0;
    // Geometric continuation model: |c_j| <= A * q^(j - N) for j > N, with A
    // the largest trailing magnitude and q an observed trailing ratio.
    double amp = 0.0;
    for (int j = std::max(0, n - 3); j < n; ++j) amp = std::max(amp, std::abs(coeffs[j]));
    double q = 1.0;
    if (n >= 2) {
        const double den = std::abs(coeffs[n - 2]);
        if (den > 0.0) q = std::min(1.0, std::abs(coeffs[n - 1]) / den);
    }
    const double rr = std::min(r, rho_max);
    // tail = sum_{j>=n} amp * q^(j-n) * ff(j,k) * rr^(j-k), advanced by the
    // ratio q * rr * (j+1)/(j+1-k) per step. ff vanishes below j = k.
    const int j0 = std::max(n, k);
    double term = amp * std::pow(q, j0 - n) * falling_factorial(j0, k) * std::pow(rr, j0 - k);
    double bound = 0.0;
    for (int j = j0; j < j0 + 4000; ++j) {
        bound += term;
        if (!std::isfinite(bound)) break;
        if (term < 1e-18 * (bound + 1e-300)) break;
        term *= q * rr * double(j + 1) / double(j + 1 - k);
    }
    return bound;
}

Cx PowerSeries::eval(Cx z, double tail_tol) const {
    const double r = std::abs(z);
    if (r > rho_max)
        throw std::domain_error("PowerSeries: point outside guard radius rho_max");
    const double tb = tail_bound(0, r);
    if (tb > tail_tol)
        throw std::domain_error("PowerSeries: tail bound exceeds tolerance");
    Cx acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
    return acc;
}

Cx PowerSeries::derivative(int k, Cx z, double tail_tol) const {
    const double r = std::abs(z);
    if (r > rho_max)
        throw std::domain_error("PowerSeries: point outside guard radius rho_max");
    const double tb = tail_bound(k, r);
    if (tb > tail_tol)
        throw std::domain_error("PowerSeries: derivative tail bound exceeds tolerance");
    Cx acc = 0.0;
    const int n = static_cast<int>(coeffs.size());
    for (int j = n - 1; j >= k; --j) acc = acc * z + coeffs[j] * falling_factorial(j, k);
    return acc;
}

Cx eval(const AnalyticFunction& f, Cx z, const EvalOptions& opts) {
    check_in_disk(z);
    return std::visit(
        [&](const auto& rep) -> Cx {
            using T = std::decay_t<decltype(rep)>;
            if constexpr (std::is_same_v<T, PowerSeries>)
                return rep.eval(z, opts.series_tail_tol);
            else
                return rep.eval(z);
        },
        f.rep());
}

Cx eval_derivative(const AnalyticFunction& f, int k, Cx z, const EvalOptions& opts) {
    check_in_disk(z);
    check_order(k, opts);
    if (k == 0) return eval(f, z, opts);
    return std::visit(
        [&](const auto& rep) -> Cx {
            using T = std::decay_t<decltype(rep)>;
            if constexpr (std::is_same_v<T, PowerSeries>)
                return rep.derivative(k, z, opts.series_tail_tol);
            else
                return rep.derivative(k, z);
        },
        f.rep());
}

namespace {

PowerSeries to_series(const Polynomial& p, double rho_max) {
    return PowerSeries{p.coeffs, rho_max};
}

} // namespace

AnalyticFunction linear_combine(const std::vector<Cx>& coeffs,
                                const std::vector<AnalyticFunction>& fs) {
    if (fs.empty()) throw std::invalid_argument("linear_combine: empty function list");
    if (coeffs.size() != fs.size())
        throw std::invalid_argument("linear_combine: coefficient/function count mismatch");

    bool any_mobius = false, any_series = false, any_poly = false;
    for (const auto& f : fs) {
        any_mobius |= f.is_mobius();
        any_series |= f.is_series();
        any_poly |= f.is_polynomial();
    }
    if (any_mobius && (any_series || any_poly))
        throw std::invalid_argument("linear_combine: Mobius sums combine only with Mobius sums");

    if (any_mobius) {
        MobiusPowerSum out;
        for (size_t i = 0; i < fs.size(); ++i) {
            for (const auto& t : std::get<MobiusPowerSum>(fs[i].rep()).terms) {
                if (coeffs[i] == Cx(0.0)) continue;
                out.terms.push_back(MobiusPowerTerm{coeffs[i] * t.c, t.a, t.beta});
            }
        }
        if (out.terms.empty()) return AnalyticFunction(Polynomial{{Cx(0.0)}});
        return AnalyticFunction(std::move(out));
    }

    if (any_series) {
        double rho = 1.0;
        size_t n = 0;
        for (const auto& f : fs) {
            if (f.is_series()) {
                const auto& s = std::get<PowerSeries>(f.rep());
                rho = std::min(rho, s.rho_max);
                n = std::max(n, s.coeffs.size());
            } else {
                n = std::max(n, std::get<Polynomial>(f.rep()).coeffs.size());
            }
        }
        PowerSeries out;
        out.rho_max = rho;
        out.coeffs.assign(n, Cx(0.0));
        for (size_t i = 0; i < fs.size(); ++i) {
            const auto add = [&](const std::vector<Cx>& cs) {
                for (size_t j = 0; j < cs.size(); ++j) out.coeffs[j] += coeffs[i] * cs[j];
            };
            if (fs[i].is_series())
                add(std::get<PowerSeries>(fs[i].rep()).coeffs);
            else
                add(to_series(std::get<Polynomial>(fs[i].rep()), rho).coeffs);
        }
        return AnalyticFunction(std::move(out));
    }

    size_t n = 0;
    for (const auto& f : fs) n = std::max(n, std::get<Polynomial>(f.rep()).coeffs.size());
    Polynomial out;
    out.coeffs.assign(n, Cx(0.0));
    for (size_t i = 0; i < fs.size(); ++i) {
        const auto& cs = std::get<Polynomial>(fs[i].rep()).coeffs;
        for (size_t j = 0; j < cs.size(); ++j) out.coeffs[j] += coeffs[i] * cs[j];
    }
    out.trim();
    return AnalyticFunction(std::move(out));
}

AnalyticFunction dilate(const AnalyticFunction& f, double r) {
    if (!(r > 0.0) || r > 1.0)
        throw std::invalid_argument("dilate: r must lie in (0, 1]");
    if (r == 1.0) return f;
    return std::visit(
        [&](const auto& rep) -> AnalyticFunction {
            using T = std::decay_t<decltype(rep)>;
            if constexpr (std::is_same_v<T, Polynomial>) {
                Polynomial out = rep;
                double rj = 1.0;
                for (auto& c : out.coeffs) { c *= rj; rj *= r; }
                return AnalyticFunction(std::move(out));
            } else if constexpr (std::is_same_v<T, MobiusPowerSum>) {
                // f(rz): 1 - conj(a)(rz) = 1 - conj(r a) z for real r.
                MobiusPowerSum out = rep;
                for (auto& t : out.terms) t.a *= r;
                return AnalyticFunction(std::move(out));
            } else {
                PowerSeries out = rep;
                double rj = 1.0;
                for (auto& c : out.coeffs) { c *= rj; rj *= r; }
                out.rho_max = std::min(1.0 - 1e-12, out.rho_max / r);
                return AnalyticFunction(std::move(out));
            }
        },
        f.rep());
}

Cx finite_difference_derivative(const AnalyticFunction& f, int k, Cx z, double h,
                                const EvalOptions& opts) {
    if (!(h > 0.0)) throw std::invalid_argument("finite_difference_derivative: h must be > 0");
    if (k < 0) throw std::invalid_argument("finite_difference_derivative: k must be >= 0");
    if (std::abs(z) + h >= 1.0)
        throw std::domain_error("finite_difference_derivative: stencil leaves the unit disk");

    const int n_pts = 64;
    const double two_pi = 2.0 * std::numbers::pi;
    Cx acc = 0.0;
    for (int j = 0; j < n_pts; ++j) {
        const double th = two_pi * j / n_pts;
        const Cx w = std::polar(h, th);
        acc += eval(f, z + w, opts) * std::polar(1.0, -k * th);
    }
    double kfact = 1.0;
    for (int t = 2; t <= k; ++t) kfact *= t;
    return acc * (kfact / (n_pts * std::pow(h, k)));
}

} // namespace blochop
