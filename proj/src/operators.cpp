#include "blochop/operators.hpp"

#include <cmath>

namespace blochop {

SymbolConfig SymbolConfig::make(AnalyticFunction psi1, AnalyticFunction psi2, AnalyticFunction phi,
                                const DiskGridSpec& grid) {
    auto sup = sup_over_grid([&](Cx z) { return std::abs(eval(phi, z)); }, grid);
    if (sup.value > 1.0 + 1e-9)
        throw std::domain_error("SymbolConfig: phi is not a self-map of the disk (grid sup " +
                                std::to_string(sup.value) + ")");
    SymbolConfig sc;
    sc.psi1 = std::move(psi1);
    sc.psi2 = std::move(psi2);
    sc.phi = std::move(phi);
    sc.phi_sup = sup.value;
    return sc;
}

OperatorSpec OperatorSpec::tn(SymbolConfig symbols, int n, double dilation_r) {
    if (n < 0) throw std::invalid_argument("OperatorSpec: Tn requires n >= 0");
    if (!(dilation_r > 0.0) || dilation_r > 1.0)
        throw std::invalid_argument("OperatorSpec: dilation_r must lie in (0, 1]");
    OperatorSpec spec;
    spec.kind = OperatorKind::Tn;
    spec.symbols = std::move(symbols);
    spec.n = n;
    spec.dilation_r = dilation_r;
    return spec;
}

OperatorSpec OperatorSpec::tmn(SymbolConfig symbols, int m, int n, double dilation_r) {
    if (m < 0 || n < 1 || m >= n)
        throw std::invalid_argument("OperatorSpec: Tmn requires 0 <= m < n, n >= 1");
    if (!(dilation_r > 0.0) || dilation_r > 1.0)
        throw std::invalid_argument("OperatorSpec: dilation_r must lie in (0, 1]");
    OperatorSpec spec;
    spec.kind = OperatorKind::Tmn;
    spec.symbols = std::move(symbols);
    spec.m = m;
    spec.n = n;
    spec.dilation_r = dilation_r;
    return spec;
}

std::pair<int, int> OperatorSpec::value_orders() const {
    if (kind == OperatorKind::Tn) return {n, n + 1};
    return {m, n};
}

std::vector<int> OperatorSpec::e_orders() const {
    if (kind == OperatorKind::Tn) return {n, n + 1, n + 2};
    if (m + 1 == n) return {m, n, n + 1};
    return {m, m + 1, n, n + 1};
}

namespace {

Cx clamp_to_disk(Cx w) {
    const double a = std::abs(w);
    if (a >= 1.0) return w * ((1.0 - 1e-15) / a);
    return w;
}

} // namespace

std::map<int, Cx> e_coefficients(const OperatorSpec& spec, Cx z, const EvalOptions& eval_opts) {
    const auto& s = spec.symbols;
    const Cx psi1 = eval(s.psi1, z, eval_opts);
    const Cx psi2 = eval(s.psi2, z, eval_opts);
    const Cx dpsi1 = eval_derivative(s.psi1, 1, z, eval_opts);
    const Cx dpsi2 = eval_derivative(s.psi2, 1, z, eval_opts);
    const Cx dphi = eval_derivative(s.phi, 1, z, eval_opts);

    std::map<int, Cx> e;
    if (spec.kind == OperatorKind::Tn) {
        e[spec.n] = dpsi1;
        e[spec.n + 1] = psi1 * dphi + dpsi2;
        e[spec.n + 2] = psi2 * dphi;
    } else if (spec.m + 1 == spec.n) {
        e[spec.m] = dpsi1;
        e[spec.n] = psi1 * dphi + dpsi2;
        e[spec.n + 1] = psi2 * dphi;
    } else {
        e[spec.m] = dpsi1;
        e[spec.m + 1] = psi1 * dphi;
        e[spec.n] = dpsi2;
        e[spec.n + 1] = psi2 * dphi;
    }
    return e;
}

OperatorEvaluator::OperatorEvaluator(OperatorSpec spec, const AnalyticFunction& f,
                                     EvalOptions eval_opts)
    : spec_(std::move(spec)), g_(dilate(f, spec_.dilation_r)), eval_opts_(eval_opts) {}

Cx OperatorEvaluator::operator()(Cx z) const {
    const auto [lo, hi] = spec_.value_orders();
    const Cx w = clamp_to_disk(eval(spec_.symbols.phi, z, eval_opts_));
    const Cx psi1 = eval(spec_.symbols.psi1, z, eval_opts_);
    const Cx psi2 = eval(spec_.symbols.psi2, z, eval_opts_);
    return psi1 * eval_derivative(g_, lo, w, eval_opts_) +
           psi2 * eval_derivative(g_, hi, w, eval_opts_);
}

Cx derivative_decomposed(const OperatorSpec& spec, const AnalyticFunction& f, Cx z,
                         const EvalOptions& eval_opts) {
    const AnalyticFunction g = dilate(f, spec.dilation_r);
    const Cx w = clamp_to_disk(eval(spec.symbols.phi, z, eval_opts));
    Cx acc = 0.0;
    for (const auto& [order, e] : e_coefficients(spec, z, eval_opts))
        acc += e * eval_derivative(g, order, w, eval_opts);
    return acc;
}

BoundednessReport boundedness_suprema(const OperatorSpec& spec, const Weight& w,
                                      const DiskGridSpec& grid, std::optional<double> gamma,
                                      const EvalOptions& eval_opts) {
    if (spec.kind == OperatorKind::Tn && !gamma)
        throw std::invalid_argument("boundedness_suprema: Tn requires gamma for the weighted form");

    BoundednessReport rep;
    for (int order : spec.e_orders()) {
        OrderSupremum os;
        os.order = order;
        os.exponent = spec.kind == OperatorKind::Tn ? *gamma + (order - spec.n) - 1.0
                                                    : double(order);
        auto plain = sup_over_grid(
            [&](Cx z) {
                const auto e = e_coefficients(spec, z, eval_opts);
                return weight_at(w, z) * std::abs(e.at(order));
            },
            grid);
        auto weighted = sup_over_grid(
            [&](Cx z) {
                const auto e = e_coefficients(spec, z, eval_opts);
                const Cx ph = eval(spec.symbols.phi, z, eval_opts);
                const double om = std::max(1.0 - std::norm(ph), 1e-300);
                return weight_at(w, z) * std::abs(e.at(order)) / std::pow(om, os.exponent);
            },
            grid);
        os.sup_plain = plain.value;
        os.argmax = plain.argmax;
        os.sup_weighted = weighted.value;
        os.weighted_converged = weighted.converged;
        rep.grid_level = std::max(rep.grid_level, plain.grid_level);
        rep.orders.push_back(os);
    }
    return rep;
}

RhoReport rho(const OperatorSpec& spec, const DiskGridSpec& grid, const EvalOptions& eval_opts) {
    auto g = sup_over_grid([&](Cx z) { return std::abs(eval(spec.symbols.phi, z, eval_opts)); },
                           grid);
    RhoReport rep;
    rep.value = g.value;
    rep.grid_level = g.grid_level;
    rep.boundary_trend = !g.converged && std::abs(g.argmax) >= grid.radius(g.grid_level) - 1e-12;
    return rep;
}

} // namespace blochop
