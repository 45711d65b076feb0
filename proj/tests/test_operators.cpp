#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "blochop/operators.hpp"

using namespace blochop;

namespace {

AnalyticFunction poly(std::vector<Cx> c) { return AnalyticFunction(Polynomial{std::move(c)}); }
AnalyticFunction constant(Cx c) { return poly({c}); }
AnalyticFunction identity_map() { return poly({Cx(0.0), Cx(1.0)}); }
AnalyticFunction half_map() { return poly({Cx(0.0), Cx(0.5)}); }

Cx stencil_derivative(const std::function<Cx(Cx)>& f, Cx z, double h) {
    const int n = 64;
    Cx acc = 0.0;
    for (int j = 0; j < n; ++j) {
        const double th = 2.0 * std::numbers::pi * j / n;
        acc += f(z + std::polar(h, th)) * std::polar(1.0, -th);
    }
    return acc / (double(n) * h);
}

} // namespace

TEST_CASE("operator application basics") {
    auto id_op = OperatorSpec::tn(
        SymbolConfig::make(constant(Cx(1.0)), constant(Cx(0.0)), identity_map()), 0);
    AnalyticFunction f = poly({Cx(0.3), Cx(-1.0), Cx(0.0), Cx(2.0)});
    for (Cx z : {Cx(0.0, 0.0), Cx(0.4, -0.3), Cx(-0.7, 0.1)})
        CHECK(std::abs(apply(id_op, f)(z) - eval(f, z)) < 1e-15);

    auto diff_op = OperatorSpec::tn(
        SymbolConfig::make(constant(Cx(0.0)), constant(Cx(1.0)), identity_map()), 0);
    CHECK(std::abs(apply(diff_op, poly({Cx(0.0), Cx(0.0), Cx(1.0)}))(Cx(0.5, 0.0)) - Cx(1.0)) <
          1e-15);

    // psi1 = z, psi2 = z^2, phi = z/2, n = 0, f = z^3 at z = 0.8:
    // 0.8 * 0.4^3 + 0.64 * 3 * 0.4^2 = 0.3584
    auto mixed = OperatorSpec::tn(
        SymbolConfig::make(poly({Cx(0.0), Cx(1.0)}), poly({Cx(0.0), Cx(0.0), Cx(1.0)}),
                           half_map()),
        0);
    CHECK(std::abs(apply(mixed, poly({Cx(0.0), Cx(0.0), Cx(0.0), Cx(1.0)}))(Cx(0.8, 0.0)) -
                   Cx(0.3584)) < 1e-12);
}

TEST_CASE("self-map validation rejects expanding maps") {
    CHECK_THROWS_AS(
        SymbolConfig::make(constant(Cx(1.0)), constant(Cx(0.0)), poly({Cx(0.0), Cx(1.2)})),
        std::domain_error);
    CHECK_NOTHROW(
        SymbolConfig::make(constant(Cx(1.0)), constant(Cx(0.0)), identity_map()));
}

TEST_CASE("E coefficients per operator kind") {
    // Tn, n = 0, psi1 = z, psi2 = z^2, phi = z/2 at z = 0.5.
    auto tn = OperatorSpec::tn(
        SymbolConfig::make(poly({Cx(0.0), Cx(1.0)}), poly({Cx(0.0), Cx(0.0), Cx(1.0)}),
                           half_map()),
        0);
    auto e = e_coefficients(tn, Cx(0.5, 0.0));
    CHECK(e.size() == 3);
    CHECK(std::abs(e.at(0) - Cx(1.0)) < 1e-15);
    CHECK(std::abs(e.at(1) - Cx(1.25)) < 1e-15);  // 0.5*0.5 + 2*0.5
    CHECK(std::abs(e.at(2) - Cx(0.125)) < 1e-15); // 0.25*0.5

    // Tmn, m = 0, n = 2, psi1 = z^2, psi2 = z at z = 0.5.
    auto tmn = OperatorSpec::tmn(
        SymbolConfig::make(poly({Cx(0.0), Cx(0.0), Cx(1.0)}), poly({Cx(0.0), Cx(1.0)}),
                           half_map()),
        0, 2);
    auto e2 = e_coefficients(tmn, Cx(0.5, 0.0));
    CHECK(e2.size() == 4);
    CHECK(std::abs(e2.at(0) - Cx(1.0)) < 1e-15);   // psi1' = 2z
    CHECK(std::abs(e2.at(1) - Cx(0.125)) < 1e-15); // psi1 phi' = 0.25 * 0.5
    CHECK(std::abs(e2.at(2) - Cx(1.0)) < 1e-15);   // psi2' = 1
    CHECK(std::abs(e2.at(3) - Cx(0.25)) < 1e-15);  // psi2 phi' = 0.5 * 0.5

    // m + 1 = n merges the middle orders.
    auto merged = OperatorSpec::tmn(
        SymbolConfig::make(poly({Cx(0.0), Cx(1.0)}), poly({Cx(0.0), Cx(0.0), Cx(1.0)}),
                           half_map()),
        0, 1);
    auto e3 = e_coefficients(merged, Cx(0.5, 0.0));
    CHECK(e3.size() == 3);
    CHECK(e3.count(0) == 1);
    CHECK(e3.count(1) == 1);
    CHECK(e3.count(2) == 1);

    // psi2 = 0 kills the orders sourced from psi2.
    auto no2 = OperatorSpec::tn(
        SymbolConfig::make(poly({Cx(0.0), Cx(1.0)}), constant(Cx(0.0)), half_map()), 1);
    auto e4 = e_coefficients(no2, Cx(0.3, 0.2));
    CHECK(std::abs(e4.at(3)) == 0.0);

    // constant symbols and constant phi: every coefficient vanishes.
    auto all_const = OperatorSpec::tn(
        SymbolConfig::make(constant(Cx(2.0)), constant(Cx(-1.0)), constant(Cx(0.25))), 0);
    for (const auto& [o, v] : e_coefficients(all_const, Cx(0.1, 0.4)))
        CHECK(std::abs(v) == 0.0);
}

TEST_CASE("decomposed derivative agrees with the stencil oracle") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::uniform_real_distribution<double> rad(0.0, 0.9);
    std::uniform_real_distribution<double> ang(0.0, 6.283185307179586);

    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Cx> c1(1 + rng() % 4), c2(1 + rng() % 4);
        for (auto& c : c1) c = Cx(coef(rng), coef(rng));
        for (auto& c : c2) c = Cx(coef(rng), coef(rng));
        const double s = 0.3 + 0.6 * std::abs(coef(rng));
        auto sc = SymbolConfig::make(poly(c1), poly(c2), poly({Cx(0.0), Cx(s, 0.0)}));
        OperatorSpec spec = trial % 2 == 0 ? OperatorSpec::tn(sc, int(rng() % 3))
                                           : OperatorSpec::tmn(sc, int(rng() % 2), 2 + int(rng() % 2));

        AnalyticFunction f =
            trial % 3 == 0
                ? poly({Cx(coef(rng)), Cx(coef(rng)), Cx(coef(rng)), Cx(coef(rng)), Cx(coef(rng))})
                : AnalyticFunction(MobiusPowerTerm{Cx(coef(rng), coef(rng)),
                                                   std::polar(0.8 * rad(rng), ang(rng)),
                                                   0.5 + std::abs(coef(rng))});
        const Cx z = std::polar(rad(rng), ang(rng));
        const Cx via_e = derivative_decomposed(spec, f, z);
        auto ev = apply(spec, f);
        const Cx fd = stencil_derivative([&](Cx zz) { return ev(zz); }, z, 0.04);
        CHECK(std::abs(via_e - fd) <= 1e-6 * std::max({std::abs(via_e), std::abs(fd), 1.0}));
    }
}

TEST_CASE("operator linearity") {
    auto sc = SymbolConfig::make(poly({Cx(0.5), Cx(1.0)}), poly({Cx(0.0), Cx(0.0), Cx(0.7)}),
                                 half_map());
    auto spec = OperatorSpec::tn(sc, 1);
    AnalyticFunction f = poly({Cx(1.0), Cx(0.0), Cx(2.0), Cx(0.5)});
    AnalyticFunction g = poly({Cx(0.0), Cx(-1.0), Cx(0.0), Cx(0.0), Cx(1.0)});
    const Cx a(1.5, -0.5), b(0.25, 2.0);
    auto comb = linear_combine({a, b}, {f, g});
    for (Cx z : {Cx(0.2, 0.3), Cx(-0.6, 0.1), Cx(0.0, -0.8)}) {
        const Cx lhs = apply(spec, comb)(z);
        const Cx rhs = a * apply(spec, f)(z) + b * apply(spec, g)(z);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
    }
}

TEST_CASE("Tmn with orders (n, n+1) coincides with Tn") {
    auto sc = SymbolConfig::make(poly({Cx(0.2), Cx(1.0)}), poly({Cx(0.1), Cx(0.0), Cx(0.5)}),
                                 half_map());
    auto tn = OperatorSpec::tn(sc, 1);
    auto tmn = OperatorSpec::tmn(sc, 1, 2);
    AnalyticFunction f = poly({Cx(1.0), Cx(2.0), Cx(0.0), Cx(-1.0), Cx(0.5)});
    for (Cx z : {Cx(0.5, 0.0), Cx(-0.2, 0.6), Cx(0.1, -0.1)}) {
        CHECK(std::abs(apply(tn, f)(z) - apply(tmn, f)(z)) < 1e-15);
        CHECK(std::abs(derivative_decomposed(tn, f, z) - derivative_decomposed(tmn, f, z)) <
              1e-15);
    }
}

TEST_CASE("dilation continuity") {
    auto sc = SymbolConfig::make(constant(Cx(1.0)), constant(Cx(0.0)), half_map());
    auto spec = OperatorSpec::tn(sc, 0);
    AnalyticFunction f = poly({Cx(0.0), Cx(0.0), Cx(1.0)}); // z^2

    auto spec_r = spec;
    spec_r.dilation_r = 0.999;
    double worst = 0.0;
    for (int t = 0; t < 64; ++t) {
        const Cx z = std::polar(0.9, 2.0 * std::numbers::pi * t / 64);
        worst = std::max(worst, std::abs(apply(spec, f)(z) - apply(spec_r, f)(z)));
    }
    CHECK(worst < 1e-3);

    // Richer symbols: the difference still decays like 1 - r.
    auto rich = OperatorSpec::tn(
        SymbolConfig::make(poly({Cx(0.3), Cx(1.0)}), poly({Cx(0.0), Cx(0.5)}), half_map()), 0);
    double prev = 1e300;
    for (double r : {0.9, 0.99, 0.999}) {
        auto rich_r = rich;
        rich_r.dilation_r = r;
        double w = 0.0;
        for (int t = 0; t < 64; ++t) {
            const Cx z = std::polar(0.9, 2.0 * std::numbers::pi * t / 64);
            w = std::max(w, std::abs(apply(rich, f)(z) - apply(rich_r, f)(z)));
        }
        CHECK(w < prev);
        prev = w;
    }
    CHECK(prev < 1e-2);

    auto spec_1 = spec;
    spec_1.dilation_r = 1.0;
    CHECK(std::abs(apply(spec, f)(Cx(0.5, 0.2)) - apply(spec_1, f)(Cx(0.5, 0.2))) == 0.0);
}

TEST_CASE("boundedness suprema") {
    Weight w = Weight::alpha(1.0);
    auto sc = SymbolConfig::make(poly({Cx(0.0), Cx(1.0)}), poly({Cx(1.0), Cx(0.5)}), half_map());
    auto spec = OperatorSpec::tn(sc, 0);
    auto rep = boundedness_suprema(spec, w, {}, 1.0);
    CHECK(rep.orders.size() == 3);
    for (const auto& o : rep.orders) {
        CHECK(std::isfinite(o.sup_plain));
        CHECK(std::isfinite(o.sup_weighted));
    }

    // Constant psi1 makes sup mu |psi1'| vanish.
    auto spec2 = OperatorSpec::tn(
        SymbolConfig::make(constant(Cx(3.0)), poly({Cx(1.0), Cx(0.5)}), half_map()), 0);
    CHECK(boundedness_suprema(spec2, w, {}, 1.0).orders[0].sup_plain == doctest::Approx(0.0));

    // Larger alpha shrinks every supremum pointwise.
    auto r1 = boundedness_suprema(spec, Weight::alpha(1.0), {}, 1.0);
    auto r2 = boundedness_suprema(spec, Weight::alpha(2.0), {}, 1.0);
    for (size_t i = 0; i < r1.orders.size(); ++i)
        CHECK(r2.orders[i].sup_plain <= r1.orders[i].sup_plain + 1e-15);

    CHECK_THROWS_AS(boundedness_suprema(spec, w, {}, std::nullopt), std::invalid_argument);
}

TEST_CASE("rho of the symbol map") {
    auto mk = [](AnalyticFunction phi) {
        return OperatorSpec::tn(
            SymbolConfig::make(constant(Cx(1.0)), constant(Cx(0.0)), std::move(phi)), 0);
    };
    CHECK(rho(mk(half_map())).value == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(rho(mk(constant(Cx(0.0)))).value == doctest::Approx(0.0));
    auto idr = rho(mk(identity_map()));
    CHECK(idr.value > 0.999);
    CHECK(idr.boundary_trend);
}
