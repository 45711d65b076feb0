#include <doctest.h>

#include <cmath>
#include <random>

#include "blochop/norms.hpp"
#include "blochop/testfn.hpp"

using namespace blochop;

TEST_CASE("boundary sequence layout") {
    auto pts = boundary_sequence();
    CHECK(pts.size() == 12);
    for (size_t i = 0; i < pts.size(); ++i) CHECK(std::abs(pts[i]) < 1.0);
    // strictly increasing moduli along each ray
    for (int ray = 0; ray < 3; ++ray)
        for (int k = 1; k < 4; ++k)
            CHECK(std::abs(pts[ray * 4 + k]) > std::abs(pts[ray * 4 + k - 1]));
    CHECK_THROWS_AS(boundary_sequence({0.9, 0.5}), std::invalid_argument);
}

TEST_CASE("l_i building blocks") {
    auto l1 = build_l(1, Cx(0.5, 0.0), 1.0);
    CHECK(std::abs(eval(l1, Cx(0.0, 0.0)) - Cx(0.75)) < 1e-15);
    CHECK(std::abs(eval(l1, Cx(0.5, 0.0)) - Cx(1.0)) < 1e-15);

    auto l2 = build_l(2, Cx(0.0, 0.0), 1.5);
    for (Cx z : {Cx(0.0, 0.0), Cx(0.3, -0.6), Cx(-0.9, 0.0)})
        CHECK(std::abs(eval(l2, z) - Cx(1.0)) < 1e-15); // base at the center

    CHECK_THROWS_AS(build_l(1, Cx(0.5, 0.0), 0.0), std::domain_error);
    CHECK_THROWS_AS(build_l(4, Cx(0.5, 0.0), 1.0), std::invalid_argument);
}

TEST_CASE("qk family coefficients and point values") {
    auto fam = build_qk_test(QkKind::F, Cx(0.5, 0.0), 1.0, 0);
    CHECK(std::abs(fam.coefficients[0] - Cx(3.0)) < 1e-14);
    CHECK(std::abs(fam.coefficients[1] - Cx(-3.0)) < 1e-14);
    CHECK(std::abs(fam.coefficients[2] - Cx(1.0)) < 1e-14);
    CHECK(std::abs(eval(fam.fn, Cx(0.5, 0.0)) - Cx(1.0)) < 1e-12);
    CHECK(fam.payload_order == 0);
    CHECK(fam.vanishing_orders[0] == 1);
    CHECK(fam.vanishing_orders[1] == 2);

    // g at base 0 is the zero function: 3/2 - 5/2 + 1 = 0.
    auto g0 = build_qk_test(QkKind::G, Cx(0.0, 0.0), 1.0, 0);
    for (Cx z : {Cx(0.0, 0.0), Cx(0.4, 0.4), Cx(-0.2, 0.1)})
        CHECK(std::abs(eval(g0.fn, z)) < 1e-15);
}

TEST_CASE("vanishing certificates and closed forms, sampled sweep") {
    const std::vector<Cx> bases{Cx(0.9, 0.0), std::polar(0.99, 2.0), std::polar(0.999, 4.0)};
    for (QkKind kind : {QkKind::F, QkKind::G, QkKind::H})
        for (double gamma : {0.5, 1.0, 2.0})
            for (int n : {0, 1, 2})
                for (Cx zk : bases) {
                    auto fam = build_qk_test(kind, zk, gamma, n);
                    auto cert = verify_vanishing(fam);
                    CAPTURE(int(kind));
                    CAPTURE(gamma);
                    CAPTURE(n);
                    CHECK(cert.ok);
                    auto cf = closed_form_value(fam);
                    CHECK(cf.ok);
                }
}

TEST_CASE("closed-form values match the displayed formulas") {
    auto f = build_qk_test(QkKind::F, Cx(0.5, 0.0), 1.0, 0);
    auto cf = closed_form_value(f);
    CHECK(std::abs(cf.closed_form - Cx(1.0)) < 1e-12); // 2/(1*2) * (0.75)^0

    // h at base 0: payload value 0 through the conj(z_k)^(n+2) factor.
    auto h0 = build_qk_test(QkKind::H, Cx(0.0, 0.0), 1.0, 1);
    auto cfh = closed_form_value(h0);
    CHECK(std::abs(cfh.closed_form) == 0.0);
    CHECK(std::abs(cfh.recomputed) < 1e-12);

    // g carries the minus sign for a real positive base.
    auto g = build_qk_test(QkKind::G, Cx(0.7, 0.0), 1.0, 0);
    auto cfg = closed_form_value(g);
    CHECK(cfg.closed_form.real() < 0.0);
    CHECK(cfg.ok);
}

TEST_CASE("hinf unit test functions") {
    auto f10 = build_hinf_test(1, Cx(0.0, 0.0));
    for (Cx z : {Cx(0.0, 0.0), Cx(0.5, 0.4)}) CHECK(std::abs(eval(f10.fn, z) - Cx(1.0)) < 1e-15);

    auto f2 = build_hinf_test(2, Cx(0.5, 0.0));
    CHECK(std::abs(eval(f2.fn, Cx(0.5, 0.0)) - Cx(4.0 / 9.0)) < 1e-14);

    std::mt19937_64 rng(555);
    std::uniform_real_distribution<double> mod(0.0, 0.95);
    std::uniform_real_distribution<double> ang(0.0, 6.283185307179586);
    for (int t = 0; t < 8; ++t) {
        const int i = 1 + int(rng() % 4);
        auto fam = build_hinf_test(i, std::polar(mod(rng), ang(rng)));
        CHECK(hinf_norm(fam.fn, DiskGridSpec{.M = 20}).value <= 1.0 + 1e-9);
    }

    // |a| >= 0.9 cases approach sup 1 on grids that resolve the peak.
    CHECK(hinf_norm(build_hinf_test(1, Cx(0.9, 0.0)).fn, DiskGridSpec{.M = 24}).value > 0.9);
    CHECK(hinf_norm(build_hinf_test(2, Cx(0.99, 0.0)).fn, DiskGridSpec{.M = 28}).value > 0.9);
    CHECK(hinf_norm(build_hinf_test(1, Cx(0.9999, 0.0)).fn, DiskGridSpec{.M = 38}).value > 0.9);
}

TEST_CASE("hinf delta families") {
    auto fam = build_hinf_delta_family({0, 1, 2, 3}, Cx(0.5, 0.0));
    CHECK(fam.max_rel_residual <= 1e-8);
    CHECK(fam.fns.size() == 4);

    // Degenerate center: constant-like solutions, zero derivative targets.
    auto center = build_hinf_delta_family({0, 1, 2, 3}, Cx(0.0, 0.0));
    CHECK(center.max_rel_residual <= 1e-8);
    CHECK(std::abs(eval(center.fns[0], Cx(0.3, 0.1)) - Cx(1.0)) < 1e-10);

    // Order sets used by the m+1 < n estimator, across the boundary sweep.
    double worst_norm = 0.0;
    for (Cx a : boundary_sequence()) {
        auto bf = build_hinf_delta_family({0, 1, 3, 4}, a);
        CHECK(bf.max_rel_residual <= 1e-8);
        for (const auto& fn : bf.fns)
            worst_norm = std::max(worst_norm, hinf_norm(fn, DiskGridSpec{.M = 20}).value);
    }
    // uniform-boundedness proxy for the realization; C recorded loosely
    CHECK(worst_norm < 50.0);

    CHECK_THROWS_AS(build_hinf_delta_family({2, 1}, Cx(0.5, 0.0)), std::invalid_argument);
}

TEST_CASE("qk norms of the families stay in a band across the boundary sweep") {
    auto sp = SpaceParams::make(2.0, 0.0, Kernel::power(0.5));
    QkNormOptions opts;
    opts.xi_level = 2;
    opts.quad.base_angle_panels = 16;
    opts.quad.gl_order = 6;

    for (QkKind kind : {QkKind::F, QkKind::G, QkKind::H}) {
        double lo = 1e300, hi = 0.0;
        for (Cx zk : boundary_sequence()) {
            auto fam = build_qk_test(kind, zk, sp.gamma, 0);
            QkNormOptions o = opts;
            const Cx dir = zk / std::abs(zk);
            const double d = 1.0 - std::abs(zk);
            for (double f : {2.0, 1.0, 0.5})
                if (1.0 - f * d > 0) o.extra_xi.push_back(dir * (1.0 - f * d));
            const double v = qk_norm(fam.fn, sp, o).value;
            CAPTURE(int(kind));
            CAPTURE(zk.real());
            CAPTURE(zk.imag());
            CHECK(std::isfinite(v));
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CAPTURE(lo);
        CAPTURE(hi);
        CHECK(hi <= 3.0 * lo);
    }
}
