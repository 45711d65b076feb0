#include <doctest.h>

#include <cmath>
#include <random>

#include "blochop/weights.hpp"

using namespace blochop;

TEST_CASE("weight evaluation") {
    Weight w = Weight::alpha(1.0);
    CHECK(weight_at(w, Cx(0.0, 0.0)) == doctest::Approx(1.0));
    CHECK(weight_at(w, Cx(0.6, 0.0)) == doctest::Approx(0.64));
    CHECK(weight_at(w, Cx(0.0, 0.6)) == doctest::Approx(0.64));

    Weight tab = Weight::tabulated({0.0, 0.5, 0.9}, {1.0, 0.5, 0.2});
    CHECK(tab.at_radius(0.5) == doctest::Approx(0.5)); // interpolation anchor
    CHECK(tab.at_radius(0.25) == doctest::Approx(0.75));
    CHECK(tab.at_radius(0.95) == doctest::Approx(0.2)); // constant extension

    CHECK_THROWS_AS(weight_at(w, Cx(1.0, 0.0)), std::domain_error);
    CHECK_THROWS_AS(Weight::tabulated({0.0, 0.5}, {1.0, -0.1}), std::domain_error);
}

TEST_CASE("radial symmetry") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> rad(0.0, 0.99);
    std::uniform_real_distribution<double> ang(0.0, 6.283185307179586);
    Weight w = Weight::alpha(1.7);
    for (int t = 0; t < 30; ++t) {
        const double r = rad(rng);
        const Cx z = std::polar(r, ang(rng));
        CHECK(weight_at(w, z) == weight_at(w, Cx(std::abs(z), 0.0)));
    }
}

TEST_CASE("normality check on the standard weight") {
    Weight w = Weight::alpha(1.0);
    CHECK(check_normal(w, 0.5, 2.0, 0.0).ok);

    // (1-r^2)/(1-r)^2 = (1+r)/(1-r) increases, so a = 2 must fail.
    auto bad = check_normal(w, 2.0, 3.0, 0.0);
    CHECK_FALSE(bad.ok);
    CHECK(bad.witness.has_value());

    Weight flat = Weight::tabulated({0.0, 0.5, 0.99}, {1.0, 1.0, 1.0});
    CHECK_FALSE(check_normal(flat, 0.5, 1.0, 0.0).ok);
}

TEST_CASE("alpha weights pass for sampled exponent pairs") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> alpha_d(0.3, 3.0);
    for (int t = 0; t < 10; ++t) {
        const double alpha = alpha_d(rng);
        std::uniform_real_distribution<double> a_d(0.05 * alpha, 0.95 * alpha);
        std::uniform_real_distribution<double> b_d(1.05 * alpha, 4.0 * alpha);
        const double a = a_d(rng), b = b_d(rng);
        CAPTURE(alpha);
        CAPTURE(a);
        CAPTURE(b);
        CHECK(check_normal(Weight::alpha(alpha), a, b, 0.0).ok);
    }
}

TEST_CASE("kernel admissibility quadrature") {
    // K(t) = t, q = 0: integral of r (-log r) dr = 1/4.
    auto sp = SpaceParams::make(2.0, 0.0, Kernel::power(1.0));
    auto rep = check_kernel_integrability(sp);
    CHECK(rep.finite);
    CHECK(rep.value == doctest::Approx(0.25).epsilon(1e-6));

    // K(t) = sqrt(t), q = 0: closed form Gamma(3/2) / 2^(3/2).
    auto sp2 = SpaceParams::make(2.0, 0.0, Kernel::power(0.5));
    auto rep2 = check_kernel_integrability(sp2);
    CHECK(rep2.finite);
    CHECK(rep2.value == doctest::Approx(std::sqrt(std::numbers::pi) / 2.0 / std::pow(2.0, 1.5))
                            .epsilon(1e-6));

    // q <= -2 is gated at construction.
    CHECK_THROWS_AS(SpaceParams::make(2.0, -2.0, Kernel::power(1.0)), std::domain_error);

    // K constant and q < -1 diverges at the rim.
    auto sp3 = SpaceParams::make(2.0, -1.5, Kernel::sampled({0.0, 1.0}, {1.0, 1.0}));
    CHECK_FALSE(check_kernel_integrability(sp3).finite);

    // K identically zero integrates to zero.
    auto sp4 = SpaceParams::make(2.0, 0.0, Kernel::sampled({0.0, 1.0}, {0.0, 0.0}));
    auto rep4 = check_kernel_integrability(sp4);
    CHECK(rep4.finite);
    CHECK(rep4.value == doctest::Approx(0.0));
}

TEST_CASE("condition (8) quadrature") {
    // K = sqrt(t), q = 0: integrand ~ (1-r)^(-1/2) near the rim, finite.
    auto sp = SpaceParams::make(2.0, 0.0, Kernel::power(0.5));
    auto rep = check_condition_8(sp);
    CHECK(rep.finite);
    CHECK(rep.value > 0.0);

    // K constant: the (1-r)^(-1) * log-factor tail diverges for q = -1.
    auto sp2 = SpaceParams::make(2.0, -1.0, Kernel::sampled({0.0, 1.0}, {1.0, 1.0}));
    CHECK_FALSE(check_condition_8(sp2).finite);

    auto sp3 = SpaceParams::make(2.0, 0.0, Kernel::sampled({0.0, 1.0}, {0.0, 0.0}));
    auto rep3 = check_condition_8(sp3);
    CHECK(rep3.finite);
    CHECK(rep3.value == doctest::Approx(0.0));
}

TEST_CASE("kernel monotonicity is enforced for sampled kernels") {
    CHECK_THROWS_AS(Kernel::sampled({0.0, 1.0, 2.0}, {0.0, 0.5, 0.4}), std::domain_error);
    auto k = Kernel::sampled({0.0, 1.0, 2.0}, {0.0, 0.5, 1.5});
    CHECK(k(0.5) == doctest::Approx(0.25));
    CHECK(k(3.0) == doctest::Approx(1.5));
    CHECK_THROWS_AS(Kernel::power(0.0), std::domain_error);
}

TEST_CASE("space params derive gamma") {
    auto sp = SpaceParams::make(2.0, 0.0, Kernel::power(0.5));
    CHECK(sp.gamma == doctest::Approx(1.0));
    CHECK(std::abs(sp.gamma * sp.p - (sp.q + 2.0)) < 1e-12);
}
