#pragma once

#include <array>
#include <string>
#include <vector>

#include "blochop/funcalg.hpp"
#include "blochop/grid.hpp"

// Test-function families used by the essential-norm lower bounds: the
// l_i-combinations for the Q_K source space and the unit-norm / derivative-
// delta families for the H-infinity source space.

namespace blochop {

/// Base points approaching the boundary: |z_k| from `moduli` along each ray.
std::vector<Cx> boundary_sequence(const std::vector<double>& moduli = {0.9, 0.99, 0.999, 0.9999},
                                  const std::vector<double>& rays = {0.0, 2.0943951023931953,
                                                                     4.1887902047863905});

/// l_i(z) = (1-|z_k|^2)^i / (1 - conj(z_k) z)^(gamma+i-1), i in {1,2,3}.
AnalyticFunction build_l(int i, Cx z_k, double gamma);

enum class QkKind { F, G, H };

struct QkTestFamily {
    QkKind kind = QkKind::F;
    double gamma = 1.0;
    int n = 0;
    Cx base{0.0, 0.0};
    AnalyticFunction fn;
    std::array<Cx, 3> coefficients{}; // on l_1, l_2, l_3
    std::array<int, 2> vanishing_orders{};
    int payload_order = 0; // the one nonvanishing derivative order at base
};

/// The combination of l_1, l_2, l_3 whose derivatives of two prescribed
/// orders vanish at the base point (kind F: n+1 and n+2 vanish; G: n and n+2;
/// H: n and n+1).
QkTestFamily build_qk_test(QkKind kind, Cx z_k, double gamma, int n);

struct VanishCertificate {
    bool ok = false;
    std::array<int, 2> orders{};
    std::array<double, 2> rel_residual{}; // |value| / largest single term
    std::array<double, 2> scale{};
};

/// Certifies the two vanishing derivative orders at the base point by exact
/// Mobius-power differentiation; relative to the largest single term since
/// the combination cancels catastrophically near the boundary.
VanishCertificate verify_vanishing(const QkTestFamily& family, double tol = 1e-9);

struct ClosedFormCheck {
    bool ok = false;
    Cx closed_form;   // the displayed closed-form value at the base point
    Cx recomputed;    // exact differentiation of the built combination
    double rel_err = 0.0;
};

/// Closed-form value of the nonvanishing derivative at the base point,
/// cross-checked against exact differentiation (tolerance 1e-9 relative).
ClosedFormCheck closed_form_value(const QkTestFamily& family, double tol = 1e-9);

struct HinfTestFamily {
    int i = 1;
    Cx base{0.0, 0.0};
    AnalyticFunction fn; // ((1-|a|) / (1 - conj(a) z))^i, sup norm <= 1
};

HinfTestFamily build_hinf_test(int i, Cx a);

struct DeltaFamily {
    std::vector<int> orders;
    Cx base{0.0, 0.0};
    std::vector<AnalyticFunction> fns; // fns[t]^(j)(a) = delta * conj(a)^j/(1-|a|^2)^j
    double condition = 0.0;
    double max_rel_residual = 0.0;
    std::vector<double> basis_exponents;
};

/// Explicit realization of the H-infinity derivative-delta family at `a`,
/// built by solving a k x k rising-factorial system over the basis
/// ((1-|a|^2)/(1 - conj(a) z))^beta_s. The delta pattern is certified to
/// 1e-8 relative; an ill-conditioned system retries with shifted exponents.
DeltaFamily build_hinf_delta_family(const std::vector<int>& orders, Cx a);

} // namespace blochop
