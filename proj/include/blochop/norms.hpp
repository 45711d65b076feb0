#pragma once

#include <optional>
#include <vector>

#include "blochop/funcalg.hpp"
#include "blochop/grid.hpp"
#include "blochop/weights.hpp"

// Numerical norms: weighted Bloch, alpha-Bloch (higher-derivative form),
// H-infinity, and Q_K(p,q).

namespace blochop {

struct NormReport {
    double value = 0.0;
    Cx argmax{0.0, 0.0};
    int grid_level = 0;
    bool converged = false;
    std::vector<std::string> flags;
};

/// |f(0)| + sup mu(z) |f'(z)| over the refining grid.
NormReport bloch_mu_norm(const AnalyticFunction& f, const Weight& w,
                         const DiskGridSpec& grid = {}, const EvalOptions& eval_opts = {});

/// |f'(0)| + ... + |f^(n)(0)| + sup (1-|z|^2)^(alpha+n) |f^(n+1)(z)|.
/// With n = 0 this is the derivative seminorm of the alpha-Bloch norm.
NormReport bloch_alpha_equiv_norm(const AnalyticFunction& f, double alpha, int n,
                                  const DiskGridSpec& grid = {},
                                  const EvalOptions& eval_opts = {});

/// sup |f(z)| over the refining grid; flags boundary-attained suprema.
NormReport hinf_norm(const AnalyticFunction& f, const DiskGridSpec& grid = {},
                     const EvalOptions& eval_opts = {});

struct QkQuadOptions {
    int gl_order = 8;
    int base_angle_panels = 32;  // uniform angular panels before peak grading
    int peak_layers = 36;        // geometric layers per peak side
    int panels_to_zero = 13;     // dyadic radial panels toward rho = 0
    int min_panels_to_one = 14;  // dyadic radial panels toward rho = 1
    int max_panels_to_one = 44;
    double radial_tail_rel = 1e-7;
};

struct QkIntegralReport {
    double value = 0.0;
    bool converged = false;
    bool diverged = false;
    std::string detail;
};

/// Area integral |f'(z)|^p (1-|z|^2)^q K(g(z, xi)) dA(z) with dA normalized,
/// computed after the self-inverse substitution w = phi_xi(z), which makes
/// the kernel singularity radial at w = 0. Radial panels refine dyadically
/// toward 0 and 1; the angular rule grades panels geometrically around the
/// images of Mobius base points and around arg(xi).
QkIntegralReport qk_inner_integral(const AnalyticFunction& f, const SpaceParams& params,
                                   Cx xi, const QkQuadOptions& opts = {},
                                   const EvalOptions& eval_opts = {});

struct QkNormOptions {
    int xi_level = 4;            // DiskGrid level for the xi sweep
    int xi_check_level = 2;      // earlier checkpoint for the convergence flag
    double xi_refine_rel = 1e-2;
    QkQuadOptions quad;
    std::vector<Cx> extra_xi;    // additional sweep points (e.g. toward a peak)
    int threads = 0;             // 0 = hardware choice
};

/// |f(0)| + (sup over the xi grid of qk_inner_integral)^(1/p).
NormReport qk_norm(const AnalyticFunction& f, const SpaceParams& params,
                   const QkNormOptions& opts = {}, const EvalOptions& eval_opts = {});

} // namespace blochop
