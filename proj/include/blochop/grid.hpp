#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <set>
#include <string>

#include "blochop/funcalg.hpp"

namespace blochop {

/// Disk sampling grid: rings at r_m = 1 - 2^(-m/2), m = 0..M, with
/// ceil(2 pi / (1 - r_m)) angles per ring clamped to [8, max_angles].
struct DiskGridSpec {
    int M = 24;
    int min_level = 6;            // first refinement checkpoint
    double refine_rel_tol = 1e-3; // stop when checkpoint change falls below
    int max_angles = 4096;

    double radius(int m) const { return 1.0 - std::pow(2.0, -0.5 * m); }
    int angles(int m) const {
        const double want = std::ceil(2.0 * std::numbers::pi * std::pow(2.0, 0.5 * m));
        if (want >= double(max_angles)) return max_angles;
        return std::max(8, int(want));
    }
};

struct GridSupResult {
    double value = 0.0;
    Cx argmax{0.0, 0.0};
    int grid_level = 0;
    bool converged = false;
    std::set<std::string> flags;
};

/// sup of fn over the grid with checkpoint refinement (levels double from
/// min_level up to M). Evaluation failures skip the point and flag the ring.
GridSupResult sup_over_grid(const std::function<double(Cx)>& fn, const DiskGridSpec& grid);

} // namespace blochop
