#pragma once

#include <utility>
#include <vector>

namespace blochop {

/// Gauss-Legendre nodes/weights on [0, 1], computed once per order and cached.
const std::vector<std::pair<double, double>>& gauss_legendre_01(int order);

} // namespace blochop
