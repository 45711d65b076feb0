#include "blochop/weights.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "blochop/quadrature.hpp"

namespace blochop {

const std::vector<std::pair<double, double>>& gauss_legendre_01(int order) {
    static std::mutex mu;
    static std::map<int, std::vector<std::pair<double, double>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;

    // Newton iteration on P_n over [-1, 1], then map to [0, 1].
    std::vector<std::pair<double, double>> nw;
    const int n = order;
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double wgt = 2.0 / ((1.0 - x * x) * dp * dp);
        nw.emplace_back(0.5 * (x + 1.0), 0.5 * wgt);
    }
    std::sort(nw.begin(), nw.end());
    return cache.emplace(order, std::move(nw)).first->second;
}

Weight Weight::alpha(double alpha) {
    if (!(alpha > 0.0)) throw std::domain_error("Weight::alpha: alpha must be > 0");
    Weight w;
    w.kind_ = Kind::Alpha;
    w.alpha_ = alpha;
    return w;
}

Weight Weight::tabulated(std::vector<double> radii, std::vector<double> values) {
    if (radii.size() != values.size() || radii.size() < 2)
        throw std::invalid_argument("Weight::tabulated: need >= 2 matching samples");
    for (size_t i = 0; i < radii.size(); ++i) {
        if (radii[i] < 0.0 || radii[i] >= 1.0)
            throw std::domain_error("Weight::tabulated: radii must lie in [0, 1)");
        if (i > 0 && radii[i] <= radii[i - 1])
            throw std::invalid_argument("Weight::tabulated: radii must be strictly increasing");
        if (!(values[i] > 0.0))
            throw std::domain_error("Weight::tabulated: non-positive weight sample");
    }
    Weight w;
    w.kind_ = Kind::Tabulated;
    w.radii_ = std::move(radii);
    w.values_ = std::move(values);
    return w;
}

double Weight::at_radius(double r) const {
    if (r < 0.0 || r >= 1.0) throw std::domain_error("Weight: radius must lie in [0, 1)");
    if (kind_ == Kind::Alpha) return std::pow(1.0 - r * r, alpha_);
    if (r <= radii_.front()) return values_.front();
    if (r >= radii_.back()) return values_.back(); // constant extension past samples
    const auto it = std::upper_bound(radii_.begin(), radii_.end(), r);
    const size_t hi = size_t(it - radii_.begin());
    const size_t lo = hi - 1;
    const double t = (r - radii_[lo]) / (radii_[hi] - radii_[lo]);
    return values_[lo] + t * (values_[hi] - values_[lo]);
}

double weight_at(const Weight& w, Cx z) {
    const double r = std::abs(z);
    if (r >= 1.0) throw std::domain_error("weight_at: |z| must be < 1");
    return w.at_radius(r);
}

Kernel Kernel::power(double s) {
    if (!(s > 0.0)) throw std::domain_error("Kernel::power: exponent must be > 0");
    Kernel k;
    k.kind_ = Kind::Power;
    k.s_ = s;
    return k;
}

Kernel Kernel::sampled(std::vector<double> ts, std::vector<double> values) {
    if (ts.size() != values.size() || ts.size() < 2)
        throw std::invalid_argument("Kernel::sampled: need >= 2 matching samples");
    for (size_t i = 0; i < ts.size(); ++i) {
        if (ts[i] < 0.0) throw std::domain_error("Kernel::sampled: t must be >= 0");
        if (values[i] < 0.0) throw std::domain_error("Kernel::sampled: K must be >= 0");
        if (i > 0 && ts[i] <= ts[i - 1])
            throw std::invalid_argument("Kernel::sampled: t samples must be strictly increasing");
        if (i > 0 && values[i] < values[i - 1])
            throw std::domain_error("Kernel::sampled: kernel samples must be nondecreasing");
    }
    Kernel k;
    k.kind_ = Kind::Sampled;
    k.ts_ = std::move(ts);
    k.values_ = std::move(values);
    return k;
}

double Kernel::operator()(double t) const {
    if (t < 0.0) throw std::domain_error("Kernel: argument must be >= 0");
    if (kind_ == Kind::Power) return std::pow(t, s_);
    if (t <= ts_.front()) return values_.front();
    if (t >= ts_.back()) return values_.back();
    const auto it = std::upper_bound(ts_.begin(), ts_.end(), t);
    const size_t hi = size_t(it - ts_.begin());
    const size_t lo = hi - 1;
    const double u = (t - ts_[lo]) / (ts_[hi] - ts_[lo]);
    return values_[lo] + u * (values_[hi] - values_[lo]);
}

SpaceParams SpaceParams::make(double p, double q, Kernel kernel) {
    if (!(p > 0.0)) throw std::domain_error("SpaceParams: p must be > 0");
    if (!(q > -2.0)) throw std::domain_error("SpaceParams: q must be > -2");
    SpaceParams sp;
    sp.p = p;
    sp.q = q;
    sp.kernel = std::move(kernel);
    sp.gamma = (q + 2.0) / p;
    return sp;
}

NormalityReport check_normal(const Weight& w, double a, double b, double delta, int levels) {
    if (!(b > a) || !(a > 0.0)) throw std::invalid_argument("check_normal: need b > a > 0");
    if (delta < 0.0 || delta >= 1.0) throw std::invalid_argument("check_normal: delta in [0,1)");
    if (levels < 12) levels = 12;

    std::vector<double> rs(levels + 1), us(levels + 1), vs(levels + 1);
    for (int j = 0; j <= levels; ++j) {
        const double r = 1.0 - (1.0 - delta) * std::pow(2.0, -0.5 * j);
        const double mu = w.at_radius(r);
        if (!(mu > 0.0)) throw std::domain_error("check_normal: non-positive weight sample");
        rs[j] = r;
        us[j] = mu / std::pow(1.0 - r, a);
        vs[j] = mu / std::pow(1.0 - r, b);
    }

    // Last adjacent violation of either pinch; both must hold from there on.
    constexpr double slack = 1.0 + 1e-12;
    int last_bad = -1;
    std::pair<double, double> bad_r{0.0, 0.0}, bad_v{0.0, 0.0};
    for (int j = 0; j < levels; ++j) {
        const bool u_ok = us[j + 1] <= us[j] * slack;
        const bool v_ok = vs[j + 1] * slack >= vs[j];
        if (!u_ok || !v_ok) {
            last_bad = j;
            bad_r = {rs[j], rs[j + 1]};
            bad_v = u_ok ? std::pair{vs[j], vs[j + 1]} : std::pair{us[j], us[j + 1]};
        }
    }

    NormalityReport rep;
    const int start = last_bad + 1;
    if (start > levels - 8) {
        rep.ok = false;
        rep.witness = bad_r;
        rep.witness_values = bad_v;
        rep.detail = "monotonicity never establishes on the grid tail";
        return rep;
    }
    // Trend checks for the limits 0 and infinity; finite-grid surrogates.
    if (!(us[levels] <= 0.98 * us[start])) {
        rep.ok = false;
        rep.witness = {rs[start], rs[levels]};
        rep.witness_values = {us[start], us[levels]};
        rep.detail = "mu(r)/(1-r)^a does not decay toward 0";
        return rep;
    }
    if (!(vs[levels] >= 1.02 * vs[start])) {
        rep.ok = false;
        rep.witness = {rs[start], rs[levels]};
        rep.witness_values = {vs[start], vs[levels]};
        rep.detail = "mu(r)/(1-r)^b does not grow toward infinity";
        return rep;
    }
    rep.ok = true;
    rep.established_from = rs[start];
    rep.detail = "pinch conditions hold from r = " + std::to_string(rs[start]);
    return rep;
}

NormalityReport check_normal(const Weight& w, int levels) {
    if (w.normality_params)
        return check_normal(w, w.normality_params->a, w.normality_params->b,
                            w.normality_params->delta, levels);
    if (w.is_alpha())
        return check_normal(w, 0.5 * w.alpha_exponent(), 2.0 * w.alpha_exponent(), 0.0, levels);
    NormalityReport rep;
    rep.ok = false;
    rep.detail = "tabulated weight without normality parameters";
    return rep;
}

namespace {

struct DyadicSideState {
    std::vector<double> increments;
    bool converged = false;
    bool diverged = false;
};

// Accumulate one side of the dyadic split of [0,1). next_panel(j) must return
// {lo, hi} for level j; levels run until convergence/divergence or cap.
template <typename PanelFn, typename F>
double integrate_side(PanelFn&& next_panel, F&& f, DyadicSideState& st, int cap, double tol) {
    const auto& nodes = gauss_legendre_01(16);
    double total = 0.0;
    int small_count = 0;
    for (int j = 0; j < cap; ++j) {
        const auto [lo, hi] = next_panel(j);
        double inc = 0.0;
        for (const auto& [x, wgt] : nodes) inc += wgt * f(lo + (hi - lo) * x);
        inc *= hi - lo;
        total += inc;
        st.increments.push_back(std::abs(inc));
        const size_t n = st.increments.size();
        if (n >= 4) {
            bool growing = true;
            for (size_t t = n - 3; t < n; ++t)
                growing = growing && st.increments[t] > 1.5 * st.increments[t - 1];
            if (growing) {
                st.diverged = true;
                return total;
            }
        }
        if (std::abs(inc) <= tol * std::max(std::abs(total), 1e-300)) {
            if (++small_count >= 2) {
                st.converged = true;
                return total;
            }
        } else {
            small_count = 0;
        }
    }
    // Cap reached: non-decaying increments mean the refinement is not
    // converging (log-type divergence shows constant increments).
    const size_t n = st.increments.size();
    if (n >= 3 && st.increments[n - 1] >= 0.999 * st.increments[n - 2] &&
        st.increments[n - 2] >= 0.999 * st.increments[n - 3] && st.increments[n - 1] > 0.0)
        st.diverged = true;
    return total;
}

template <typename F>
DyadicQuadReport dyadic_integrate_01(F&& f) {
    constexpr int cap = 48;
    constexpr double tol = 1e-9;
    DyadicSideState left, right;
    // left: [2^-(j+2), 2^-(j+1)] descending toward 0; first panel [1/4, 1/2]
    const double total_left = integrate_side(
        [](int j) { return std::pair{std::pow(2.0, -(j + 2)), std::pow(2.0, -(j + 1))}; }, f,
        left, cap, tol);
    // right: [1 - 2^-(j+1), 1 - 2^-(j+2)] ascending toward 1; first [1/2, 3/4]
    const double total_right = integrate_side(
        [](int j) { return std::pair{1.0 - std::pow(2.0, -(j + 1)), 1.0 - std::pow(2.0, -(j + 2))}; },
        f, right, cap, tol);

    DyadicQuadReport rep;
    rep.value = total_left + total_right;
    rep.levels_used = int(std::max(left.increments.size(), right.increments.size()));
    rep.converged = left.converged && right.converged;
    if (left.diverged || right.diverged) {
        rep.finite = false;
        rep.detail = left.diverged ? "divergent refinement toward r = 0"
                                   : "divergent refinement toward r = 1";
    } else {
        rep.finite = true;
        if (!rep.converged) rep.detail = "refinement cap reached before full convergence";
    }
    return rep;
}

} // namespace

DyadicQuadReport check_kernel_integrability(const SpaceParams& params) {
    const auto& K = params.kernel;
    const double q = params.q;
    return dyadic_integrate_01([&](double r) {
        if (r <= 0.0 || r >= 1.0) return 0.0;
        return std::pow(1.0 - r * r, q) * K(-std::log(r)) * r;
    });
}

DyadicQuadReport check_condition_8(const SpaceParams& params) {
    const auto& K = params.kernel;
    const double expo = std::min(-1.0, params.q);
    const bool log_factor = params.q == -1.0; // exact parameter comparison
    return dyadic_integrate_01([&](double r) {
        if (r <= 0.0 || r >= 1.0) return 0.0;
        double v = K(-std::log(r)) * std::pow(1.0 - r, expo) * r;
        if (log_factor) v *= std::log(1.0 / (1.0 - r));
        return v;
    });
}

} // namespace blochop
