#include "blochop/testfn.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace blochop {

std::vector<Cx> boundary_sequence(const std::vector<double>& moduli,
                                  const std::vector<double>& rays) {
    for (size_t i = 0; i < moduli.size(); ++i) {
        if (moduli[i] <= 0.0 || moduli[i] >= 1.0)
            throw std::invalid_argument("boundary_sequence: moduli must lie in (0, 1)");
        if (i > 0 && moduli[i] <= moduli[i - 1])
            throw std::invalid_argument("boundary_sequence: moduli must be strictly increasing");
    }
    std::vector<Cx> pts;
    for (double ray : rays)
        for (double m : moduli) pts.push_back(std::polar(m, ray));
    return pts;
}

AnalyticFunction build_l(int i, Cx z_k, double gamma) {
    if (i < 1 || i > 3) throw std::invalid_argument("build_l: i must be 1, 2, or 3");
    if (std::abs(z_k) >= 1.0) throw std::domain_error("build_l: |z_k| must be < 1");
    const double beta = gamma + i - 1.0;
    if (!(beta > 0.0)) throw std::domain_error("build_l: gamma + i - 1 must be > 0");
    const double D = 1.0 - std::norm(z_k);
    return AnalyticFunction(MobiusPowerTerm{std::pow(D, i), z_k, beta});
}

QkTestFamily build_qk_test(QkKind kind, Cx z_k, double gamma, int n) {
    if (n < 0) throw std::invalid_argument("build_qk_test: n must be >= 0");
    if (!(gamma > 0.0)) throw std::domain_error("build_qk_test: gamma must be > 0");

    // Empty products for n = 0 are 1.
    double p1 = 1.0, p2 = 1.0, p3 = 1.0;
    for (int j = 0; j < n; ++j) {
        p1 *= (gamma + j + 1.0) * (gamma + j + 2.0);
        p2 *= (gamma + j) * (gamma + j + 2.0);
        p3 *= (gamma + j) * (gamma + j + 1.0);
    }

    QkTestFamily fam;
    fam.kind = kind;
    fam.gamma = gamma;
    fam.n = n;
    fam.base = z_k;
    switch (kind) {
        case QkKind::F:
            fam.coefficients = {Cx((gamma + n + 2.0) / (gamma + n) * p1),
                                Cx(-2.0 * (gamma + n + 2.0) / (gamma + n + 1.0) * p2), Cx(p3)};
            fam.vanishing_orders = {n + 1, n + 2};
            fam.payload_order = n;
            break;
        case QkKind::G:
            fam.coefficients = {Cx((gamma + n + 2.0) / (gamma + n + 1.0) * p1),
                                Cx(-(2.0 * gamma + 2.0 * n + 3.0) / (gamma + n + 1.0) * p2),
                                Cx(p3)};
            fam.vanishing_orders = {n, n + 2};
            fam.payload_order = n + 1;
            break;
        case QkKind::H:
            fam.coefficients = {Cx(p1), Cx(-2.0 * p2), Cx(p3)};
            fam.vanishing_orders = {n, n + 1};
            fam.payload_order = n + 2;
            break;
    }
    fam.fn = linear_combine(
        {fam.coefficients[0], fam.coefficients[1], fam.coefficients[2]},
        {build_l(1, z_k, gamma), build_l(2, z_k, gamma), build_l(3, z_k, gamma)});
    return fam;
}

namespace {

// Largest single-term magnitude of the combination's d-th derivative at the
// base point; the cancellation scale for the vanishing certificates.
double combination_scale(const QkTestFamily& fam, int d) {
    double scale = 0.0;
    const auto& sum = std::get<MobiusPowerSum>(fam.fn.rep());
    for (const auto& t : sum.terms) scale = std::max(scale, std::abs(t.derivative(d, fam.base)));
    return scale;
}

Cx ipow_cx(Cx w, int k) {
    Cx p = 1.0;
    for (int t = 0; t < k; ++t) p *= w;
    return p;
}

} // namespace

VanishCertificate verify_vanishing(const QkTestFamily& family, double tol) {
    VanishCertificate cert;
    cert.orders = family.vanishing_orders;
    EvalOptions opts;
    opts.max_order = std::max(12, family.n + 3);
    bool ok = true;
    for (int idx = 0; idx < 2; ++idx) {
        const int d = family.vanishing_orders[idx];
        const Cx v = eval_derivative(family.fn, d, family.base, opts);
        const double scale = std::max(combination_scale(family, d), 1e-300);
        cert.scale[idx] = scale;
        cert.rel_residual[idx] = std::abs(v) / scale;
        ok = ok && cert.rel_residual[idx] <= tol;
    }
    cert.ok = ok;
    return cert;
}

ClosedFormCheck closed_form_value(const QkTestFamily& family, double tol) {
    const double gamma = family.gamma;
    const int n = family.n;
    double prod3 = 1.0;
    for (int j = 0; j < n; ++j) prod3 *= (gamma + j) * (gamma + j + 1.0) * (gamma + j + 2.0);

    const double D = 1.0 - std::norm(family.base);
    const Cx zbar = std::conj(family.base);
    ClosedFormCheck check;
    switch (family.kind) {
        case QkKind::F:
            check.closed_form = 2.0 * prod3 / ((gamma + n) * (gamma + n + 1.0)) * ipow_cx(zbar, n) *
                                std::pow(D, -(gamma + n - 1.0));
            break;
        case QkKind::G:
            check.closed_form = -prod3 / (gamma + n + 1.0) * ipow_cx(zbar, n + 1) *
                                std::pow(D, -(gamma + n));
            break;
        case QkKind::H:
            check.closed_form = 2.0 * prod3 * ipow_cx(zbar, n + 2) * std::pow(D, -(gamma + n + 1.0));
            break;
    }
    EvalOptions opts;
    opts.max_order = std::max(12, family.n + 3);
    check.recomputed = eval_derivative(family.fn, family.payload_order, family.base, opts);
    const double scale =
        std::max({std::abs(check.closed_form), std::abs(check.recomputed), 1e-300});
    check.rel_err = std::abs(check.closed_form - check.recomputed) / scale;
    check.ok = check.rel_err <= tol;
    return check;
}

HinfTestFamily build_hinf_test(int i, Cx a) {
    if (i < 1) throw std::invalid_argument("build_hinf_test: i must be >= 1");
    if (std::abs(a) >= 1.0) throw std::domain_error("build_hinf_test: |a| must be < 1");
    HinfTestFamily fam;
    fam.i = i;
    fam.base = a;
    fam.fn = AnalyticFunction(
        MobiusPowerTerm{std::pow(1.0 - std::abs(a), double(i)), a, double(i)});
    return fam;
}

namespace {

DeltaFamily solve_delta_family(const std::vector<int>& orders, Cx a,
                               const std::vector<double>& betas) {
    const int k = int(orders.size());
    Eigen::MatrixXd M(k, k);
    for (int row = 0; row < k; ++row)
        for (int col = 0; col < k; ++col) M(row, col) = rising_factorial(betas[col], orders[row]);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double cond = svd.singularValues()(0) / svd.singularValues()(k - 1);

    DeltaFamily fam;
    fam.orders = orders;
    fam.base = a;
    fam.condition = cond;
    fam.basis_exponents = betas;

    const double D2 = 1.0 - std::norm(a);
    std::vector<AnalyticFunction> basis;
    for (double b : betas)
        basis.push_back(AnalyticFunction(MobiusPowerTerm{std::pow(D2, b), a, b}));

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    for (int t = 0; t < k; ++t) {
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
        rhs(t) = 1.0;
        const Eigen::VectorXd x = lu.solve(rhs);
        std::vector<Cx> coeffs(k);
        for (int s = 0; s < k; ++s) coeffs[s] = x(s);
        fam.fns.push_back(linear_combine(coeffs, basis));
    }

    // Certify the delta pattern; scale is the largest single basis term.
    EvalOptions opts;
    opts.max_order = std::max(12, orders.back() + 1);
    const Cx abar = std::conj(a);
    double worst = 0.0;
    for (int t = 0; t < k; ++t) {
        for (int row = 0; row < k; ++row) {
            const int j = orders[row];
            const Cx want =
                (row == t) ? ipow_cx(abar, j) * std::pow(D2, -double(j)) : Cx(0.0);
            const Cx got = eval_derivative(fam.fns[t], j, a, opts);
            double scale = 1e-300;
            const auto& terms = std::get<MobiusPowerSum>(fam.fns[t].rep()).terms;
            for (const auto& term : terms)
                scale = std::max(scale, std::abs(term.derivative(j, a)));
            worst = std::max(worst, std::abs(got - want) / scale);
        }
    }
    fam.max_rel_residual = worst;
    return fam;
}

} // namespace

DeltaFamily build_hinf_delta_family(const std::vector<int>& orders, Cx a) {
    if (orders.empty()) throw std::invalid_argument("build_hinf_delta_family: empty order set");
    for (size_t i = 1; i < orders.size(); ++i)
        if (orders[i] <= orders[i - 1])
            throw std::invalid_argument("build_hinf_delta_family: orders must be distinct ascending");
    if (orders.front() < 0) throw std::invalid_argument("build_hinf_delta_family: negative order");
    if (std::abs(a) >= 1.0) throw std::domain_error("build_hinf_delta_family: |a| must be < 1");

    std::vector<double> betas;
    for (size_t s = 0; s < orders.size(); ++s) betas.push_back(double(s + 1));
    DeltaFamily fam = solve_delta_family(orders, a, betas);
    if (fam.condition > 1e12 || fam.max_rel_residual > 1e-8) {
        for (auto& b : betas) b += 0.5; // retry with shifted exponents
        DeltaFamily retry = solve_delta_family(orders, a, betas);
        if (retry.max_rel_residual < fam.max_rel_residual) fam = retry;
    }
    if (fam.max_rel_residual > 1e-8)
        throw std::runtime_error("build_hinf_delta_family: delta pattern certification failed, residual " +
                                 std::to_string(fam.max_rel_residual));
    return fam;
}

} // namespace blochop
