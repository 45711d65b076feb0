#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include "blochop/config.hpp"

namespace fs = std::filesystem;
using namespace blochop;

namespace {

struct VerifyFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_config_text(const std::string& path) {
    fs::path p(path);
    if (!fs::exists(p) && p.is_relative()) {
        if (const char* dir = std::getenv("BLOCHOP_CONFIG_DIR")) {
            const fs::path alt = fs::path(dir) / p;
            if (fs::exists(alt)) p = alt;
        }
    }
    std::ifstream in(p);
    if (!in) throw ConfigError("/", "cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig load_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("/", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

void write_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        out << content;
    }
    fs::rename(tmp, path);
}

void emit_report(const json& report, const std::string& out_path) {
    const std::string text = report.dump(2) + "\n";
    if (out_path.empty())
        std::cout << text;
    else
        write_atomic(out_path, text);
}

void apply_overrides(RunConfig& cfg, int grid_M, int levels_J, int xi_level, uint64_t seed) {
    if (grid_M > 0) cfg.grid_M = grid_M;
    if (levels_J > 0) cfg.levels_J = levels_J;
    if (xi_level >= 0) cfg.xi_level = xi_level;
    if (seed != 0) cfg.seed = seed;
}

json run_norm(const RunConfig& cfg, const std::string& space) {
    if (!cfg.function) throw ConfigError("/function", "norm command needs a function");
    const DiskGridSpec grid = cfg.grid_spec();
    if (space == "bloch_mu") return to_json(bloch_mu_norm(*cfg.function, cfg.weight, grid));
    if (space == "bloch_alpha") {
        if (!cfg.alpha) throw ConfigError("/alpha", "bloch_alpha norm needs alpha");
        return to_json(bloch_alpha_equiv_norm(*cfg.function, *cfg.alpha, cfg.alpha_order_n, grid));
    }
    if (space == "hinf") return to_json(hinf_norm(*cfg.function, grid));
    if (space == "qk") {
        if (!cfg.qk_params) throw ConfigError("/space", "qk norm needs the qk space parameters");
        return to_json(qk_norm(*cfg.function, *cfg.qk_params, cfg.qk_norm_options()));
    }
    throw ConfigError("/", "unknown norm space " + space);
}

json run_essnorm(const RunConfig& cfg, std::string* csv_out) {
    if (!cfg.op) throw ConfigError("/operator", "essnorm needs an operator");
    if (!cfg.qk_params && !cfg.hinf_space) throw ConfigError("/space", "essnorm needs a space");
    const auto& spec = *cfg.op;
    if (spec.kind == OperatorKind::Tn && !cfg.qk_params)
        throw PairingError("Tn pairs with the qk space only");
    if (spec.kind == OperatorKind::Tmn && !cfg.hinf_space)
        throw PairingError("Tmn pairs with the hinf space only");

    EssnormOptions opts = cfg.essnorm_options();
    EstimateReport rep;
    if (spec.kind == OperatorKind::Tn)
        rep = essnorm_qk_to_bloch(spec, *cfg.qk_params, cfg.weight, opts);
    else if (spec.m + 1 == spec.n)
        rep = essnorm_hinf_m1n(spec, cfg.weight, opts);
    else
        rep = essnorm_hinf_mn(spec, cfg.weight, opts);

    if (csv_out) {
        std::ostringstream csv;
        csv << "term,level,eps,sup,count\n";
        for (const auto& t : rep.terms)
            for (size_t j = 0; j < t.estimate.levels.size(); ++j) {
                const auto& lv = t.estimate.levels[j];
                csv << '"' << t.label << "\"," << (j + 1) << ',' << lv.eps << ',' << lv.sup << ','
                    << lv.count << '\n';
            }
        *csv_out = csv.str();
    }
    return to_json(rep);
}

json run_check_bounded(const RunConfig& cfg) {
    if (!cfg.op) throw ConfigError("/operator", "check-bounded needs an operator");
    std::optional<double> gamma;
    if (cfg.op->kind == OperatorKind::Tn) {
        if (!cfg.qk_params) throw PairingError("Tn boundedness needs the qk space");
        gamma = cfg.qk_params->gamma;
    }
    json j;
    j["boundedness"] = to_json(
        boundedness_suprema(*cfg.op, cfg.weight, cfg.grid_spec(), gamma));
    const RhoReport rr = rho(*cfg.op, cfg.grid_spec());
    j["rho"] = json{{"value", rr.value},
                    {"boundary_trend", rr.boundary_trend},
                    {"grid_level", rr.grid_level}};
    const NormalityReport nr = check_normal(cfg.weight);
    json nrj{{"ok", nr.ok}, {"detail", nr.detail}};
    if (nr.witness)
        nrj["witness"] = json::array({nr.witness->first, nr.witness->second});
    if (nr.witness_values)
        nrj["witness_values"] = json::array({nr.witness_values->first, nr.witness_values->second});
    j["weight_normality"] = nrj;
    if (cfg.qk_params) {
        j["kernel_integrability"] = to_json(check_kernel_integrability(*cfg.qk_params));
        j["condition_8"] = to_json(check_condition_8(*cfg.qk_params));
    }
    return j;
}

json run_dilation_sweep(const RunConfig& cfg) {
    if (!cfg.op) throw ConfigError("/operator", "dilation-sweep needs an operator");
    const auto& spec = *cfg.op;
    std::vector<double> schedule =
        cfg.r_schedule.value_or(std::vector<double>{0.9, 0.99, 0.999, 0.9999});

    // Unit-normalized default suite: the probing monomials plus one family.
    std::vector<std::pair<AnalyticFunction, double>> suite;
    const auto [lo, hi] = spec.value_orders();
    for (int d : {lo, hi, hi + 1}) {
        std::vector<Cx> c(std::max(d, 1) + 1, Cx(0.0));
        c[d] = 1.0;
        AnalyticFunction f{Polynomial{c}};
        double norm = 1.0;
        if (cfg.qk_params) {
            const NormReport nr = qk_norm(f, *cfg.qk_params, cfg.essnorm_options().qk_norm_opts);
            norm = nr.value;
        } else {
            norm = hinf_norm(f).value;
        }
        suite.emplace_back(f, norm);
    }
    if (cfg.qk_params) {
        QkTestFamily fam = build_qk_test(QkKind::F, Cx(0.9, 0.0), cfg.qk_params->gamma, lo);
        const NormReport nr = qk_norm(fam.fn, *cfg.qk_params, cfg.essnorm_options().qk_norm_opts);
        suite.emplace_back(fam.fn, nr.value);
    } else {
        HinfTestFamily fam = build_hinf_test(1, Cx(0.9, 0.0));
        suite.emplace_back(fam.fn, hinf_norm(fam.fn).value);
    }

    const auto pts = dilation_upper_bound(spec, cfg.weight, schedule, suite, cfg.grid_spec());
    json arr = json::array();
    for (const auto& p : pts) arr.push_back(json{{"r", p.r}, {"value", p.value}});
    json j;
    j["sequence"] = arr;
    j["note"] = "suite-based lower bound on ||T - T_r||; heuristic monitor";
    return j;
}

json run_verify_paper(const RunConfig& cfg, bool inject_fault) {
    json certs = json::array();
    int failures = 0;

    const auto base_points = boundary_sequence();
    const std::vector<double> gammas{0.5, 1.0, 2.0};
    const std::vector<int> orders{0, 1, 2};

    for (QkKind kind : {QkKind::F, QkKind::G, QkKind::H}) {
        const char* kname = kind == QkKind::F ? "f" : kind == QkKind::G ? "g" : "h";
        for (double gamma : gammas)
            for (int n : orders)
                for (const Cx& zk : base_points) {
                    QkTestFamily fam = build_qk_test(kind, zk, gamma, n);
                    const VanishCertificate vc = verify_vanishing(fam);
                    const ClosedFormCheck cc = closed_form_value(fam);
                    const bool ok = vc.ok && cc.ok;
                    failures += ok ? 0 : 1;
                    certs.push_back(json{{"certificate", "qk_family"},
                                         {"kind", kname},
                                         {"gamma", gamma},
                                         {"n", n},
                                         {"base", json::array({zk.real(), zk.imag()})},
                                         {"vanish_residuals",
                                          json::array({vc.rel_residual[0], vc.rel_residual[1]})},
                                         {"closed_form_rel_err", cc.rel_err},
                                         {"ok", ok}});
                }
    }

    for (const auto& orders_set : std::vector<std::vector<int>>{{0, 1, 2, 3}, {0, 1, 3, 4}})
        for (const Cx& zk : base_points) {
            json cert{{"certificate", "hinf_delta_family"},
                      {"orders", orders_set},
                      {"base", json::array({zk.real(), zk.imag()})}};
            try {
                const DeltaFamily fam = build_hinf_delta_family(orders_set, zk);
                cert["max_rel_residual"] = fam.max_rel_residual;
                cert["condition"] = fam.condition;
                cert["ok"] = true;
            } catch (const std::runtime_error& e) {
                cert["ok"] = false;
                cert["error"] = e.what();
                ++failures;
            }
            certs.push_back(cert);
        }

    // Seeded E-decomposition spot check against the stencil derivative.
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::uniform_real_distribution<double> rad(0.0, 0.85);
    std::uniform_real_distribution<double> ang(0.0, 6.283185307179586);
    double worst_rel = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Cx> c1(3), c2(3);
        for (auto& c : c1) c = Cx(coef(rng), coef(rng));
        for (auto& c : c2) c = Cx(coef(rng), coef(rng));
        SymbolConfig sc = SymbolConfig::make(
            AnalyticFunction(Polynomial{c1}), AnalyticFunction(Polynomial{c2}),
            AnalyticFunction(Polynomial{{Cx(0.0), Cx(0.5 + 0.4 * coef(rng), 0.0)}}));
        OperatorSpec spec = trial % 2 == 0 ? OperatorSpec::tn(sc, trial % 3)
                                           : OperatorSpec::tmn(sc, 0, 2 + trial % 2);
        AnalyticFunction f(MobiusPowerTerm{Cx(1.0, 0.3), std::polar(rad(rng), ang(rng)), 1.5});
        const Cx z = std::polar(rad(rng), ang(rng));
        const Cx via_e = derivative_decomposed(spec, f, z);
        auto ev = apply(spec, f);
        // stencil derivative of the operator image
        const int n_pts = 64;
        Cx acc = 0.0;
        const double h = 0.04;
        for (int s = 0; s < n_pts; ++s) {
            const double th = 2.0 * std::numbers::pi * s / n_pts;
            acc += ev(z + std::polar(h, th)) * std::polar(1.0, -th);
        }
        const Cx fd = acc / (n_pts * h);
        const double rel = std::abs(via_e - fd) / std::max({std::abs(via_e), std::abs(fd), 1.0});
        worst_rel = std::max(worst_rel, rel);
    }
    const bool decomp_ok = worst_rel <= 1e-6;
    failures += decomp_ok ? 0 : 1;
    certs.push_back(json{{"certificate", "e_decomposition_spot_check"},
                         {"trials", 20},
                         {"worst_rel_err", worst_rel},
                         {"ok", decomp_ok}});

    if (inject_fault) {
        // Debug fixture: perturb one combination coefficient and show the
        // certificate catching it.
        const Cx zk = base_points.front();
        const double gamma = 1.0;
        QkTestFamily fam = build_qk_test(QkKind::F, zk, gamma, 0);
        fam.coefficients[1] += Cx(0.1, 0.0);
        fam.fn = linear_combine(
            {fam.coefficients[0], fam.coefficients[1], fam.coefficients[2]},
            {build_l(1, zk, gamma), build_l(2, zk, gamma), build_l(3, zk, gamma)});
        const VanishCertificate vc = verify_vanishing(fam);
        certs.push_back(json{{"certificate", "injected_fault_fixture"},
                             {"fault_detected", !vc.ok},
                             {"vanish_residuals",
                              json::array({vc.rel_residual[0], vc.rel_residual[1]})},
                             {"ok", false}});
        ++failures; // a tampered sweep must exit nonzero
    }

    json j;
    j["certificates"] = certs;
    j["failures"] = failures;
    if (failures > 0) {
        std::cerr << "blochop: verify-paper recorded " << failures << " failing certificate(s)\n";
    }
    j["ok"] = failures == 0;
    return j;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"blochop: norms, operators, and essential-norm estimates on the unit disk"};
    app.require_subcommand(1);

    std::string config_path, out_path, csv_path, space;
    int grid_M = -1, levels_J = -1, xi_level = -1;
    uint64_t seed = 0;
    bool inject_fault = false;

    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--grid-M", grid_M, "override the disk grid level M");
    app.add_option("--levels-J", levels_J, "override the boundary level count J");
    app.add_option("--xi-level", xi_level, "override the xi sweep level");

    auto* norm_cmd = app.add_subcommand("norm", "compute a function norm");
    norm_cmd->add_option("--space", space, "bloch_mu|bloch_alpha|hinf|qk")->required();
    norm_cmd->add_option("--config", config_path, "config file")->required();
    norm_cmd->add_option("--out", out_path, "write the report to this file");

    auto* ess_cmd = app.add_subcommand("essnorm", "essential-norm estimate for the operator");
    ess_cmd->add_option("--config", config_path, "config file")->required();
    ess_cmd->add_option("--out", out_path, "write the report to this file");
    ess_cmd->add_option("--csv", csv_path, "write per-level sequences as CSV");

    auto* chk_cmd = app.add_subcommand("check-bounded", "boundedness suprema and admissibility");
    chk_cmd->add_option("--config", config_path, "config file")->required();
    chk_cmd->add_option("--out", out_path, "write the report to this file");

    auto* ver_cmd = app.add_subcommand("verify-paper", "run the certificate sweeps");
    ver_cmd->add_option("--config", config_path, "optional config (seed only)");
    ver_cmd->add_option("--out", out_path, "write the certificate list to this file");
    ver_cmd->add_flag("--inject-fault", inject_fault, "debug: tamper a coefficient");

    auto* dil_cmd = app.add_subcommand("dilation-sweep", "dilation difference monitoring");
    dil_cmd->add_option("--config", config_path, "config file")->required();
    dil_cmd->add_option("--out", out_path, "write the report to this file");

    CLI11_PARSE(app, argc, argv);

    const auto t0 = std::chrono::steady_clock::now();
    int exit_code = 0;
    try {
        std::string config_text = "{}";
        RunConfig cfg;
        if (!config_path.empty()) {
            config_text = read_config_text(config_path);
            cfg = load_config(config_text);
        }
        apply_overrides(cfg, grid_M, levels_J, xi_level, seed);

        json results;
        std::string command;
        if (norm_cmd->parsed()) {
            command = "norm";
            results = run_norm(cfg, space);
        } else if (ess_cmd->parsed()) {
            command = "essnorm";
            std::string csv;
            results = run_essnorm(cfg, csv_path.empty() ? nullptr : &csv);
            if (!csv_path.empty()) write_atomic(csv_path, csv);
        } else if (chk_cmd->parsed()) {
            command = "check-bounded";
            results = run_check_bounded(cfg);
        } else if (ver_cmd->parsed()) {
            command = "verify-paper";
            results = run_verify_paper(cfg, inject_fault);
            if (!results["ok"].get<bool>()) exit_code = 1;
        } else if (dil_cmd->parsed()) {
            command = "dilation-sweep";
            results = run_dilation_sweep(cfg);
        }
        emit_report(make_report_envelope(command, config_text, std::move(results)), out_path);
    } catch (const ConfigError& e) {
        std::cerr << "blochop: " << e.what() << "\n";
        return 2;
    } catch (const PairingError& e) {
        std::cerr << "blochop: incompatible operator/space pairing: " << e.what() << "\n";
        return 4;
    } catch (const std::domain_error& e) {
        std::cerr << "blochop: math domain error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "blochop: error: " << e.what() << "\n";
        return 3;
    }

    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    std::cerr << "blochop: done in " << ms << " ms\n";
    return exit_code;
}
