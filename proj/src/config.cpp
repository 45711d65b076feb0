#include "blochop/config.hpp"

#include <algorithm>
#include <cmath>

namespace blochop {

std::string blochop_version() { return "0.1.0"; }

uint64_t fnv1a64(const std::string& bytes) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

void require_keys(const json& j, const std::string& path,
                  std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(path, "expected an object");
    for (const auto& [key, _] : j.items()) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* k) { return key == k; }) == allowed.end())
            throw ConfigError(path + "/" + key, "unknown key");
    }
}

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    return j.get<double>();
}

int get_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
    return j.get<int>();
}

Cx get_complex(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ConfigError(path, "expected a complex number as [re, im]");
    return Cx(j[0].get<double>(), j[1].get<double>());
}

std::vector<Cx> get_complex_list(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path, "expected an array of [re, im] pairs");
    std::vector<Cx> out;
    for (size_t i = 0; i < j.size(); ++i)
        out.push_back(get_complex(j[i], path + "/" + std::to_string(i)));
    return out;
}

} // namespace

AnalyticFunction parse_function(const json& j, const std::string& path) {
    require_keys(j, path, {"poly", "mobius", "series"});
    if (j.size() != 1) throw ConfigError(path, "expected exactly one of poly/mobius/series");
    try {
        if (j.contains("poly"))
            return AnalyticFunction(Polynomial{get_complex_list(j["poly"], path + "/poly")});
        if (j.contains("mobius")) {
            const auto& arr = j["mobius"];
            if (!arr.is_array() || arr.empty())
                throw ConfigError(path + "/mobius", "expected a non-empty array of terms");
            MobiusPowerSum sum;
            for (size_t i = 0; i < arr.size(); ++i) {
                const std::string tp = path + "/mobius/" + std::to_string(i);
                require_keys(arr[i], tp, {"c", "a", "beta"});
                if (!arr[i].contains("c") || !arr[i].contains("a") || !arr[i].contains("beta"))
                    throw ConfigError(tp, "term needs c, a, beta");
                MobiusPowerTerm t{get_complex(arr[i]["c"], tp + "/c"),
                                  get_complex(arr[i]["a"], tp + "/a"),
                                  get_number(arr[i]["beta"], tp + "/beta")};
                if (std::abs(t.a) > 1.0) throw ConfigError(tp + "/a", "|a| must be <= 1");
                if (!(t.beta > 0.0)) throw ConfigError(tp + "/beta", "beta must be > 0");
                sum.terms.push_back(t);
            }
            return AnalyticFunction(std::move(sum));
        }
        const auto& s = j["series"];
        require_keys(s, path + "/series", {"coeffs", "rho_max"});
        if (!s.contains("coeffs") || !s.contains("rho_max"))
            throw ConfigError(path + "/series", "series needs coeffs and rho_max");
        PowerSeries ps{get_complex_list(s["coeffs"], path + "/series/coeffs"),
                       get_number(s["rho_max"], path + "/series/rho_max")};
        if (!(ps.rho_max > 0.0) || ps.rho_max >= 1.0)
            throw ConfigError(path + "/series/rho_max", "rho_max must lie in (0, 1)");
        return AnalyticFunction(std::move(ps));
    } catch (const std::domain_error& e) {
        throw ConfigError(path, e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
}

Kernel parse_kernel(const json& j, const std::string& path) {
    require_keys(j, path, {"power_s", "samples"});
    if (j.size() != 1) throw ConfigError(path, "expected exactly one of power_s/samples");
    try {
        if (j.contains("power_s")) return Kernel::power(get_number(j["power_s"], path + "/power_s"));
        const auto& s = j["samples"];
        require_keys(s, path + "/samples", {"t", "K"});
        if (!s.contains("t") || !s.contains("K"))
            throw ConfigError(path + "/samples", "samples needs t and K arrays");
        if (!s["t"].is_array() || !s["K"].is_array())
            throw ConfigError(path + "/samples", "t and K must be arrays");
        std::vector<double> ts, ks;
        for (const auto& v : s["t"]) ts.push_back(get_number(v, path + "/samples/t"));
        for (const auto& v : s["K"]) ks.push_back(get_number(v, path + "/samples/K"));
        return Kernel::sampled(std::move(ts), std::move(ks));
    } catch (const std::domain_error& e) {
        throw ConfigError(path, e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
}

Weight parse_weight(const json& j, const std::string& path) {
    require_keys(j, path, {"alpha", "tabulated", "normality"});
    try {
        Weight w = Weight::alpha(1.0);
        if (j.contains("alpha"))
            w = Weight::alpha(get_number(j["alpha"], path + "/alpha"));
        else if (j.contains("tabulated")) {
            const auto& t = j["tabulated"];
            require_keys(t, path + "/tabulated", {"r", "mu"});
            if (!t.contains("r") || !t.contains("mu"))
                throw ConfigError(path + "/tabulated", "tabulated needs r and mu arrays");
            std::vector<double> rs, mus;
            for (const auto& v : t["r"]) rs.push_back(get_number(v, path + "/tabulated/r"));
            for (const auto& v : t["mu"]) mus.push_back(get_number(v, path + "/tabulated/mu"));
            w = Weight::tabulated(std::move(rs), std::move(mus));
        } else {
            throw ConfigError(path, "weight needs alpha or tabulated");
        }
        if (j.contains("normality")) {
            const auto& n = j["normality"];
            require_keys(n, path + "/normality", {"a", "b", "delta"});
            NormalityParams np;
            np.a = n.contains("a") ? get_number(n["a"], path + "/normality/a") : 0.0;
            np.b = n.contains("b") ? get_number(n["b"], path + "/normality/b") : 0.0;
            np.delta = n.contains("delta") ? get_number(n["delta"], path + "/normality/delta") : 0.0;
            w.normality_params = np;
        }
        return w;
    } catch (const std::domain_error& e) {
        throw ConfigError(path, e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
}

namespace {

OperatorSpec parse_operator(const json& op_j, const json& sym_j) {
    require_keys(op_j, "/operator", {"kind", "n", "m", "dilation_r"});
    require_keys(sym_j, "/symbols", {"psi1", "psi2", "phi"});
    for (const char* k : {"psi1", "psi2", "phi"})
        if (!sym_j.contains(k)) throw ConfigError(std::string("/symbols/") + k, "missing");
    AnalyticFunction psi1 = parse_function(sym_j["psi1"], "/symbols/psi1");
    AnalyticFunction psi2 = parse_function(sym_j["psi2"], "/symbols/psi2");
    AnalyticFunction phi = parse_function(sym_j["phi"], "/symbols/phi");

    if (!op_j.contains("kind")) throw ConfigError("/operator/kind", "missing");
    const std::string kind = op_j["kind"].is_string() ? op_j["kind"].get<std::string>() : "";
    const double r = op_j.contains("dilation_r")
                         ? get_number(op_j["dilation_r"], "/operator/dilation_r")
                         : 1.0;
    try {
        SymbolConfig sc = SymbolConfig::make(std::move(psi1), std::move(psi2), std::move(phi));
        if (kind == "Tn") {
            if (!op_j.contains("n")) throw ConfigError("/operator/n", "missing");
            return OperatorSpec::tn(std::move(sc), get_int(op_j["n"], "/operator/n"), r);
        }
        if (kind == "Tmn") {
            if (!op_j.contains("n") || !op_j.contains("m"))
                throw ConfigError("/operator", "Tmn needs m and n");
            return OperatorSpec::tmn(std::move(sc), get_int(op_j["m"], "/operator/m"),
                                     get_int(op_j["n"], "/operator/n"), r);
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError("/operator", e.what());
    }
    throw ConfigError("/operator/kind", "expected \"Tn\" or \"Tmn\"");
}

} // namespace

RunConfig parse_config(const json& j) {
    require_keys(j, "", {"operator", "symbols", "space", "weight", "function", "alpha",
                         "alpha_order_n", "grid", "tolerances", "r_schedule", "seed"});
    RunConfig cfg;

    if (j.contains("operator") != j.contains("symbols"))
        throw ConfigError("/operator", "operator and symbols must appear together");
    if (j.contains("operator")) cfg.op = parse_operator(j["operator"], j["symbols"]);

    if (j.contains("space")) {
        const auto& s = j["space"];
        require_keys(s, "/space", {"kind", "p", "q", "kernel"});
        if (!s.contains("kind")) throw ConfigError("/space/kind", "missing");
        const std::string kind = s["kind"].is_string() ? s["kind"].get<std::string>() : "";
        if (kind == "qk") {
            if (!s.contains("p") || !s.contains("q") || !s.contains("kernel"))
                throw ConfigError("/space", "qk space needs p, q, kernel");
            try {
                cfg.qk_params = SpaceParams::make(get_number(s["p"], "/space/p"),
                                                  get_number(s["q"], "/space/q"),
                                                  parse_kernel(s["kernel"], "/space/kernel"));
            } catch (const std::domain_error& e) {
                throw ConfigError("/space", e.what());
            }
        } else if (kind == "hinf") {
            for (const char* k : {"p", "q", "kernel"})
                if (s.contains(k))
                    throw ConfigError(std::string("/space/") + k, "not valid for hinf");
            cfg.hinf_space = true;
        } else {
            throw ConfigError("/space/kind", "expected \"qk\" or \"hinf\"");
        }
    }

    if (j.contains("weight")) cfg.weight = parse_weight(j["weight"], "/weight");
    if (j.contains("function")) cfg.function = parse_function(j["function"], "/function");
    if (j.contains("alpha")) cfg.alpha = get_number(j["alpha"], "/alpha");
    if (j.contains("alpha_order_n")) cfg.alpha_order_n = get_int(j["alpha_order_n"], "/alpha_order_n");

    if (j.contains("grid")) {
        const auto& g = j["grid"];
        require_keys(g, "/grid", {"M", "J", "xi_level"});
        if (g.contains("M")) cfg.grid_M = get_int(g["M"], "/grid/M");
        if (g.contains("J")) cfg.levels_J = get_int(g["J"], "/grid/J");
        if (g.contains("xi_level")) cfg.xi_level = get_int(g["xi_level"], "/grid/xi_level");
        if (cfg.grid_M < 6 || cfg.grid_M > 64) throw ConfigError("/grid/M", "M must lie in [6, 64]");
        if (cfg.levels_J < 2 || cfg.levels_J > 16)
            throw ConfigError("/grid/J", "J must lie in [2, 16]");
        if (cfg.xi_level < 0 || cfg.xi_level > 10)
            throw ConfigError("/grid/xi_level", "xi_level must lie in [0, 10]");
    }
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        require_keys(t, "/tolerances", {"compact_scale_rel"});
        if (t.contains("compact_scale_rel"))
            cfg.compact_scale_rel = get_number(t["compact_scale_rel"], "/tolerances/compact_scale_rel");
        if (!(cfg.compact_scale_rel > 0.0))
            throw ConfigError("/tolerances/compact_scale_rel", "must be > 0");
    }
    if (j.contains("r_schedule")) {
        if (!j["r_schedule"].is_array()) throw ConfigError("/r_schedule", "expected an array");
        std::vector<double> rs;
        for (const auto& v : j["r_schedule"]) rs.push_back(get_number(v, "/r_schedule"));
        cfg.r_schedule = rs;
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            throw ConfigError("/seed", "expected an integer");
        cfg.seed = j["seed"].get<uint64_t>();
    }
    return cfg;
}

EssnormOptions RunConfig::essnorm_options() const {
    EssnormOptions opts;
    opts.levels.M = grid_M;
    opts.levels.J = levels_J;
    opts.verdict_scale_rel = compact_scale_rel;
    opts.qk_norm_opts.xi_level = std::min(xi_level, 2);
    return opts;
}

QkNormOptions RunConfig::qk_norm_options() const {
    QkNormOptions opts;
    opts.xi_level = xi_level;
    return opts;
}

namespace {

json cx_json(Cx z) { return json::array({z.real(), z.imag()}); }

} // namespace

json to_json(const NormReport& rep) {
    json j;
    j["value"] = rep.value;
    j["argmax"] = cx_json(rep.argmax);
    j["grid_level"] = rep.grid_level;
    j["converged"] = rep.converged;
    j["flags"] = rep.flags;
    return j;
}

json to_json(const LimsupEstimate& est) {
    json j;
    j["value"] = est.value;
    j["empty_boundary"] = est.empty_boundary;
    j["diverged"] = est.diverged;
    j["stabilized"] = est.stabilized;
    json lv = json::array();
    for (const auto& l : est.levels)
        lv.push_back(json{{"eps", l.eps}, {"sup", l.sup}, {"count", l.count}});
    j["levels"] = lv;
    return j;
}

json to_json(const BoundednessReport& rep) {
    json j = json::array();
    for (const auto& o : rep.orders)
        j.push_back(json{{"order", o.order},
                         {"sup_mu_E", o.sup_plain},
                         {"argmax", cx_json(o.argmax)},
                         {"exponent", o.exponent},
                         {"sup_weighted", o.sup_weighted},
                         {"weighted_converged", o.weighted_converged}});
    return j;
}

json to_json(const DyadicQuadReport& rep) {
    json j;
    j["ok"] = rep.finite;
    j["value"] = rep.value;
    j["converged"] = rep.converged;
    j["levels_used"] = rep.levels_used;
    j["witness"] = rep.detail;
    return j;
}

json to_json(const EstimateReport& rep) {
    json j;
    j["lower"] = rep.lower;
    j["upper_max"] = rep.upper_max;
    j["upper_sum"] = rep.upper_sum;
    json terms;
    json levels = json::array();
    for (const auto& t : rep.terms) {
        json tj = to_json(t.estimate);
        tj["order"] = t.order;
        tj["exponent"] = t.exponent;
        terms[t.label] = tj;
    }
    if (!rep.terms.empty())
        for (const auto& lv : rep.terms.front().estimate.levels) levels.push_back(lv.eps);
    j["terms"] = terms;
    j["levels"] = levels;
    json samples = json::array();
    for (const auto& s : rep.lower_samples)
        samples.push_back(json{{"family", s.family},
                               {"z", cx_json(s.z)},
                               {"base", cx_json(s.base)},
                               {"value", s.value},
                               {"norm", s.norm}});
    j["lower_samples"] = samples;
    if (rep.fi_norm_limsup > 0.0) j["fi_norm_limsup"] = rep.fi_norm_limsup;
    j["verdict"] = to_string(rep.verdict);
    j["tol_used"] = rep.tol_used;
    j["boundedness"] = to_json(rep.bounded);
    j["diagnostics"] = rep.diagnostics;
    return j;
}

json make_report_envelope(const std::string& command, const std::string& config_text,
                          json results) {
    json j;
    j["blochop_version"] = blochop_version();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)fnv1a64(config_text));
    j["config_fnv1a64"] = buf;
    j["command"] = command;
    j["results"] = std::move(results);
    return j;
}

} // namespace blochop
