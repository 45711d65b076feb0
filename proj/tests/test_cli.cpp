#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run(const std::string& args) {
    const std::string cmd = std::string(BLOCHOP_BIN_PATH) + " " + args + " 2>/dev/null";
    std::array<char, 4096> buf{};
    RunResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) res.out.append(buf.data(), got);
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

std::string run_stderr(const std::string& args) {
    const std::string cmd = std::string(BLOCHOP_BIN_PATH) + " " + args + " 2>&1 1>/dev/null";
    std::array<char, 4096> buf{};
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
    pclose(pipe);
    return out;
}

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "blochop_cli_tests";
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = temp_dir() / name;
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kCompactEssConfig = R"({
  "operator": {"kind": "Tn", "n": 0},
  "symbols": {
    "psi1": {"poly": [[0.2, 0], [1, 0]]},
    "psi2": {"poly": [[0.5, 0]]},
    "phi":  {"poly": [[0, 0], [0.5, 0]]}
  },
  "space": {"kind": "qk", "p": 2.0, "q": 0.0, "kernel": {"power_s": 0.5}},
  "weight": {"alpha": 1.0}
})";

} // namespace

TEST_CASE("norm command computes the identity Bloch norm") {
    auto cfg = write_config("norm_id.json", R"({
      "function": {"poly": [[0, 0], [1, 0]]},
      "weight": {"alpha": 1.0}
    })");
    auto res = run("norm --space bloch_mu --config " + cfg.string());
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("\"value\": 1.0") != std::string::npos);

    auto cres = run("norm --space bloch_mu --config " +
                    write_config("norm_c.json", R"({
      "function": {"poly": [[3, -4]]},
      "weight": {"alpha": 1.0}
    })").string());
    CHECK(cres.exit_code == 0);
    CHECK(cres.out.find("\"value\": 5.0") != std::string::npos);
}

TEST_CASE("schema violations exit with code 2 and a pointer") {
    auto cfg = write_config("bad_key.json", R"({
      "function": {"poly": [[0, 0], [1, 0]]},
      "weight": {"alpha": 1.0},
      "unexpected": 3
    })");
    auto res = run("norm --space bloch_mu --config " + cfg.string());
    CHECK(res.exit_code == 2);
    const std::string err = run_stderr("norm --space bloch_mu --config " + cfg.string());
    CHECK(err.find("/unexpected") != std::string::npos);

    auto missing = run("norm --space bloch_mu --config /nonexistent/path.json");
    CHECK(missing.exit_code == 2);

    auto badjson = write_config("bad_json.json", "{ not json");
    CHECK(run("norm --space bloch_mu --config " + badjson.string()).exit_code == 2);
}

TEST_CASE("math-domain problems exit with code 3") {
    auto cfg = write_config("bad_alpha.json", R"({
      "function": {"poly": [[0, 0], [1, 0]]},
      "alpha": -1.0
    })");
    CHECK(run("norm --space bloch_alpha --config " + cfg.string()).exit_code == 3);
}

TEST_CASE("incompatible operator/space pairing exits with code 4") {
    auto cfg = write_config("pairing.json", R"({
      "operator": {"kind": "Tn", "n": 0},
      "symbols": {
        "psi1": {"poly": [[1, 0]]},
        "psi2": {"poly": [[0, 0]]},
        "phi":  {"poly": [[0, 0], [0.5, 0]]}
      },
      "space": {"kind": "hinf"},
      "weight": {"alpha": 1.0}
    })");
    CHECK(run("essnorm --config " + cfg.string()).exit_code == 4);
}

TEST_CASE("essnorm on the interior-map config is compact and deterministic") {
    auto cfg = write_config("compact.json", kCompactEssConfig);
    const fs::path out1 = temp_dir() / "rep1.json";
    const fs::path out2 = temp_dir() / "rep2.json";
    auto r1 = run("essnorm --config " + cfg.string() + " --out " + out1.string());
    auto r2 = run("essnorm --config " + cfg.string() + " --out " + out2.string());
    CHECK(r1.exit_code == 0);
    CHECK(r2.exit_code == 0);
    const std::string rep = slurp(out1);
    CHECK(rep.find("\"verdict\": \"compact\"") != std::string::npos);
    CHECK(rep == slurp(out2)); // byte-identical reports for identical config

    // CSV export of the per-level sequences
    const fs::path csv = temp_dir() / "levels.csv";
    auto r3 = run("essnorm --config " + cfg.string() + " --csv " + csv.string());
    CHECK(r3.exit_code == 0);
    const std::string csv_text = slurp(csv);
    CHECK(csv_text.find("term,level,eps,sup,count") != std::string::npos);
}

TEST_CASE("check-bounded reports suprema and admissibility") {
    auto cfg = write_config("chk.json", kCompactEssConfig);
    auto res = run("check-bounded --config " + cfg.string());
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("\"boundedness\"") != std::string::npos);
    CHECK(res.out.find("\"kernel_integrability\"") != std::string::npos);
    CHECK(res.out.find("\"condition_8\"") != std::string::npos);
    CHECK(res.out.find("\"rho\"") != std::string::npos);
}

TEST_CASE("verify-paper passes clean and fails under an injected fault") {
    auto ok = run("verify-paper");
    CHECK(ok.exit_code == 0);
    CHECK(ok.out.find("\"failures\": 0") != std::string::npos);

    auto bad = run("verify-paper --inject-fault");
    CHECK(bad.exit_code == 1);
    CHECK(bad.out.find("injected_fault_fixture") != std::string::npos);
    CHECK(bad.out.find("\"fault_detected\": true") != std::string::npos);
}

TEST_CASE("dilation-sweep emits a decaying sequence") {
    auto cfg = write_config("dil.json", std::string(kCompactEssConfig).replace(
        std::string(kCompactEssConfig).find("\"weight\""), 0,
        "\"r_schedule\": [0.9, 0.99, 0.999], "));
    auto res = run("dilation-sweep --config " + cfg.string());
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("\"sequence\"") != std::string::npos);
}

TEST_CASE("config directory environment fallback") {
    const fs::path dir = temp_dir() / "cfgdir";
    fs::create_directories(dir);
    std::ofstream(dir / "env_lookup.json") << R"({
      "function": {"poly": [[0, 0], [1, 0]]},
      "weight": {"alpha": 1.0}
    })";
    setenv("BLOCHOP_CONFIG_DIR", dir.string().c_str(), 1);
    auto res = run("norm --space bloch_mu --config env_lookup.json");
    unsetenv("BLOCHOP_CONFIG_DIR");
    CHECK(res.exit_code == 0);
}

TEST_CASE("grid overrides are accepted") {
    auto cfg = write_config("norm_id2.json", R"({
      "function": {"poly": [[0, 0], [1, 0]]},
      "weight": {"alpha": 1.0}
    })");
    auto res = run("--grid-M 12 norm --space bloch_mu --config " + cfg.string());
    CHECK(res.exit_code == 0);
}
