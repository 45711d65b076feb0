#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "blochop/essnorm.hpp"
#include "blochop/norms.hpp"
#include "blochop/operators.hpp"
#include "blochop/weights.hpp"

// Config-file ingestion and report serialization for the CLI. Configs are
// strict: unknown keys are rejected so that a config file is a complete,
// reproducible description of a run.

namespace blochop {

using json = nlohmann::ordered_json;

/// Schema violation carrying the JSON-pointer-style location.
struct ConfigError : std::runtime_error {
    std::string path;
    ConfigError(std::string path_, const std::string& msg)
        : std::runtime_error("config error at " + path_ + ": " + msg), path(std::move(path_)) {}
};

/// Operator/space pairing outside the implemented criteria.
struct PairingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::optional<OperatorSpec> op;
    std::optional<SpaceParams> qk_params; // set when space.kind == "qk"
    bool hinf_space = false;              // set when space.kind == "hinf"
    Weight weight = Weight::alpha(1.0);
    std::optional<AnalyticFunction> function; // for the norm command
    std::optional<double> alpha;              // bloch_alpha norm parameter
    int alpha_order_n = 0;

    int grid_M = 24;
    int levels_J = 12;
    int xi_level = 4;
    double compact_scale_rel = 1e-3;
    std::optional<std::vector<double>> r_schedule;
    uint64_t seed = 1;

    DiskGridSpec grid_spec() const { return DiskGridSpec{.M = grid_M}; }
    EssnormOptions essnorm_options() const;
    QkNormOptions qk_norm_options() const;
};

AnalyticFunction parse_function(const json& j, const std::string& path);
Weight parse_weight(const json& j, const std::string& path);
Kernel parse_kernel(const json& j, const std::string& path);
RunConfig parse_config(const json& j);

/// FNV-1a 64-bit hash of the raw config text (reproducibility echo).
uint64_t fnv1a64(const std::string& bytes);

json to_json(const NormReport& rep);
json to_json(const LimsupEstimate& est);
json to_json(const EstimateReport& rep);
json to_json(const BoundednessReport& rep);
json to_json(const DyadicQuadReport& rep);

/// Report envelope: {"blochop_version", "config_fnv1a64", "command", "results"}.
/// Byte-identical for identical config and version; wall-clock timing is
/// deliberately kept out of the envelope.
json make_report_envelope(const std::string& command, const std::string& config_text,
                          json results);

std::string blochop_version();

} // namespace blochop
