#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hubsim/experiments.hpp"

namespace hubsim {

// Parsed run configuration.  The file format is JSON with a strict schema:
// unknown and duplicate keys are rejected, and all violations are reported
// together (see README for the full schema).
struct RunConfig {
    std::string experiment_name;
    std::vector<std::int64_t> n_values;
    std::vector<double> t_values;
    std::int64_t replicates = 0;
    double nu = 2.0;  // slowvar only

    ModelSpec model{AttachmentFunction::constant(1), AttachmentSequence::constant(1), "model"};
    std::vector<ModelSpec> models;  // optional scan list; falls back to {model}

    std::uint64_t master_seed = 20260810;
    std::string out_dir = "out";
    std::int64_t max_events = 500'000'000;
    std::int64_t max_vertices = 50'000'000;
    int threads = 0;

    double malthusian_tol = 1e-10;
    std::int64_t phi_horizon = 100'000;
    std::string thresholds_path;

    std::int64_t race_a = 1, race_b = 1, race_steps = 10;
    double ctbp_t = 0;
    std::int64_t ctbp_n = 0;

    std::string source_digest;  // FNV-1a of the config file bytes
};

// Throws ConfigError whose message lists every schema violation found.
RunConfig parse_config(const std::string& path);

// Parse from an in-memory JSON document (used by tests).
RunConfig parse_config_text(const std::string& text);

}  // namespace hubsim
