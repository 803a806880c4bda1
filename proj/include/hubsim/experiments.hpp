#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hubsim/attachment.hpp"
#include "hubsim/graphsim.hpp"
#include "hubsim/malthusian.hpp"

namespace hubsim {

struct ModelSpec {
    AttachmentFunction f;
    AttachmentSequence m;
    std::string label;
};

struct MetricRow {
    std::string metric;
    double estimate = std::numeric_limits<double>::quiet_NaN();
    double ci_lo = std::numeric_limits<double>::quiet_NaN();
    double ci_hi = std::numeric_limits<double>::quiet_NaN();
    double predicted = std::numeric_limits<double>::quiet_NaN();
    std::string verdict;  // pass | fail | info | inapplicable
    std::string note;
};

struct RunSummary {
    std::string experiment;
    std::uint64_t master_seed = 0;
    std::vector<MetricRow> rows;
    // optional trajectories.csv payload (header + data lines)
    std::vector<std::string> trajectory_lines;

    bool all_pass() const {
        for (const auto& r : rows)
            if (r.verdict == "fail") return false;
        return true;
    }
};

// Absolute thresholds for the experiment verdicts.  Defaults are the pinned
// acceptance numbers; `calibrate` re-derives the pilot-tunable ones and writes
// a versioned file that experiment runs may load.
struct Thresholds {
    int version = 1;
    double persistent_change_frac_max = 0.15;
    double nonpersistent_change_frac_min = 0.5;
    double persistence_contrast_min = 5.0;
    double fclt_var_lo = 0.85, fclt_var_hi = 1.15;
    double fclt_corr_max = 0.1;
    double fclt_ratio_lo = 0.4, fclt_ratio_hi = 0.6;
    double index_median_reltol = 0.5;
    double unif_dmax_reltol = 0.15;
    double unif_index_lo = 0.15, unif_index_hi = 0.45;
    double tree_maxdeg_reltol = 0.10;
    double embedding_tv_max = 0.02;
    double race_tv_max = 0.02;
    double mdp_ratio_lo = 0.6, mdp_ratio_hi = 1.4;
    double iid_light_frac_max = 0.2, iid_heavy_frac_min = 0.5;
    double slowvar_frac_max = 0.2, slowvar_contrast_min = 3.0;
};

void save_thresholds(const Thresholds& t, const std::string& path);
Thresholds load_thresholds(const std::string& path);

struct ExperimentOptions {
    std::int64_t replicates = 0;  // 0 = suite default
    std::uint64_t master_seed = 20260810;
    int threads = 0;
    bool trajectories = false;
    std::int64_t max_events = 500'000'000;
    std::int64_t max_vertices = 50'000'000;
};

RunSummary run_persistence_scan(const std::vector<ModelSpec>& models,
                                std::vector<std::pair<std::int64_t, std::int64_t>> windows,
                                const ExperimentOptions& opt, const Thresholds& th);

RunSummary run_race_fclt(const AttachmentFunction& f, std::vector<std::int64_t> ns,
                         const ExperimentOptions& opt, const Thresholds& th);

RunSummary run_index_asymptotics(const AttachmentFunction& f, std::vector<std::int64_t> ns,
                                 const ExperimentOptions& opt, const Thresholds& th);

RunSummary run_uniform_tree(std::int64_t n_small, std::int64_t n_big,
                            const ExperimentOptions& opt, const Thresholds& th);

RunSummary run_iid_tails(const AttachmentFunction& f,
                         std::pair<std::int64_t, std::int64_t> window,
                         const ExperimentOptions& opt, const Thresholds& th);

RunSummary run_slowvar(double alpha, double nu, std::int64_t n_max,
                       const ExperimentOptions& opt, const Thresholds& th);

RunSummary run_tree_maxdeg(std::int64_t n_base, const ExperimentOptions& opt,
                           const Thresholds& th);

RunSummary run_tail_bounds(const ExperimentOptions& opt, const Thresholds& th);

RunSummary run_mdp_rates(const ExperimentOptions& opt, const Thresholds& th);

RunSummary run_embedding_equivalence(std::int64_t n_embed, const ExperimentOptions& opt,
                                     const Thresholds& th);

// 20-replicate pilots for the pilot-tunable thresholds; spec-fixed orderings
// stay fixed
Thresholds calibrate(const ExperimentOptions& opt);

}  // namespace hubsim
