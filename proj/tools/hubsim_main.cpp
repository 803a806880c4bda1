// hubsim: simulator and analysis toolkit for generalized preferential
// attachment growth and persistent-hub statistics.

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hubsim/config.hpp"
#include "hubsim/csv.hpp"
#include "hubsim/ctbp.hpp"
#include "hubsim/errors.hpp"
#include "hubsim/experiments.hpp"
#include "hubsim/malthusian.hpp"
#include "hubsim/parallel.hpp"
#include "hubsim/pointproc.hpp"
#include "hubsim/version.hpp"

namespace fs = std::filesystem;
using namespace hubsim;

namespace {

struct CliState {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::int64_t reps = 0;
    std::string out_dir;
    int threads = 0;
    bool trajectories = false;
    std::string experiment_name;
};

RunConfig load_config(const CliState& cli) {
    RunConfig cfg;
    if (!cli.config_path.empty()) cfg = parse_config(cli.config_path);
    if (cli.seed_given) cfg.master_seed = cli.seed;
    if (cli.reps > 0) cfg.replicates = cli.reps;
    if (!cli.out_dir.empty()) cfg.out_dir = cli.out_dir;
    if (cli.threads > 0) cfg.threads = cli.threads;
    return cfg;
}

ExperimentOptions options_from(const RunConfig& cfg, bool trajectories) {
    ExperimentOptions opt;
    opt.replicates = cfg.replicates;
    opt.master_seed = cfg.master_seed;
    opt.threads = cfg.threads;
    opt.trajectories = trajectories;
    opt.max_events = cfg.max_events;
    opt.max_vertices = cfg.max_vertices;
    return opt;
}

void write_metadata(const RunConfig& cfg, const std::string& what) {
    nlohmann::json meta{
        {"tool", "hubsim"},
        {"version", kHubsimVersion},
        {"command", what},
        {"master_seed", cfg.master_seed},
        {"rng",
         {{"generator", std::string(kGeneratorId)},
          {"stream_derivation",
           "seed = mix(mix(mix(master) ^ fnv1a64(purpose)) ^ replicate), mix = splitmix64"}}},
        {"config_digest", cfg.source_digest},
        {"threads_note", "results are independent of --threads"},
    };
    std::vector<std::string> lines{meta.dump(2)};
    write_lines(cfg.out_dir + "/run_metadata.json", lines);
}

void write_summary(const RunConfig& cfg, const RunSummary& sum) {
    fs::create_directories(cfg.out_dir);
    std::vector<std::string> lines{"metric,estimate,ci_lo,ci_hi,predicted,verdict"};
    std::vector<std::string> notes;
    for (const auto& r : sum.rows) {
        lines.push_back(r.metric + ',' + format_double(r.estimate) + ',' + format_double(r.ci_lo) +
                        ',' + format_double(r.ci_hi) + ',' + format_double(r.predicted) + ',' +
                        r.verdict);
        if (!r.note.empty()) notes.push_back(r.metric + ": " + r.note);
    }
    write_lines(cfg.out_dir + "/summary.csv", lines);
    if (!notes.empty()) write_lines(cfg.out_dir + "/summary_notes.txt", notes);
    if (!sum.trajectory_lines.empty())
        write_lines(cfg.out_dir + "/trajectories.csv", sum.trajectory_lines);
    write_metadata(cfg, sum.experiment);
    for (const auto& r : sum.rows) {
        std::cout << (r.verdict == "fail" ? "[FAIL] " : "[" + r.verdict + "] ") << r.metric
                  << "  estimate=" << format_double(r.estimate);
        if (!std::isnan(r.predicted)) std::cout << "  predicted=" << format_double(r.predicted);
        if (!r.note.empty()) std::cout << "  (" << r.note << ")";
        std::cout << "\n";
    }
}

RunSummary dispatch_experiment(const std::string& name, const RunConfig& cfg) {
    Thresholds th;
    if (!cfg.thresholds_path.empty()) th = load_thresholds(cfg.thresholds_path);
    // growth-based suites also emit trajectories.csv next to the summary
    ExperimentOptions opt = options_from(cfg, true);

    auto pick_n = [&](std::size_t i, std::int64_t fallback) {
        return i < cfg.n_values.size() ? cfg.n_values[i] : fallback;
    };

    if (name == "persistence_scan") {
        std::vector<std::pair<std::int64_t, std::int64_t>> windows;
        for (std::size_t i = 0; i + 1 < cfg.n_values.size(); ++i)
            windows.emplace_back(cfg.n_values[i], cfg.n_values[i + 1]);
        return run_persistence_scan(cfg.models, windows, opt, th);
    }
    if (name == "race_fclt") return run_race_fclt(cfg.model.f, cfg.n_values, opt, th);
    if (name == "index_asymptotics") return run_index_asymptotics(cfg.model.f, cfg.n_values, opt, th);
    if (name == "uniform_tree")
        return run_uniform_tree(pick_n(0, 10'000), pick_n(cfg.n_values.empty() ? 1 : cfg.n_values.size() - 1, 1'000'000), opt, th);
    if (name == "iid_tails")
        return run_iid_tails(cfg.model.f, {pick_n(0, 10'000), pick_n(1, 100'000)}, opt, th);
    if (name == "slowvar")
        return run_slowvar(cfg.model.f.kind() == FunKind::Power ? cfg.model.f.param() : 0.7,
                           cfg.nu, pick_n(cfg.n_values.empty() ? 0 : cfg.n_values.size() - 1, 100'000),
                           opt, th);
    if (name == "tree_maxdeg") return run_tree_maxdeg(pick_n(0, 100'000), opt, th);
    if (name == "tail_bounds") return run_tail_bounds(opt, th);
    if (name == "mdp_rates") return run_mdp_rates(opt, th);
    if (name == "embedding_equivalence") return run_embedding_equivalence(pick_n(0, 50), opt, th);
    throw ConfigError("unknown experiment '" + name + "'");
}

int do_simulate_graph(const RunConfig& cfg) {
    if (cfg.n_values.empty())
        throw ConfigError("simulate-graph needs experiment.n_values as checkpoint schedule");
    std::int64_t reps = cfg.replicates > 0 ? cfg.replicates : 1;
    std::int64_t n_max = *std::max_element(cfg.n_values.begin(), cfg.n_values.end());
    GrowOptions gopt;
    gopt.max_vertices = cfg.max_vertices;
    gopt.max_edges = cfg.max_events;
    PhiTable table(cfg.model.f, std::max<std::int64_t>(cfg.phi_horizon, 4096));
    gopt.phi = &table;
    auto recs = parallel_map<TrajectoryRecord>(reps, cfg.threads, [&](std::int64_t r) {
        RngStream rng = derive_stream(cfg.master_seed, std::uint64_t(r), "simulate-graph");
        return grow(cfg.model.f, cfg.model.m, n_max, cfg.n_values, rng, gopt);
    });
    fs::create_directories(cfg.out_dir);
    std::vector<std::string> lines{"replicate,n,k,d_max,leader_index,leader_changes,phi1_dmax"};
    bool capped = false;
    for (std::size_t r = 0; r < recs.size(); ++r) {
        capped = capped || recs[r].capped;
        for (const auto& c : recs[r].checkpoints) {
            lines.push_back(std::to_string(r) + ',' + std::to_string(c.n) + ',' +
                            std::to_string(c.k) + ',' + std::to_string(c.d_max) + ',' +
                            std::to_string(c.leader_index) + ',' +
                            std::to_string(c.leader_changes) + ',' + format_double(c.phi1_dmax));
        }
    }
    write_lines(cfg.out_dir + "/trajectories.csv", lines);
    write_metadata(cfg, "simulate-graph");
    std::cout << "wrote " << cfg.out_dir << "/trajectories.csv (" << reps << " replicates)\n";
    if (capped) throw ResourceError("one or more replicates hit a resource cap (partial output kept)");
    return 0;
}

int do_simulate_ctbp(const RunConfig& cfg) {
    std::int64_t reps = cfg.replicates > 0 ? cfg.replicates : 1;
    CtbpStop stop = cfg.ctbp_t > 0 ? CtbpStop::at_time(cfg.ctbp_t)
                                   : CtbpStop::at_size(cfg.ctbp_n > 0 ? cfg.ctbp_n : 1000);
    auto lam = solve_lambda_star(cfg.model.f, cfg.malthusian_tol);
    struct Row {
        double stop_at;
        std::int64_t size;
        std::int64_t max_children;
        double hub_birth;
        bool capped;
    };
    auto rows = parallel_map<Row>(reps, cfg.threads, [&](std::int64_t r) {
        RngStream rng = derive_stream(cfg.master_seed, std::uint64_t(r), "simulate-ctbp");
        auto traj = run_ctbp(cfg.model.f, stop, rng, cfg.max_vertices);
        traj.build_child_index();
        std::int64_t best = -1;
        double hub_birth = 0;
        for (std::int64_t i = 0; i < traj.size(); ++i) {
            auto c = traj.child_count[std::size_t(i)];
            if (c > best) {
                best = c;
                hub_birth = traj.birth_time[std::size_t(i)];
            }
        }
        return Row{traj.end_time, traj.size(), best, hub_birth, traj.capped};
    });
    std::int64_t max_c = 1;
    for (const auto& r : rows) max_c = std::max(max_c, r.max_children);
    PhiTable table(cfg.model.f, max_c + 2);
    fs::create_directories(cfg.out_dir);
    std::vector<std::string> lines{"replicate,t_or_n,size,d_max_N_degree,hub_birth_time,W_sample"};
    bool capped = false;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        capped = capped || row.capped;
        double w = lam.found ? std::exp(-lam.lambda_star * row.stop_at) * double(row.size)
                             : std::numeric_limits<double>::quiet_NaN();
        lines.push_back(std::to_string(r) + ',' + format_double(row.stop_at) + ',' +
                        std::to_string(row.size) + ',' + format_double(table.phi1(row.max_children)) +
                        ',' + format_double(row.hub_birth) + ',' + format_double(w));
    }
    write_lines(cfg.out_dir + "/ctbp.csv", lines);
    write_metadata(cfg, "simulate-ctbp");
    std::cout << "wrote " << cfg.out_dir << "/ctbp.csv (" << reps << " replicates)\n";
    if (capped) throw ResourceError("one or more replicates hit the size cap (partial output kept)");
    return 0;
}

int do_race(const RunConfig& cfg) {
    std::int64_t reps = cfg.replicates > 0 ? cfg.replicates : 1000;
    auto rows = parallel_map<RaceResult>(reps, cfg.threads, [&](std::int64_t r) {
        RngStream rng = derive_stream(cfg.master_seed, std::uint64_t(r), "race");
        return race(cfg.model.f, cfg.race_a, cfg.race_b, cfg.race_steps, rng);
    });
    fs::create_directories(cfg.out_dir);
    std::vector<std::string> lines{"replicate,lead_changes,tie_visits,final_x1,final_x2"};
    double mean_changes = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& rr = rows[r];
        mean_changes += double(rr.lead_changes);
        lines.push_back(std::to_string(r) + ',' + std::to_string(rr.lead_changes) + ',' +
                        std::to_string(rr.tie_visits) + ',' + std::to_string(rr.path.back().first) +
                        ',' + std::to_string(rr.path.back().second));
    }
    write_lines(cfg.out_dir + "/race.csv", lines);
    write_metadata(cfg, "race");
    std::cout << "wrote " << cfg.out_dir << "/race.csv; mean lead changes = "
              << format_double(mean_changes / double(reps)) << "\n";
    return 0;
}

int do_malthusian(const RunConfig& cfg) {
    auto res = solve_lambda_star(cfg.model.f, cfg.malthusian_tol);
    nlohmann::json j{
        {"f", cfg.model.f.describe()},
        {"found", res.found},
        {"lambda_star", res.lambda_star},
        {"bracket", {res.lo, res.hi}},
        {"rho_at_bracket", {res.rho_at_lo, res.rho_at_hi}},
        {"truncation_k", res.truncation_k},
        {"tail_bound", res.tail_bound},
        {"tol", cfg.malthusian_tol},
        {"note", res.note},
    };
    std::cout << j.dump(2) << "\n";
    return res.found ? 0 : 4;
}

int do_check_assumptions(const RunConfig& cfg) {
    PhiTable table(cfg.model.f, cfg.phi_horizon);
    auto rep = check_assumptions(cfg.model.f, table);
    auto tri = [](TriState t) {
        return t == TriState::True ? "true" : t == TriState::False ? "false" : "unknown";
    };
    nlohmann::json surface = nlohmann::json::array();
    for (const auto& s : rep.c2_surface)
        surface.push_back({{"delta", s.delta}, {"t", s.t}, {"ratio", s.ratio}});
    nlohmann::json j{
        {"f", cfg.model.f.describe()},
        {"phi_horizon", table.horizon()},
        {"c1_phi2_infinite", tri(rep.c1)},
        {"c2_verdict", rep.c2_verdict},
        {"c2_surface", surface},
        {"c3_estimate_D", rep.c3_estimate},
        {"c3_t_prime", rep.c3_tprime},
        {"prop_under_lamb", tri(rep.prop_under_lamb)},
        {"underline_lambda_estimate", rep.underline_lambda},
        {"d_bar", rep.d_bar},
    };
    if (rep.rho_at_d_bar) j["rho_at_d_bar"] = *rep.rho_at_d_bar;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int do_calibrate(const RunConfig& cfg) {
    auto th = calibrate(options_from(cfg, false));
    fs::create_directories(cfg.out_dir);
    save_thresholds(th, cfg.out_dir + "/thresholds.json");
    write_metadata(cfg, "calibrate");
    std::cout << "wrote " << cfg.out_dir << "/thresholds.json\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hubsim: generalized preferential attachment, persistent hubs, and the "
                 "surrounding diagnostics"};
    app.require_subcommand(1);
    app.fallthrough();

    CliState cli;
    app.add_option("--config", cli.config_path, "JSON run configuration");
    auto* seed_opt = app.add_option("--seed", cli.seed, "master seed (overrides config)");
    app.add_option("--reps", cli.reps, "replicate count (overrides config)");
    app.add_option("--out", cli.out_dir, "output directory (overrides config)");
    app.add_option("--threads", cli.threads, "worker threads; affects wall time only");

    auto* sg = app.add_subcommand("simulate-graph", "grow the discrete graph sequence");
    auto* sc = app.add_subcommand("simulate-ctbp", "run the continuous-time branching process");
    auto* rc = app.add_subcommand("race", "two-vertex degree race");
    auto* ml = app.add_subcommand("malthusian", "solve the Malthusian rate");
    auto* ca = app.add_subcommand("check-assumptions", "numeric checks of C1/C2/C3 and the rate assumption");
    auto* ex = app.add_subcommand("experiment", "run a named experiment suite");
    ex->add_option("name", cli.experiment_name, "suite name")->required();
    auto* cb = app.add_subcommand("calibrate", "20-replicate pilot; writes thresholds.json");

    CLI11_PARSE(app, argc, argv);
    cli.seed_given = seed_opt->count() > 0;

    try {
        RunConfig cfg = load_config(cli);
        if (sg->parsed()) return do_simulate_graph(cfg);
        if (sc->parsed()) return do_simulate_ctbp(cfg);
        if (rc->parsed()) return do_race(cfg);
        if (ml->parsed()) return do_malthusian(cfg);
        if (ca->parsed()) return do_check_assumptions(cfg);
        if (cb->parsed()) return do_calibrate(cfg);
        if (ex->parsed()) {
            RunSummary sum = dispatch_experiment(cli.experiment_name, cfg);
            write_summary(cfg, sum);
            return sum.all_pass() ? 0 : 4;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const TableRangeError& e) {
        std::cerr << "range error: " << e.what() << "\n";
        return 2;
    } catch (const ResourceError& e) {
        std::cerr << "resource cap: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
