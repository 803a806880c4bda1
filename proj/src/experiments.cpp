#include "hubsim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "hubsim/ctbp.hpp"
#include "hubsim/errors.hpp"
#include "hubsim/parallel.hpp"
#include "hubsim/phi.hpp"
#include "hubsim/pointproc.hpp"
#include "hubsim/csv.hpp"
#include "hubsim/stats.hpp"

#include "json.hpp"

namespace hubsim {

namespace {

constexpr double kZ95 = 1.959963984540054;

std::pair<double, double> wilson_ci(std::int64_t k, std::int64_t n, double z = kZ95) {
    double phat = double(k) / double(n);
    double z2 = z * z;
    double denom = 1.0 + z2 / double(n);
    double centre = phat + z2 / (2.0 * double(n));
    double rad = z * std::sqrt(phat * (1 - phat) / double(n) + z2 / (4.0 * double(n) * double(n)));
    return {std::max(0.0, (centre - rad) / denom), std::min(1.0, (centre + rad) / denom)};
}

std::string pass_fail(bool ok) { return ok ? "pass" : "fail"; }

PhiTable table_covering_phi2(const AttachmentFunction& f, double phi2_target) {
    std::int64_t h = 1 << 12;
    for (;;) {
        PhiTable t(f, h);
        if (t.phi2_max() > phi2_target) return t;
        if (h > (1ll << 26)) throw TableRangeError("phi table would exceed 2^26 nodes", h);
        h *= 2;
    }
}

std::string traj_header() {
    return "replicate,n,k,d_max,leader_index,leader_changes,phi1_dmax";
}

std::string fmt_g(double v) { return format_double(v); }

void append_trajectories(RunSummary& sum, const std::vector<TrajectoryRecord>& recs) {
    if (sum.trajectory_lines.empty()) sum.trajectory_lines.push_back(traj_header());
    for (std::size_t r = 0; r < recs.size(); ++r) {
        for (const auto& c : recs[r].checkpoints) {
            std::ostringstream os;
            os << r << ',' << c.n << ',' << c.k << ',' << c.d_max << ',' << c.leader_index << ','
               << c.leader_changes << ',' << fmt_g(c.phi1_dmax);
            sum.trajectory_lines.push_back(os.str());
        }
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// thresholds I/O

void save_thresholds(const Thresholds& t, const std::string& path) {
    nlohmann::json j{
        {"version", t.version},
        {"persistent_change_frac_max", t.persistent_change_frac_max},
        {"nonpersistent_change_frac_min", t.nonpersistent_change_frac_min},
        {"persistence_contrast_min", t.persistence_contrast_min},
        {"fclt_var_lo", t.fclt_var_lo},
        {"fclt_var_hi", t.fclt_var_hi},
        {"fclt_corr_max", t.fclt_corr_max},
        {"fclt_ratio_lo", t.fclt_ratio_lo},
        {"fclt_ratio_hi", t.fclt_ratio_hi},
        {"index_median_reltol", t.index_median_reltol},
        {"unif_dmax_reltol", t.unif_dmax_reltol},
        {"unif_index_lo", t.unif_index_lo},
        {"unif_index_hi", t.unif_index_hi},
        {"tree_maxdeg_reltol", t.tree_maxdeg_reltol},
        {"embedding_tv_max", t.embedding_tv_max},
        {"race_tv_max", t.race_tv_max},
        {"mdp_ratio_lo", t.mdp_ratio_lo},
        {"mdp_ratio_hi", t.mdp_ratio_hi},
        {"iid_light_frac_max", t.iid_light_frac_max},
        {"iid_heavy_frac_min", t.iid_heavy_frac_min},
        {"slowvar_frac_max", t.slowvar_frac_max},
        {"slowvar_contrast_min", t.slowvar_contrast_min},
    };
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write thresholds file " + path);
    out << j.dump(2) << "\n";
}

Thresholds load_thresholds(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read thresholds file " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    Thresholds t;
    auto get = [&](const char* k, double& slot) {
        if (j.contains(k)) slot = j.at(k).get<double>();
    };
    if (j.contains("version")) t.version = j.at("version").get<int>();
    get("persistent_change_frac_max", t.persistent_change_frac_max);
    get("nonpersistent_change_frac_min", t.nonpersistent_change_frac_min);
    get("persistence_contrast_min", t.persistence_contrast_min);
    get("fclt_var_lo", t.fclt_var_lo);
    get("fclt_var_hi", t.fclt_var_hi);
    get("fclt_corr_max", t.fclt_corr_max);
    get("fclt_ratio_lo", t.fclt_ratio_lo);
    get("fclt_ratio_hi", t.fclt_ratio_hi);
    get("index_median_reltol", t.index_median_reltol);
    get("unif_dmax_reltol", t.unif_dmax_reltol);
    get("unif_index_lo", t.unif_index_lo);
    get("unif_index_hi", t.unif_index_hi);
    get("tree_maxdeg_reltol", t.tree_maxdeg_reltol);
    get("embedding_tv_max", t.embedding_tv_max);
    get("race_tv_max", t.race_tv_max);
    get("mdp_ratio_lo", t.mdp_ratio_lo);
    get("mdp_ratio_hi", t.mdp_ratio_hi);
    get("iid_light_frac_max", t.iid_light_frac_max);
    get("iid_heavy_frac_min", t.iid_heavy_frac_min);
    get("slowvar_frac_max", t.slowvar_frac_max);
    get("slowvar_contrast_min", t.slowvar_contrast_min);
    return t;
}

// ---------------------------------------------------------------------------
// persistence scan

RunSummary run_persistence_scan(const std::vector<ModelSpec>& models,
                                std::vector<std::pair<std::int64_t, std::int64_t>> windows,
                                const ExperimentOptions& opt, const Thresholds& th) {
    if (models.empty()) throw ConfigError("persistence_scan requires at least one model");
    if (windows.empty()) windows = {{10'000, 100'000}, {100'000, 1'000'000}};
    std::int64_t reps = opt.replicates > 0 ? opt.replicates : 200;
    RunSummary sum;
    sum.experiment = "persistence_scan";
    sum.master_seed = opt.master_seed;

    std::vector<std::int64_t> cks;
    for (auto [lo, hi] : windows) {
        cks.push_back(lo);
        cks.push_back(hi);
    }
    std::sort(cks.begin(), cks.end());
    cks.erase(std::unique(cks.begin(), cks.end()), cks.end());
    std::int64_t n_max = cks.back();

    struct ModelOut {
        Phi2Class regime;
        std::vector<double> fracs;  // per window
    };
    std::vector<ModelOut> outs;
    for (const auto& model : models) {
        PhiTable cls(model.f, 1 << 14);
        std::string purpose = "persistence_scan/" + model.label;
        GrowOptions gopt;
        gopt.max_vertices = opt.max_vertices;
        gopt.max_edges = opt.max_events;
        auto recs = parallel_map<TrajectoryRecord>(reps, opt.threads, [&](std::int64_t r) {
            RngStream rng = derive_stream(opt.master_seed, std::uint64_t(r), purpose);
            return grow(model.f, model.m, n_max, cks, rng, gopt);
        });
        ModelOut mo;
        mo.regime = cls.phi2_class();
        for (auto [lo, hi] : windows) {
            std::int64_t changed = 0;
            for (const auto& rec : recs)
                if (leader_statistics(rec, lo, hi).changed) ++changed;
            double frac = double(changed) / double(reps);
            mo.fracs.push_back(frac);
            auto [cl, ch] = wilson_ci(changed, reps);
            MetricRow row;
            row.metric = "change_frac[" + model.label + "][" + std::to_string(lo) + "," +
                         std::to_string(hi) + "]";
            row.estimate = frac;
            row.ci_lo = cl;
            row.ci_hi = ch;
            if (mo.regime == Phi2Class::Finite) {
                row.predicted = th.persistent_change_frac_max;
                row.verdict = pass_fail(frac < th.persistent_change_frac_max);
                row.note = "persistent regime expected (Phi2(inf) finite)";
            } else if (mo.regime == Phi2Class::Infinite) {
                row.predicted = th.nonpersistent_change_frac_min;
                row.verdict = pass_fail(frac > th.nonpersistent_change_frac_min);
                row.note = "non-persistent regime expected (Phi2(inf) infinite)";
            } else {
                row.verdict = "info";
                row.note = "regime unknown";
            }
            sum.rows.push_back(row);
        }
        if (opt.trajectories) append_trajectories(sum, recs);
        outs.push_back(std::move(mo));
    }

    // theorem-backed ordering between regimes, on the last window
    for (std::size_t i = 0; i < models.size(); ++i) {
        if (outs[i].regime != Phi2Class::Infinite) continue;
        for (std::size_t j = 0; j < models.size(); ++j) {
            if (outs[j].regime != Phi2Class::Finite) continue;
            double a = outs[i].fracs.back(), b = outs[j].fracs.back();
            MetricRow row;
            row.metric = "contrast[" + models[i].label + "/" + models[j].label + "]";
            row.estimate = b > 0 ? a / b : std::numeric_limits<double>::infinity();
            row.predicted = th.persistence_contrast_min;
            row.verdict = pass_fail(a > 0 && (b == 0 || a / b >= th.persistence_contrast_min));
            sum.rows.push_back(row);
        }
    }
    return sum;
}

// ---------------------------------------------------------------------------
// FCLT diagnostics

RunSummary run_race_fclt(const AttachmentFunction& f, std::vector<std::int64_t> ns,
                         const ExperimentOptions& opt, const Thresholds& th) {
    if (ns.empty()) ns = {50, 200};
    std::int64_t reps = opt.replicates > 0 ? opt.replicates : 10'000;
    RunSummary sum;
    sum.experiment = "race_fclt";
    sum.master_seed = opt.master_seed;

    const std::vector<double> tgrid = {0.25, 0.5, 1.0};
    std::int64_t n_hi = *std::max_element(ns.begin(), ns.end());
    PhiTable table = table_covering_phi2(f, double(n_hi) * tgrid.back() + 2.0);

    for (std::int64_t n : ns) {
        std::vector<double> cks;
        for (double t : tgrid) cks.push_back(table.K_inv(double(n) * t));
        std::string purpose = "race_fclt/n=" + std::to_string(n);
        struct Sample {
            double b25, b50, b100;
        };
        auto samples = parallel_map<Sample>(reps, opt.threads, [&](std::int64_t r) {
            RngStream rng = derive_stream(opt.master_seed, std::uint64_t(r), purpose);
            auto p1 = martingale_path(f, 0, cks, rng, opt.max_events);
            auto p2 = martingale_path(f, 0, cks, rng, opt.max_events);
            double scale = 1.0 / std::sqrt(2.0 * double(n));
            return Sample{(p1.m[0] - p2.m[0]) * scale, (p1.m[1] - p2.m[1]) * scale,
                          (p1.m[2] - p2.m[2]) * scale};
        });
        std::vector<double> b25, b50, b100, inc1, inc2;
        for (const auto& s : samples) {
            b25.push_back(s.b25);
            b50.push_back(s.b50);
            b100.push_back(s.b100);
            inc1.push_back(s.b50 - s.b25);
            inc2.push_back(s.b100 - s.b50);
        }
        double v1 = variance(b100);
        double vr = variance(b50) / v1;
        double mu = mean(b100);
        double sd = std::sqrt(v1 / double(reps));
        double rho = correlation(inc1, inc2);
        std::string tag = "[n=" + std::to_string(n) + "]";
        double vsd = v1 * std::sqrt(2.0 / double(reps - 1));
        sum.rows.push_back({"fclt_var_B1" + tag, v1, v1 - kZ95 * vsd, v1 + kZ95 * vsd, 1.0,
                            pass_fail(v1 >= th.fclt_var_lo && v1 <= th.fclt_var_hi), ""});
        sum.rows.push_back({"fclt_mean_B1" + tag, mu, mu - 3 * sd, mu + 3 * sd, 0.0,
                            pass_fail(std::abs(mu) <= 3 * sd), "within 3 sigma of 0"});
        sum.rows.push_back({"fclt_var_ratio" + tag, vr, std::numeric_limits<double>::quiet_NaN(),
                            std::numeric_limits<double>::quiet_NaN(), 0.5,
                            pass_fail(vr >= th.fclt_ratio_lo && vr <= th.fclt_ratio_hi),
                            "Var(B(0.5))/Var(B(1))"});
        sum.rows.push_back({"fclt_incr_corr" + tag, rho, std::numeric_limits<double>::quiet_NaN(),
                            std::numeric_limits<double>::quiet_NaN(), 0.0,
                            pass_fail(std::abs(rho) < th.fclt_corr_max),
                            "corr of disjoint increments"});
    }
    return sum;
}

// ---------------------------------------------------------------------------
// index asymptotics

RunSummary run_index_asymptotics(const AttachmentFunction& f, std::vector<std::int64_t> ns,
                                 const ExperimentOptions& opt, const Thresholds& th) {
    if (ns.empty()) ns = {10'000, 100'000, 1'000'000};
    std::sort(ns.begin(), ns.end());
    std::int64_t reps = opt.replicates > 0 ? opt.replicates : 200;
    RunSummary sum;
    sum.experiment = "index_asymptotics";
    sum.master_seed = opt.master_seed;

    if (f.is_constant_one()) {
        sum.rows.push_back({"index_asymptotics[f==1]", std::numeric_limits<double>::quiet_NaN(),
                            std::numeric_limits<double>::quiet_NaN(),
                            std::numeric_limits<double>::quiet_NaN(),
                            std::numeric_limits<double>::quiet_NaN(), "inapplicable",
                            "uniform attachment: the K-based index asymptotics do not apply"});
        return sum;
    }

    auto lambda = solve_lambda_star(f, 1e-10);
    if (!lambda.found) throw ModelError("index_asymptotics: " + lambda.note);
    PhiTable table(f, 1 << 14);
    if (table.phi2_class() == Phi2Class::Finite)
        throw ConfigError("index_asymptotics requires the non-persistent regime (C1)");
    double ls = lambda.lambda_star;

    GrowOptions gopt;
    gopt.max_vertices = opt.max_vertices;
    gopt.max_edges = opt.max_events;
    gopt.phi = &table;
    auto seq = AttachmentSequence::constant(1);
    auto recs = parallel_map<TrajectoryRecord>(reps, opt.threads, [&](std::int64_t r) {
        RngStream rng = derive_stream(opt.master_seed, std::uint64_t(r), "index_asymptotics");
        return grow(f, seq, ns.back(), ns, rng, gopt);
    });
    if (opt.trajectories) append_trajectories(sum, recs);

    double pred1 = 0.5 * ls * ls;
    double pred2 = 0.5 * ls;
    std::vector<double> med1s, med2s, medI;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        double kn = table.K(std::log(double(ns[i])) / ls);
        std::vector<double> s1, s2, istars;
        for (const auto& rec : recs) {
            const auto& c = rec.checkpoints[i];
            s1.push_back(std::log(double(std::max<std::int64_t>(c.leader_index, 1))) / kn);
            s2.push_back((c.phi1_dmax - std::log(double(ns[i])) / ls) / kn);
            istars.push_back(double(c.leader_index));
        }
        double m1 = median(s1), m2 = median(s2);
        auto ci1 = median_ci95(s1);
        auto ci2 = median_ci95(s2);
        med1s.push_back(m1);
        med2s.push_back(m2);
        medI.push_back(median(istars));
        std::string tag = "[n=" + std::to_string(ns[i]) + "]";
        bool last = i + 1 == ns.size();
        sum.rows.push_back({"index_median_logI_over_K" + tag, m1, ci1.first, ci1.second, pred1,
                            last ? pass_fail(std::abs(m1 - pred1) <= th.index_median_reltol * pred1)
                                 : std::string("info"),
                            "target lambda*^2/2"});
        sum.rows.push_back({"maxdeg_median_centered" + tag, m2, ci2.first, ci2.second, pred2,
                            last ? pass_fail(std::abs(m2 - pred2) <= th.index_median_reltol * pred2)
                                 : std::string("info"),
                            "target lambda*/2"});
    }
    auto trend_ok = [](const std::vector<double>& meds, double target) {
        for (std::size_t i = 1; i < meds.size(); ++i)
            if (std::abs(meds[i] - target) >= std::abs(meds[i - 1] - target)) return false;
        return true;
    };
    sum.rows.push_back({"index_trend_toward_limit", trend_ok(med1s, pred1) ? 1.0 : 0.0,
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(), 1.0,
                        pass_fail(trend_ok(med1s, pred1)), "deviation shrinks at each n step"});
    sum.rows.push_back({"maxdeg_trend_toward_limit", trend_ok(med2s, pred2) ? 1.0 : 0.0,
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(), 1.0,
                        pass_fail(trend_ok(med2s, pred2)), ""});
    sum.rows.push_back({"hub_index_diverges", medI.back(), std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(), medI.front(),
                        pass_fail(medI.back() > medI.front()),
                        "median I* at largest n exceeds median at smallest n"});
    return sum;
}

// ---------------------------------------------------------------------------
// uniform tree

RunSummary run_uniform_tree(std::int64_t n_small, std::int64_t n_big,
                            const ExperimentOptions& opt, const Thresholds& th) {
    if (n_small < 2 || n_big <= n_small) throw ConfigError("uniform_tree requires 2 <= n_small < n_big");
    std::int64_t reps = opt.replicates > 0 ? opt.replicates : 200;
    RunSummary sum;
    sum.experiment = "uniform_tree";
    sum.master_seed = opt.master_seed;

    auto f = AttachmentFunction::constant(1);
    auto seq = AttachmentSequence::constant(1);
    std::vector<std::int64_t> cks = {1, n_small, n_big};
    GrowOptions gopt;
    gopt.max_vertices = opt.max_vertices;
    gopt.max_edges = opt.max_events;
    auto recs = parallel_map<TrajectoryRecord>(reps, opt.threads, [&](std::int64_t r) {
        RngStream rng = derive_stream(opt.master_seed, std::uint64_t(r), "uniform_tree");
        return grow(f, seq, n_big, cks, rng, gopt);
    });
    if (opt.trajectories) append_trajectories(sum, recs);

    auto consts = uniform_tree_constants();
    bool forced = true;
    std::vector<double> dmax_ratio, li_small, li_big;
    for (const auto& rec : recs) {
        forced = forced && rec.checkpoints[0].leader_index == 0;
        li_small.push_back(std::log(double(std::max<std::int64_t>(rec.checkpoints[1].leader_index, 1))) /
                           std::log(double(n_small)));
        li_big.push_back(std::log(double(std::max<std::int64_t>(rec.checkpoints[2].leader_index, 1))) /
                         std::log(double(n_big)));
        dmax_ratio.push_back(double(rec.checkpoints[2].d_max) / std::log(double(n_big)));
    }
    sum.rows.push_back({"forced_root_leader_at_n1", forced ? 1.0 : 0.0,
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(), 1.0, pass_fail(forced),
                        "two-vertex tree: the root is always the oldest maximal vertex"});
    double md = median(dmax_ratio);
    auto mdci = median_ci95(dmax_ratio);
    double target_d = consts.max_slope;  // 1/ln 2
    sum.rows.push_back({"unif_median_dmax_over_logn", md, mdci.first, mdci.second, target_d,
                        pass_fail(std::abs(md - target_d) <= th.unif_dmax_reltol * target_d),
                        "target 1/ln2"});
    double mi_b = median(li_big), mi_s = median(li_small);
    auto mici = median_ci95(li_big);
    bool in_window = mi_b >= th.unif_index_lo && mi_b <= th.unif_index_hi;
    bool closer = std::abs(mi_b - consts.u_hat) < std::abs(mi_s - consts.u_hat);
    sum.rows.push_back({"unif_median_logI_over_logn", mi_b, mici.first, mici.second, consts.u_hat,
                        pass_fail(in_window), "window [0.15, 0.45] around 1 - 1/(2 ln 2)"});
    sum.rows.push_back({"unif_index_ratio_converging", std::abs(mi_b - consts.u_hat),
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(), std::abs(mi_s - consts.u_hat),
                        pass_fail(closer), "deviation at n_big below deviation at n_small"});
    return sum;
}

// ---------------------------------------------------------------------------
// iid tails

RunSummary run_iid_tails(const AttachmentFunction& f,
                         std::pair<std::int64_t, std::int64_t> window,
                         const ExperimentOptions& opt, const Thresholds& th) {
    std::int64_t reps = opt.replicates > 0 ? opt.replicates : 100;
    RunSummary sum;
    sum.experiment = "iid_tails";
    sum.master_seed = opt.master_seed;
    PhiTable cls(f, 1 << 14);
    if (cls.phi2_class() != Phi2Class::Finite)
        throw ConfigError("iid_tails requires Phi2(inf) < inf (e.g. f(k)=(k+1)^0.8)");

    struct Arm {
        AttachmentSequence m;
        std::string label;
        bool heavy;
    };
    std::vector<Arm> arms = {
        {AttachmentSequence::iid_geometric(0.5), "geometric(0.5)", false},
        {AttachmentSequence::iid_zipf(2.2, 1'000'000), "zipf(2.2)", true},
        {AttachmentSequence::iid_point_mass(3), "point_mass(3)", false},
    };
    std::vector<std::int64_t> cks = {window.first, window.second};
    double light_frac = -1, heavy_frac = -1;
    GrowOptions gopt;
    gopt.max_vertices = opt.max_vertices;
    gopt.max_edges = opt.max_events;
    for (const auto& arm : arms) {
        auto recs = parallel_map<TrajectoryRecord>(reps, opt.threads, [&](std::int64_t r) {
            RngStream rng = derive_stream(opt.master_seed, std::uint64_t(r), "iid_tails/" + arm.label);
            return grow(f, arm.m, window.second, cks, rng, gopt);
        });
        std::int64_t changed = 0;
        for (const auto& rec : recs)
            if (leader_statistics(rec, window.first, window.second).changed) ++changed;
        double frac = double(changed) / double(reps);
        auto [cl, ch] = wilson_ci(changed, reps);
        MetricRow row;
        row.metric = "change_frac[" + arm.label + "]";
        row.estimate = frac;
        row.ci_lo = cl;
        row.ci_hi = ch;
        row.predicted = arm.heavy ? th.iid_heavy_frac_min : th.iid_light_frac_max;
        row.verdict = pass_fail(arm.heavy ? frac > th.iid_heavy_frac_min
                                          : frac < th.iid_light_frac_max);
        row.note = arm.heavy ? "heavy Phi1(m) tail: persistence should fail"
                             : "light Phi1(m) tail: hub should persist";
        sum.rows.push_back(row);
        if (arm.label.rfind("geometric", 0) == 0) light_frac = frac;
        if (arm.heavy) heavy_frac = frac;
    }
    sum.rows.push_back({"iid_ordering_heavy_over_light",
                        light_frac > 0 ? heavy_frac / light_frac
                                       : std::numeric_limits<double>::infinity(),
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(), 1.0,
                        pass_fail(heavy_frac > light_frac), "theorem-backed ordering"});
    return sum;
}

// ---------------------------------------------------------------------------
// slowly varying m_n

RunSummary run_slowvar(double alpha, double nu, std::int64_t n_max,
                       const ExperimentOptions& opt, const Thresholds& th) {
    std::int64_t reps = opt.replicates > 0 ? opt.replicates : 40;
    RunSummary sum;
    sum.experiment = "slowvar";
    sum.master_seed = opt.master_seed;
    auto f = AttachmentFunction::power(alpha);
    PhiTable cls(f, 1 << 14);
    if (cls.phi2_class() != Phi2Class::Finite)
        throw ConfigError("slowvar requires alpha in (1/2, 1)");
    auto seq = AttachmentSequence::log_power(nu);

    // m_n column checks are deterministic
    bool formula_ok = true, nondecreasing = true;
    std::int64_t prev = 0;
    DD total_m;
    for (std::int64_t n = 1; n <= n_max; ++n) {
        std::int64_t m = seq.deterministic_value(n);
        auto expect = static_cast<std::int64_t>(
            std::floor(1.0 + std::pow(std::log(double(n)), nu)));
        formula_ok = formula_ok && m == expect;
        nondecreasing = nondecreasing && m >= prev;
        prev = m;
        total_m.add(double(m));
    }
    double mean_m = total_m.value() / double(n_max);
    sum.rows.push_back({"m_n_formula_exact", formula_ok ? 1.0 : 0.0,
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(), 1.0, pass_fail(formula_ok),
                        "floor(1 + (log n)^nu)"});
    sum.rows.push_back({"m_n_nondecreasing", nondecreasing ? 1.0 : 0.0,
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(), 1.0, pass_fail(nondecreasing), ""});

    std::int64_t w_lo = std::max<std::int64_t>(n_max / 10, 2);
    std::vector<std::int64_t> cks = {w_lo, n_max};
    GrowOptions gopt;
    gopt.max_vertices = opt.max_vertices;
    gopt.max_edges = opt.max_events;
    auto frac_for = [&](const AttachmentSequence& m, const std::string& label) {
        auto recs = parallel_map<TrajectoryRecord>(reps, opt.threads, [&](std::int64_t r) {
            RngStream rng = derive_stream(opt.master_seed, std::uint64_t(r), "slowvar/" + label);
            return grow(f, m, n_max, cks, rng, gopt);
        });
        std::int64_t changed = 0;
        for (const auto& rec : recs)
            if (leader_statistics(rec, w_lo, n_max).changed) ++changed;
        return std::pair<double, std::int64_t>{double(changed) / double(reps), changed};
    };
    auto [frac_slow, ch_slow] = frac_for(seq, "logpower");
    auto [cl, chh] = wilson_ci(ch_slow, reps);
    sum.rows.push_back({"slowvar_change_frac", frac_slow, cl, chh, th.slowvar_frac_max,
                        pass_fail(frac_slow < th.slowvar_frac_max),
                        "persistent despite growing m_n"});

    // heavy-tail i.i.d. contrast at (approximately) matched mean edge count
    double lo_s = 1.05, hi_s = 3.0;
    for (int it = 0; it < 40; ++it) {
        double mid = 0.5 * (lo_s + hi_s);
        if (AttachmentSequence::iid_zipf(mid, 100'000).mean() > mean_m)
            lo_s = mid;
        else
            hi_s = mid;
    }
    auto heavy = AttachmentSequence::iid_zipf(0.5 * (lo_s + hi_s), 100'000);
    auto [frac_heavy, ch_heavy] = frac_for(heavy, "zipf_matched");
    (void)ch_heavy;
    MetricRow row;
    row.metric = "slowvar_contrast_vs_heavy";
    row.estimate = frac_slow > 0 ? frac_heavy / frac_slow : std::numeric_limits<double>::infinity();
    row.predicted = th.slowvar_contrast_min;
    row.verdict = pass_fail(frac_heavy > 0 &&
                            (frac_slow == 0 || frac_heavy / frac_slow >= th.slowvar_contrast_min));
    row.note = "matched mean m ~ " + fmt_g(mean_m) + " via " + heavy.describe();
    sum.rows.push_back(row);
    return sum;
}

// ---------------------------------------------------------------------------
// tree max degree (linear PA)

RunSummary run_tree_maxdeg(std::int64_t n_base, const ExperimentOptions& opt,
                           const Thresholds& th) {
    std::int64_t reps = opt.replicates > 0 ? opt.replicates : 200;
    RunSummary sum;
    sum.experiment = "tree_maxdeg";
    sum.master_seed = opt.master_seed;
    auto f = AttachmentFunction::affine(1);
    auto seq = AttachmentSequence::constant(1);
    std::vector<std::int64_t> cks = {n_base, 4 * n_base};
    GrowOptions gopt;
    gopt.max_vertices = opt.max_vertices;
    gopt.max_edges = opt.max_events;
    auto recs = parallel_map<TrajectoryRecord>(reps, opt.threads, [&](std::int64_t r) {
        RngStream rng = derive_stream(opt.master_seed, std::uint64_t(r), "tree_maxdeg");
        return grow(f, seq, 4 * n_base, cks, rng, gopt);
    });
    if (opt.trajectories) append_trajectories(sum, recs);
    std::vector<double> ratios;
    for (const auto& rec : recs)
        ratios.push_back(double(rec.checkpoints[1].d_max) / double(rec.checkpoints[0].d_max));
    double m = median(ratios);
    auto ci = median_ci95(ratios);
    double target = std::pow(4.0, 1.0 / 3.0);
    sum.rows.push_back({"tree_maxdeg_ratio_4n_over_n", m, ci.first, ci.second, target,
                        pass_fail(std::abs(m - target) <= th.tree_maxdeg_reltol * target),
                        "per-trajectory d_max(4n)/d_max(n), exponent 1/(2+alpha)"});
    return sum;
}

// ---------------------------------------------------------------------------
// tail bounds

RunSummary run_tail_bounds(const ExperimentOptions& opt, const Thresholds& th) {
    (void)th;
    std::int64_t reps = opt.replicates > 0 ? opt.replicates : 100'000;
    RunSummary sum;
    sum.experiment = "tail_bounds";
    sum.master_seed = opt.master_seed;
    auto f = AttachmentFunction::power(0.3);
    PhiTable table(f, 1 << 12);
    struct Case {
        double x, t, s;
    };
    for (const Case& c : {Case{0.5, 50, 50}, Case{1, 50, 50}, Case{1, 50, 25}}) {
        auto r = tail_bound_check(f, table, c.x, c.t, c.s, reps, opt.master_seed, {}, opt.threads);
        MetricRow row;
        row.metric = "tail_bound[x=" + fmt_g(c.x) + ",t=" + fmt_g(c.t) + ",s=" + fmt_g(c.s) + "]";
        row.estimate = r.wilson_upper99;
        row.ci_lo = r.empirical;
        row.ci_hi = r.wilson_upper99;
        row.predicted = r.analytic_general;
        row.verdict = pass_fail(r.wilson_upper99 <= r.analytic_general);
        row.note = "Wilson 99% upper limit vs analytic bound";
        sum.rows.push_back(row);
    }
    return sum;
}

// ---------------------------------------------------------------------------
// MDP rates

RunSummary run_mdp_rates(const ExperimentOptions& opt, const Thresholds& th) {
    RunSummary sum;
    sum.experiment = "mdp_rates";
    sum.master_seed = opt.master_seed;
    auto f = AttachmentFunction::power(0.3);
    PhiTable table(f, 512);
    const double x = 0.5;
    std::vector<std::int64_t> ns = {50, 100, 200};
    std::vector<double> ratios;
    for (std::int64_t n : ns) {
        auto c = mdp_rate_check(f, table, n, x);
        ratios.push_back(c.ratio);
        sum.rows.push_back({"mdp_ratio[n=" + std::to_string(n) + "]", c.ratio,
                            std::numeric_limits<double>::quiet_NaN(),
                            std::numeric_limits<double>::quiet_NaN(), 1.0, "info",
                            "exact " + fmt_g(c.exact_logprob) + " vs predicted " +
                                fmt_g(c.predicted)});
    }
    bool monotone = true;
    for (std::size_t i = 1; i < ratios.size(); ++i)
        monotone = monotone && std::abs(ratios[i] - 1.0) < std::abs(ratios[i - 1] - 1.0);
    sum.rows.push_back({"mdp_trend_toward_1", monotone ? 1.0 : 0.0,
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(), 1.0, pass_fail(monotone), ""});
    bool window = ratios.back() >= th.mdp_ratio_lo && ratios.back() <= th.mdp_ratio_hi;
    sum.rows.push_back({"mdp_final_ratio_window", ratios.back(),
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(), 1.0, pass_fail(window),
                        "window [" + fmt_g(th.mdp_ratio_lo) + "," + fmt_g(th.mdp_ratio_hi) + "]"});
    return sum;
}

// ---------------------------------------------------------------------------
// embedding equivalence + race law

RunSummary run_embedding_equivalence(std::int64_t n_embed, const ExperimentOptions& opt,
                                     const Thresholds& th) {
    std::int64_t reps = opt.replicates > 0 ? opt.replicates : 100'000;
    RunSummary sum;
    sum.experiment = "embedding_equivalence";
    sum.master_seed = opt.master_seed;
    auto f = AttachmentFunction::affine(1);
    auto seq = AttachmentSequence::constant(1);

    auto key = [](std::int64_t root, std::int64_t dmax) { return root * 4096 + dmax; };

    auto disc = parallel_map<std::int64_t>(reps, opt.threads, [&](std::int64_t r) {
        RngStream rng = derive_stream(opt.master_seed, std::uint64_t(r), "embedding/discrete");
        GrowthState st(f, n_embed + 1);
        for (std::int64_t n = 1; n <= n_embed; ++n) st.add_vertex(1, rng);
        return key(st.degree(0), st.d_max());
    });
    auto cont = parallel_map<std::int64_t>(reps, opt.threads, [&](std::int64_t r) {
        RngStream rng = derive_stream(opt.master_seed, std::uint64_t(r), "embedding/ctbp");
        auto traj = run_ctbp(f, CtbpStop::at_size(n_embed), rng);
        auto st = ctbp_tree_stats(traj);
        return key(st.root_degree, st.d_max);
    });
    std::map<std::int64_t, std::int64_t> ca, cb;
    for (auto k : disc) ++ca[k];
    for (auto k : cont) ++cb[k];
    RngStream boot = derive_stream(opt.master_seed, 0, "embedding/bootstrap");
    auto tv = tv_debiased(ca, cb, reps, reps, 24, boot);
    sum.rows.push_back({"embedding_tv[n=" + std::to_string(n_embed) + "]", tv.debiased, 0,
                        tv.plug_in, th.embedding_tv_max, pass_fail(tv.debiased < th.embedding_tv_max),
                        "plug-in " + fmt_g(tv.plug_in) + ", null bias " + fmt_g(tv.null_bias)});

    // race law over 10-step paths from (1,1)
    auto path_key = [](const RaceResult& r) {
        std::int64_t code = 0;
        for (std::size_t j = 1; j < r.path.size(); ++j) {
            bool one = r.path[j].first > r.path[j - 1].first;
            code = code * 2 + (one ? 1 : 0);
        }
        return code;
    };
    auto chain = parallel_map<std::int64_t>(reps, opt.threads, [&](std::int64_t r) {
        RngStream rng = derive_stream(opt.master_seed, std::uint64_t(r), "race/chain");
        return path_key(race(f, 1, 1, 10, rng));
    });
    auto clocks = parallel_map<std::int64_t>(reps, opt.threads, [&](std::int64_t r) {
        RngStream rng = derive_stream(opt.master_seed, std::uint64_t(r), "race/clocks");
        return path_key(race_via_clocks(f, 1, 1, 10, rng));
    });
    std::map<std::int64_t, std::int64_t> ra, rb;
    for (auto k : chain) ++ra[k];
    for (auto k : clocks) ++rb[k];
    RngStream boot2 = derive_stream(opt.master_seed, 1, "race/bootstrap");
    auto tv2 = tv_debiased(ra, rb, reps, reps, 24, boot2);
    sum.rows.push_back({"race_law_tv[steps=10]", tv2.debiased, 0, tv2.plug_in, th.race_tv_max,
                        pass_fail(tv2.debiased < th.race_tv_max),
                        "plug-in " + fmt_g(tv2.plug_in) + ", null bias " + fmt_g(tv2.null_bias)});
    return sum;
}

// ---------------------------------------------------------------------------
// calibrate

Thresholds calibrate(const ExperimentOptions& opt) {
    Thresholds th;  // start from the pinned defaults; orderings stay fixed
    ExperimentOptions pilot = opt;
    pilot.replicates = 20;

    auto frac_from = [](const RunSummary& sum, const std::string& prefix) {
        for (const auto& row : sum.rows)
            if (row.metric.rfind(prefix, 0) == 0) return row.estimate;
        return 0.0;
    };

    // persistence fractions, piloted on a smaller window ladder
    std::vector<ModelSpec> models = {
        {AttachmentFunction::power(0.3), AttachmentSequence::constant(1), "power03"},
        {AttachmentFunction::affine(1), AttachmentSequence::constant(1), "linear"},
    };
    auto scan = run_persistence_scan(models, {{10'000, 100'000}}, pilot, th);
    double frac_non = frac_from(scan, "change_frac[power03]");
    double frac_per = frac_from(scan, "change_frac[linear]");
    th.persistent_change_frac_max = std::clamp(1.5 * frac_per + 0.05, 0.05, 0.5);
    th.nonpersistent_change_frac_min = std::clamp(0.6 * frac_non, 0.25, 0.6);
    th.persistence_contrast_min =
        frac_per > 0 ? std::clamp(0.6 * frac_non / frac_per, 1.5, 5.0) : 1.5;

    // i.i.d. tail fractions at the default window
    auto iid = run_iid_tails(AttachmentFunction::power(0.8), {10'000, 100'000}, pilot, th);
    double light = frac_from(iid, "change_frac[geometric");
    double heavy = frac_from(iid, "change_frac[zipf");
    th.iid_light_frac_max = std::clamp(1.5 * light + 0.05, 0.1, 0.6);
    th.iid_heavy_frac_min = std::clamp(0.6 * heavy, 0.3, 0.7);

    // slowly varying m_n
    auto slow = run_slowvar(0.7, 2.0, 30'000, pilot, th);
    double sv = frac_from(slow, "slowvar_change_frac");
    th.slowvar_frac_max = std::clamp(1.5 * sv + 0.05, 0.1, 0.6);
    return th;
}

}  // namespace hubsim
