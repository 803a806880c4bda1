#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hubsim/config.hpp"
#include "hubsim/ctbp.hpp"
#include "hubsim/errors.hpp"
#include "hubsim/experiments.hpp"
#include "hubsim/graphsim.hpp"
#include "hubsim/malthusian.hpp"
#include "hubsim/phi.hpp"
#include "hubsim/pointproc.hpp"
#include "hubsim/rng.hpp"
#include "hubsim/version.hpp"

namespace py = pybind11;
using namespace hubsim;

namespace {

py::dict summary_to_dict(const RunSummary& s) {
    py::list rows;
    for (const auto& r : s.rows) {
        py::dict d;
        d["metric"] = r.metric;
        d["estimate"] = r.estimate;
        d["ci_lo"] = r.ci_lo;
        d["ci_hi"] = r.ci_hi;
        d["predicted"] = r.predicted;
        d["verdict"] = r.verdict;
        d["note"] = r.note;
        rows.append(d);
    }
    py::dict out;
    out["experiment"] = s.experiment;
    out["master_seed"] = s.master_seed;
    out["rows"] = rows;
    out["all_pass"] = s.all_pass();
    return out;
}

}  // namespace

PYBIND11_MODULE(_hubsim, m) {
    m.doc() = "Generalized preferential attachment growth, persistent hubs, and the "
              "surrounding numerics";
    m.attr("__version__") = kHubsimVersion;
    m.attr("generator_id") = std::string(kGeneratorId);

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<ModelError>(m, "ModelError");
    py::register_exception<TableRangeError>(m, "TableRangeError");
    py::register_exception<ResourceError>(m, "ResourceError");

    py::class_<RngStream>(m, "RngStream")
        .def(py::init<std::uint64_t>())
        .def("u01", &RngStream::u01)
        .def("exponential", &RngStream::exponential)
        .def("seed", &RngStream::seed);
    m.def("derive_stream_seed", &derive_stream_seed, py::arg("master"), py::arg("replicate"),
          py::arg("purpose"));

    py::class_<AttachmentFunction>(m, "AttachmentFunction")
        .def_static("constant", &AttachmentFunction::constant)
        .def_static("affine", &AttachmentFunction::affine)
        .def_static("power", &AttachmentFunction::power)
        .def_static("table",
                    [](std::vector<double> v, bool hold_last) {
                        return AttachmentFunction::table(
                            std::move(v), hold_last ? TableTail::HoldLast : TableTail::Error);
                    },
                    py::arg("values"), py::arg("hold_last") = true)
        .def_static("product", &AttachmentFunction::product)
        .def_static("sum", &AttachmentFunction::sum)
        .def("__call__", &AttachmentFunction::operator())
        .def("at_real", &AttachmentFunction::at_real)
        .def("f_star", &AttachmentFunction::f_star, py::arg("probe_horizon") = 1 << 14)
        .def("describe", &AttachmentFunction::describe)
        .def("declare_monotone",
             [](AttachmentFunction& f, bool m) { f.declare_monotone(m); })
        .def("declare_linear_bound",
             [](AttachmentFunction& f, double cf) { f.declare_linear_bound(cf); });

    py::class_<AttachmentSequence>(m, "AttachmentSequence")
        .def_static("constant", &AttachmentSequence::constant)
        .def_static("iid_geometric", &AttachmentSequence::iid_geometric)
        .def_static("iid_zipf", &AttachmentSequence::iid_zipf)
        .def_static("iid_point_mass", &AttachmentSequence::iid_point_mass)
        .def_static("log_power", &AttachmentSequence::log_power)
        .def("draw", &AttachmentSequence::draw)
        .def("mean", &AttachmentSequence::mean)
        .def("describe", &AttachmentSequence::describe);

    py::enum_<Phi2Class>(m, "Phi2Class")
        .value("Finite", Phi2Class::Finite)
        .value("Infinite", Phi2Class::Infinite)
        .value("Unknown", Phi2Class::Unknown);

    py::class_<PhiTable>(m, "PhiTable")
        .def(py::init<AttachmentFunction, std::int64_t>(), py::arg("fun"), py::arg("horizon"))
        .def("phi1", &PhiTable::phi1)
        .def("phi2", &PhiTable::phi2)
        .def("phi3", &PhiTable::phi3)
        .def("phi1_at", &PhiTable::phi1_at)
        .def("phi2_at", &PhiTable::phi2_at)
        .def("phi1_inv", &PhiTable::phi1_inv)
        .def("K", &PhiTable::K)
        .def("K_inv", &PhiTable::K_inv)
        .def("horizon", &PhiTable::horizon)
        .def("phi2_class", &PhiTable::phi2_class)
        .def("phi2_infinity", &PhiTable::phi2_infinity)
        .def("phi2_tail_bound", &PhiTable::phi2_tail_bound);

    m.def("rho_hat",
          [](const AttachmentFunction& f, double lambda, double tol) {
              auto r = rho_hat(f, lambda, tol);
              py::dict d;
              d["value"] = r.value;
              d["tail_bound"] = r.tail_bound;
              d["diverged"] = r.diverged;
              d["converged"] = r.converged;
              d["terms"] = r.terms;
              return d;
          },
          py::arg("fun"), py::arg("lam"), py::arg("tol") = 1e-10);

    m.def("solve_lambda_star",
          [](const AttachmentFunction& f, double tol) {
              auto r = solve_lambda_star(f, tol);
              py::dict d;
              d["found"] = r.found;
              d["lambda_star"] = r.lambda_star;
              d["bracket"] = py::make_tuple(r.lo, r.hi);
              d["rho_at_bracket"] = py::make_tuple(r.rho_at_lo, r.rho_at_hi);
              d["truncation_k"] = r.truncation_k;
              d["tail_bound"] = r.tail_bound;
              d["note"] = r.note;
              return d;
          },
          py::arg("fun"), py::arg("tol") = 1e-10);

    m.def("uniform_tree_constants", [] {
        auto c = uniform_tree_constants();
        return py::make_tuple(c.u_hat, c.max_slope);
    });

    m.def("check_assumptions",
          [](const AttachmentFunction& f, const PhiTable& t) {
              auto rep = check_assumptions(f, t);
              auto tri = [](TriState s) {
                  return s == TriState::True ? "true" : s == TriState::False ? "false" : "unknown";
              };
              py::dict d;
              d["c1"] = tri(rep.c1);
              d["c2_verdict"] = rep.c2_verdict;
              d["c3_estimate"] = rep.c3_estimate;
              d["prop_under_lamb"] = tri(rep.prop_under_lamb);
              d["underline_lambda"] = rep.underline_lambda;
              d["d_bar"] = rep.d_bar;
              return d;
          });

    m.def("simulate_xi",
          [](const AttachmentFunction& f, std::int64_t A, double t_end, std::uint64_t seed) {
              RngStream rng(seed);
              return simulate_xi(f, A, t_end, rng).event_times;
          },
          py::arg("fun"), py::arg("A"), py::arg("t_end"), py::arg("seed"));

    m.def("martingale_path",
          [](const AttachmentFunction& f, std::int64_t A, std::vector<double> checkpoints,
             std::uint64_t seed) {
              RngStream rng(seed);
              auto p = martingale_path(f, A, checkpoints, rng);
              py::dict d;
              d["times"] = p.times;
              d["m"] = p.m;
              d["qv"] = p.qv;
              d["counts"] = p.counts;
              return d;
          },
          py::arg("fun"), py::arg("A"), py::arg("checkpoints"), py::arg("seed"));

    m.def("hypoexp_cdf",
          [](std::vector<double> rates, double t) { return hypoexp_cdf(std::move(rates), t).cdf; },
          py::arg("rates"), py::arg("t"));

    m.def("forward_equations",
          [](const AttachmentFunction& f, const PhiTable& table, double t_end,
             std::int64_t state_cap) {
              auto sol = forward_equations(f, table, t_end, state_cap);
              py::dict d;
              d["states"] = sol.states;
              d["p"] = sol.p;
              d["tail_mass"] = sol.tail_mass;
              d["max_ac3_violation"] = sol.max_ac3_violation;
              return d;
          },
          py::arg("fun"), py::arg("table"), py::arg("t_end"), py::arg("state_cap"));

    m.def("mdp_rate_check",
          [](const AttachmentFunction& f, const PhiTable& table, std::int64_t n, double x) {
              auto c = mdp_rate_check(f, table, n, x);
              py::dict d;
              d["exact_logprob"] = c.exact_logprob;
              d["predicted"] = c.predicted;
              d["ratio"] = c.ratio;
              d["applicable"] = c.applicable;
              return d;
          });

    m.def("grow",
          [](const AttachmentFunction& f, const AttachmentSequence& seq, std::int64_t n_max,
             std::vector<std::int64_t> checkpoints, std::uint64_t master_seed,
             std::uint64_t replicate) {
              RngStream rng = derive_stream(master_seed, replicate, "python/grow");
              auto rec = grow(f, seq, n_max, checkpoints, rng);
              py::list out;
              for (const auto& c : rec.checkpoints) {
                  py::dict d;
                  d["n"] = c.n;
                  d["k"] = c.k;
                  d["d_max"] = c.d_max;
                  d["leader_index"] = c.leader_index;
                  d["leader_changes"] = c.leader_changes;
                  d["root_degree"] = c.root_degree;
                  out.append(d);
              }
              return out;
          },
          py::arg("fun"), py::arg("seq"), py::arg("n_max"), py::arg("checkpoints"),
          py::arg("master_seed"), py::arg("replicate") = 0);

    m.def("race",
          [](const AttachmentFunction& f, std::int64_t a, std::int64_t b, std::int64_t steps,
             std::uint64_t seed) {
              RngStream rng(seed);
              auto r = race(f, a, b, steps, rng);
              py::dict d;
              d["path"] = r.path;
              d["lead_changes"] = r.lead_changes;
              d["tie_visits"] = r.tie_visits;
              return d;
          });

    m.def("run_ctbp",
          [](const AttachmentFunction& f, std::int64_t size, std::uint64_t seed) {
              RngStream rng(seed);
              auto traj = run_ctbp(f, CtbpStop::at_size(size), rng);
              auto st = ctbp_tree_stats(traj);
              py::dict d;
              d["size"] = traj.size();
              d["end_time"] = traj.end_time;
              d["root_degree"] = st.root_degree;
              d["d_max"] = st.d_max;
              d["leader_index"] = st.leader_index;
              d["birth_times"] = traj.birth_time;
              return d;
          },
          py::arg("fun"), py::arg("size"), py::arg("seed"));

    m.def("run_experiment",
          [](const std::string& name, std::int64_t replicates, std::uint64_t master_seed,
             int threads) {
              Thresholds th;
              ExperimentOptions opt;
              opt.replicates = replicates;
              opt.master_seed = master_seed;
              opt.threads = threads;
              if (name == "tail_bounds") return summary_to_dict(run_tail_bounds(opt, th));
              if (name == "mdp_rates") return summary_to_dict(run_mdp_rates(opt, th));
              if (name == "embedding_equivalence")
                  return summary_to_dict(run_embedding_equivalence(50, opt, th));
              if (name == "uniform_tree")
                  return summary_to_dict(run_uniform_tree(1000, 100000, opt, th));
              if (name == "tree_maxdeg") return summary_to_dict(run_tree_maxdeg(10000, opt, th));
              throw ConfigError("unknown or unsupported experiment for the python surface: " + name);
          },
          py::arg("name"), py::arg("replicates") = 0, py::arg("master_seed") = 20260810,
          py::arg("threads") = 0);
}
