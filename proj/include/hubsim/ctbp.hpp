#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hubsim/attachment.hpp"
#include "hubsim/phi.hpp"
#include "hubsim/rng.hpp"

namespace hubsim {

// Continuous-time branching process matching the tree growth chain observed at
// its jump times.  Rates follow the tree-degree convention: an individual's
// attachment weight is f(tree degree), where the root's degree equals its
// child count and every other individual carries the extra parent edge, so
//
//   root birth rate       f(children)
//   non-root birth rate   f(children + 1).
//
// With these rates the jump chain reproduces the discrete attachment law
// exactly (the uniform-offspring reading already disagrees with the two-vertex
// attachment probability at the second step whenever f(0) != f(1)).
struct BranchingTrajectory {
    std::vector<double> birth_time;        // birth_time[0] = 0 (root)
    std::vector<std::int32_t> parent;      // parent[0] = -1
    std::vector<std::int32_t> child_count; // at end_time
    double end_time = 0;
    bool capped = false;

    std::int64_t size() const { return static_cast<std::int64_t>(birth_time.size()); }
    std::int64_t size_at(double t) const;  // |BP(t)|
    // children of i born up to absolute time t (needs the child index)
    std::int64_t children_at(std::int64_t i, double t) const;
    std::int64_t tree_degree(std::int64_t i) const {
        return child_count[std::size_t(i)] + (i == 0 ? 0 : 1);
    }
    void build_child_index() const;

    // CSR over children, in birth order; built lazily
    mutable std::vector<std::int64_t> child_offset;
    mutable std::vector<std::int32_t> child_list;
};

struct CtbpStop {
    enum class Kind { Time, Size } kind = Kind::Size;
    double t = 0;
    std::int64_t n = 0;  // stop when |BP| = n + 1, i.e. at T_n
    static CtbpStop at_time(double t) { return {Kind::Time, t, 0}; }
    static CtbpStop at_size(std::int64_t n) { return {Kind::Size, 0, n}; }
};

BranchingTrajectory run_ctbp(const AttachmentFunction& f, CtbpStop stop, RngStream& rng,
                             std::int64_t max_size = 50'000'000);

// D^max_{a,b}(c): max over individuals born in [a,b] of Phi_1(children at c);
// 0 when c <= b or no births in the window.
double window_max_degree(const BranchingTrajectory& traj, const PhiTable& table, double a,
                         double b, double c);

struct ContinuousHubIndex {
    double birth_time = 0;   // earliest birth time attaining the max N-degree
    std::int64_t individual = 0;
    double max_ndegree = 0;
};

ContinuousHubIndex hub_index_continuous(const BranchingTrajectory& traj, const PhiTable& table,
                                        double t);

// discrete-law summary of the stopped tree, for embedding-equivalence checks
struct CtbpTreeStats {
    std::int64_t root_degree = 0;
    std::int64_t d_max = 0;
    std::int64_t leader_index = 0;  // birth order, oldest among maximal tree degrees
};

CtbpTreeStats ctbp_tree_stats(const BranchingTrajectory& traj);

struct MalthusianDiagnostic {
    std::vector<double> times;
    std::vector<double> scaled_size;  // e^{-lambda t} |BP(t)|
    double w_estimate = 0;            // final grid point, no extrapolation
};

MalthusianDiagnostic malthusian_diagnostic(const AttachmentFunction& f, double lambda_star,
                                           std::span<const double> t_grid, RngStream& rng,
                                           std::int64_t max_size = 50'000'000);

}  // namespace hubsim
