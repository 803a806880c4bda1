#include "hubsim/ctbp.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "hubsim/errors.hpp"

namespace hubsim {

namespace {
struct Event {
    double t;
    std::int32_t id;
    bool operator>(const Event& o) const { return t > o.t; }
};
}  // namespace

std::int64_t BranchingTrajectory::size_at(double t) const {
    return std::upper_bound(birth_time.begin(), birth_time.end(), t) - birth_time.begin();
}

void BranchingTrajectory::build_child_index() const {
    if (!child_offset.empty()) return;
    const std::size_t n = birth_time.size();
    child_offset.assign(n + 1, 0);
    for (std::size_t i = 1; i < n; ++i) ++child_offset[std::size_t(parent[i]) + 1];
    for (std::size_t i = 1; i <= n; ++i) child_offset[i] += child_offset[i - 1];
    child_list.resize(n == 0 ? 0 : n - 1);
    std::vector<std::int64_t> cursor(child_offset.begin(), child_offset.end() - 1);
    // children are appended in global birth order, so each group stays sorted
    for (std::size_t i = 1; i < n; ++i)
        child_list[std::size_t(cursor[std::size_t(parent[i])]++)] = std::int32_t(i);
}

std::int64_t BranchingTrajectory::children_at(std::int64_t i, double t) const {
    if (child_offset.empty())
        throw ModelError("children_at requires build_child_index() first");
    auto lo = child_list.begin() + child_offset[std::size_t(i)];
    auto hi = child_list.begin() + child_offset[std::size_t(i) + 1];
    auto it = std::upper_bound(lo, hi, t, [&](double tt, std::int32_t c) {
        return tt < birth_time[std::size_t(c)];
    });
    return it - lo;
}

BranchingTrajectory run_ctbp(const AttachmentFunction& f, CtbpStop stop, RngStream& rng,
                             std::int64_t max_size) {
    BranchingTrajectory traj;
    traj.birth_time.push_back(0.0);
    traj.parent.push_back(-1);
    traj.child_count.push_back(0);
    if (stop.kind == CtbpStop::Kind::Size && stop.n <= 0) {
        traj.end_time = 0;
        return traj;
    }
    if (stop.kind == CtbpStop::Kind::Time && stop.t <= 0) {
        traj.end_time = stop.t;
        return traj;
    }

    auto next_rate = [&](std::int32_t id) {
        std::int64_t c = traj.child_count[std::size_t(id)];
        return f(c + (id == 0 ? 0 : 1));
    };

    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue;
    queue.push({rng.exponential(next_rate(0)), 0});
    double clock = 0;
    for (;;) {
        Event ev = queue.top();
        queue.pop();
        if (stop.kind == CtbpStop::Kind::Time && ev.t > stop.t) {
            clock = stop.t;
            break;
        }
        clock = ev.t;
        // parent gives birth and reschedules
        ++traj.child_count[std::size_t(ev.id)];
        queue.push({clock + rng.exponential(next_rate(ev.id)), ev.id});
        auto baby = std::int32_t(traj.birth_time.size());
        traj.birth_time.push_back(clock);
        traj.parent.push_back(ev.id);
        traj.child_count.push_back(0);
        if (stop.kind == CtbpStop::Kind::Size && traj.size() == stop.n + 1) break;
        if (traj.size() >= max_size) {
            traj.capped = true;
            break;
        }
        queue.push({clock + rng.exponential(next_rate(baby)), baby});
    }
    traj.end_time = clock;
    return traj;
}

double window_max_degree(const BranchingTrajectory& traj, const PhiTable& table, double a,
                         double b, double c) {
    if (!(a < b)) throw ConfigError("window_max_degree requires a < b");
    if (c <= b) return 0.0;
    traj.build_child_index();
    auto lo = std::lower_bound(traj.birth_time.begin(), traj.birth_time.end(), a) -
              traj.birth_time.begin();
    auto hi = std::upper_bound(traj.birth_time.begin(), traj.birth_time.end(), b) -
              traj.birth_time.begin();
    if (lo >= hi) return 0.0;  // n[a,b] = 0 convention
    double best = 0.0;
    for (std::int64_t i = lo; i < hi; ++i)
        best = std::max(best, table.phi1(traj.children_at(i, c)));
    return best;
}

ContinuousHubIndex hub_index_continuous(const BranchingTrajectory& traj, const PhiTable& table,
                                        double t) {
    traj.build_child_index();
    std::int64_t alive = traj.size_at(t);
    if (alive <= 0) throw ModelError("hub_index_continuous: no individuals at time t");
    ContinuousHubIndex out;
    double best = -1;
    for (std::int64_t i = 0; i < alive; ++i) {
        double d = table.phi1(traj.children_at(i, t));
        // births are strictly ordered, so the first argmax is the earliest
        if (d > best) {
            best = d;
            out.individual = i;
        }
    }
    out.max_ndegree = best;
    out.birth_time = traj.birth_time[std::size_t(out.individual)];
    return out;
}

CtbpTreeStats ctbp_tree_stats(const BranchingTrajectory& traj) {
    CtbpTreeStats st;
    st.root_degree = traj.child_count[0];
    std::int64_t best = -1;
    for (std::int64_t i = 0; i < traj.size(); ++i) {
        std::int64_t d = traj.tree_degree(i);
        if (d > best) {
            best = d;
            st.leader_index = i;
        }
    }
    st.d_max = best;
    return st;
}

MalthusianDiagnostic malthusian_diagnostic(const AttachmentFunction& f, double lambda_star,
                                           std::span<const double> t_grid, RngStream& rng,
                                           std::int64_t max_size) {
    if (t_grid.empty()) throw ConfigError("malthusian_diagnostic requires a time grid");
    std::vector<double> grid(t_grid.begin(), t_grid.end());
    if (!std::is_sorted(grid.begin(), grid.end()))
        throw ConfigError("malthusian_diagnostic: time grid must be sorted");
    auto traj = run_ctbp(f, CtbpStop::at_time(grid.back()), rng, max_size);
    MalthusianDiagnostic diag;
    diag.times = grid;
    for (double t : grid)
        diag.scaled_size.push_back(std::exp(-lambda_star * t) * double(traj.size_at(t)));
    diag.w_estimate = diag.scaled_size.back();
    return diag;
}

}  // namespace hubsim
