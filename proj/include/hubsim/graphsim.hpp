#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hubsim/attachment.hpp"
#include "hubsim/phi.hpp"
#include "hubsim/rng.hpp"

namespace hubsim {

enum class SeqKind { Constant, IidGeometric, IidZipf, IidPointMass, LogPower };

// Number of edges the n-th arriving vertex brings.
class AttachmentSequence {
  public:
    static AttachmentSequence constant(std::int64_t m);
    static AttachmentSequence iid_geometric(double p);                    // P(m=j) = p(1-p)^{j-1}
    static AttachmentSequence iid_zipf(double s, std::int64_t cap);       // P(m=j) ~ j^{-s}, j <= cap
    static AttachmentSequence iid_point_mass(std::int64_t m);
    static AttachmentSequence log_power(double nu);                       // m_n = floor(1 + (log n)^nu)

    std::int64_t draw(std::int64_t n, RngStream& rng) const;
    bool deterministic() const;
    std::int64_t deterministic_value(std::int64_t n) const;
    double mean() const;  // analytic mean of one draw (deterministic kinds: NaN)
    SeqKind kind() const { return kind_; }
    std::string describe() const;

  private:
    AttachmentSequence() = default;
    SeqKind kind_ = SeqKind::Constant;
    std::int64_t m_ = 1;
    double p_ = 0.5;
    double s_ = 2.0;
    std::int64_t cap_ = 0;
    double nu_ = 1.0;
    std::vector<double> zipf_cdf_;
};

// Prefix-sum (Fenwick) index over per-vertex weights f(d_i); point update and
// proportional sampling are O(log n).  Exact weights are kept alongside the
// tree so drift can be measured and reset by a full rebuild.
class WeightIndex {
  public:
    explicit WeightIndex(std::int64_t capacity);
    void append(double w);
    void update(std::int64_t i, double w);
    double weight(std::int64_t i) const { return w_[std::size_t(i)]; }
    double total() const { return total_; }
    std::int64_t size() const { return size_; }
    std::uint64_t updates() const { return updates_; }

    // index of the vertex owning the mass point x, x in [0, total)
    std::int64_t sample(double x) const;
    // sum of weights of vertices 0..i-1
    double prefix(std::int64_t i) const;
    // largest relative node deviation between the incremental tree and a fresh build
    double drift() const;
    void rebuild();

  private:
    std::vector<double> w_;
    std::vector<double> tree_;  // 1-based
    std::int64_t size_ = 0;
    std::int64_t mask_ = 1;
    double total_ = 0;
    std::uint64_t updates_ = 0;
};

struct GrowthCheckpoint {
    std::int64_t n = 0;                 // vertices added so far (graph has n+1)
    std::int64_t k = 0;                 // edges attached
    std::int64_t d_max = 0;
    std::int64_t leader_index = 0;      // I*: oldest vertex with maximal degree
    std::uint64_t leader_changes = 0;   // cumulative, detected per attached edge
    std::int64_t root_degree = 0;
    double phi1_dmax = 0;               // NaN when no phi table was supplied
};

struct TrajectoryRecord {
    std::vector<GrowthCheckpoint> checkpoints;
    std::uint64_t stream_seed = 0;
    std::int64_t final_n = 0, final_k = 0;
    bool capped = false;
};

struct GrowOptions {
    std::int64_t max_vertices = 50'000'000;
    std::int64_t max_edges = 500'000'000;
    std::uint64_t rebuild_every = 1ull << 20;
    const PhiTable* phi = nullptr;  // fills phi1_dmax when coverage allows
};

// The growth chain itself, exposed for tests and coupled constructions; grow()
// below is the replicate driver.  Dynamics: vertex n arrives with m_n edges;
// each edge picks an existing target with probability f(d_target)/sum, degrees
// (target and the newcomer) update per edge, and the newcomer only enters the
// weight index after its last edge.
class GrowthState {
  public:
    GrowthState(const AttachmentFunction& f, std::int64_t capacity);

    void add_vertex(std::int64_t m, RngStream& rng);
    std::int64_t vertices() const { return n_; }
    std::int64_t edges() const { return k_; }
    std::int64_t degree(std::int64_t i) const { return deg_[std::size_t(i)]; }
    std::int64_t d_max() const { return leader_deg_; }
    std::int64_t leader() const { return leader_idx_; }
    std::uint64_t leader_changes() const { return leader_changes_; }
    const WeightIndex& weights() const { return widx_; }
    WeightIndex& weights_mutable() { return widx_; }
    std::int64_t sum_degrees() const;
    void check_weights(double rtol = 1e-6);

    // one edge from the nascent vertex to a proportional target
    std::int64_t attach_edge(RngStream& rng);

  private:
    void bump(std::int64_t v);
    void leader_update(std::int64_t v, std::int64_t d);

    const AttachmentFunction* f_;
    FValueCache fc_;
    std::vector<std::int32_t> deg_;
    WeightIndex widx_;
    std::int64_t n_ = 0;  // vertices beyond the root
    std::int64_t k_ = 0;
    std::int64_t nascent_ = -1;  // vertex currently attaching (excluded from targets)
    std::int64_t leader_idx_ = 0, leader_deg_ = 0;
    std::uint64_t leader_changes_ = 0;
};

TrajectoryRecord grow(const AttachmentFunction& f, const AttachmentSequence& seq,
                      std::int64_t n_max, std::span<const std::int64_t> checkpoint_ns,
                      RngStream& rng, const GrowOptions& opts = {});

struct LeaderStats {
    bool changed = false;
    std::uint64_t change_count = 0;
    std::int64_t final_leader = 0;
};

// leader changes within the checkpointed window [n_lo, n_hi]
LeaderStats leader_statistics(const TrajectoryRecord& rec, std::int64_t n_lo, std::int64_t n_hi);

// Bernoulli bound chains.  Lower: P(+1) = f(d(k)) / (3 Cf (k+1)); upper:
// P(+1) = f(d(k)) / (eps (k+1) f(0)), clamped at 1 (flagged).
std::vector<std::int64_t> bound_process_lower(const AttachmentFunction& f, std::int64_t k_max,
                                              RngStream& rng);

struct UpperBoundPath {
    std::vector<std::int64_t> path;  // path[j] = value at k = k_start + j
    std::int64_t k_start = 0;
    bool clamped = false;
};

UpperBoundPath bound_process_upper(const AttachmentFunction& f, double eps, std::int64_t l,
                                   const AttachmentSequence& seq, std::int64_t k_max,
                                   RngStream& rng);

// Shared-uniform couplings used to check stochastic domination step by step.
struct CoupledLowerRun {
    std::vector<std::int64_t> lower, root;  // values after each edge
};
CoupledLowerRun grow_coupled_lower(const AttachmentFunction& f, const AttachmentSequence& seq,
                                   std::int64_t k_max, RngStream& rng);

struct CoupledUpperRun {
    std::vector<std::int64_t> upper, tracked;
    std::int64_t k_start = 0;
    bool clamped = false;
};
CoupledUpperRun grow_coupled_upper(const AttachmentFunction& f, const AttachmentSequence& seq,
                                   double eps, std::int64_t l, std::int64_t k_max, RngStream& rng);

// Two-vertex race: exactly one coordinate increments per step, coordinate 1
// with probability f(x1)/(f(x1)+f(x2)).
struct RaceResult {
    std::vector<std::pair<std::int64_t, std::int64_t>> path;  // includes the start
    std::int64_t lead_changes = 0;
    std::int64_t tie_visits = 0;
};

RaceResult race(const AttachmentFunction& f, std::int64_t a, std::int64_t b, std::int64_t steps,
                RngStream& rng);

// the same jump chain realized by racing two independent exponential clocks
RaceResult race_via_clocks(const AttachmentFunction& f, std::int64_t a, std::int64_t b,
                           std::int64_t steps, RngStream& rng);

}  // namespace hubsim
