#include "hubsim/graphsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hubsim/errors.hpp"

namespace hubsim {

// ---------------------------------------------------------------------------
// AttachmentSequence

AttachmentSequence AttachmentSequence::constant(std::int64_t m) {
    if (m < 1) throw ConfigError("attachment sequence requires m >= 1");
    AttachmentSequence s;
    s.kind_ = SeqKind::Constant;
    s.m_ = m;
    return s;
}

AttachmentSequence AttachmentSequence::iid_point_mass(std::int64_t m) {
    AttachmentSequence s = constant(m);
    s.kind_ = SeqKind::IidPointMass;
    return s;
}

AttachmentSequence AttachmentSequence::iid_geometric(double p) {
    if (!(p > 0) || !(p <= 1)) throw ConfigError("geometric attachment sequence requires p in (0,1]");
    AttachmentSequence s;
    s.kind_ = SeqKind::IidGeometric;
    s.p_ = p;
    return s;
}

AttachmentSequence AttachmentSequence::iid_zipf(double sexp, std::int64_t cap) {
    if (!(sexp > 0)) throw ConfigError("zipf attachment sequence requires s > 0");
    if (cap < 1 || cap > 50'000'000) throw ConfigError("zipf attachment sequence requires 1 <= cap <= 5e7");
    AttachmentSequence s;
    s.kind_ = SeqKind::IidZipf;
    s.s_ = sexp;
    s.cap_ = cap;
    s.zipf_cdf_.resize(std::size_t(cap));
    DD acc;
    for (std::int64_t j = 1; j <= cap; ++j) {
        acc.add(std::pow(double(j), -sexp));
        s.zipf_cdf_[std::size_t(j - 1)] = acc.value();
    }
    return s;
}

AttachmentSequence AttachmentSequence::log_power(double nu) {
    if (!(nu > 0)) throw ConfigError("log_power attachment sequence requires nu > 0");
    AttachmentSequence s;
    s.kind_ = SeqKind::LogPower;
    s.nu_ = nu;
    return s;
}

std::int64_t AttachmentSequence::draw(std::int64_t n, RngStream& rng) const {
    switch (kind_) {
        case SeqKind::Constant:
        case SeqKind::IidPointMass:
            return m_;
        case SeqKind::IidGeometric: {
            if (p_ == 1.0) return 1;
            double u = rng.u01();
            auto m = 1 + static_cast<std::int64_t>(std::floor(std::log1p(-u) / std::log1p(-p_)));
            return std::max<std::int64_t>(1, m);
        }
        case SeqKind::IidZipf: {
            double x = rng.u01() * zipf_cdf_.back();
            auto it = std::upper_bound(zipf_cdf_.begin(), zipf_cdf_.end(), x);
            return 1 + (it - zipf_cdf_.begin());
        }
        case SeqKind::LogPower:
            return deterministic_value(n);
    }
    return 1;
}

bool AttachmentSequence::deterministic() const {
    return kind_ == SeqKind::Constant || kind_ == SeqKind::IidPointMass ||
           kind_ == SeqKind::LogPower;
}

std::int64_t AttachmentSequence::deterministic_value(std::int64_t n) const {
    switch (kind_) {
        case SeqKind::Constant:
        case SeqKind::IidPointMass:
            return m_;
        case SeqKind::LogPower: {
            double lg = std::log(double(n));
            return static_cast<std::int64_t>(std::floor(1.0 + std::pow(lg, nu_)));
        }
        default:
            throw ModelError("attachment sequence is random; no deterministic value");
    }
}

double AttachmentSequence::mean() const {
    switch (kind_) {
        case SeqKind::Constant:
        case SeqKind::IidPointMass:
            return double(m_);
        case SeqKind::IidGeometric:
            return 1.0 / p_;
        case SeqKind::IidZipf: {
            DD num;
            for (std::int64_t j = 1; j <= cap_; ++j) num.add(std::pow(double(j), 1.0 - s_));
            return num.value() / zipf_cdf_.back();
        }
        case SeqKind::LogPower:
            return std::numeric_limits<double>::quiet_NaN();
    }
    return std::numeric_limits<double>::quiet_NaN();
}

std::string AttachmentSequence::describe() const {
    switch (kind_) {
        case SeqKind::Constant: return "constant(" + std::to_string(m_) + ")";
        case SeqKind::IidPointMass: return "point_mass(" + std::to_string(m_) + ")";
        case SeqKind::IidGeometric: return "geometric(" + std::to_string(p_) + ")";
        case SeqKind::IidZipf:
            return "zipf(" + std::to_string(s_) + ",cap=" + std::to_string(cap_) + ")";
        case SeqKind::LogPower: return "log_power(" + std::to_string(nu_) + ")";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// WeightIndex

WeightIndex::WeightIndex(std::int64_t capacity) {
    if (capacity < 1) throw ConfigError("weight index capacity must be >= 1");
    w_.reserve(std::size_t(capacity));
    tree_.assign(std::size_t(capacity) + 1, 0.0);
    mask_ = 1;
    while (mask_ * 2 <= capacity) mask_ *= 2;
}

void WeightIndex::append(double w) {
    if (size_ + 1 > static_cast<std::int64_t>(tree_.size()) - 1) {
        w_.push_back(w);
        ++size_;
        tree_.assign(tree_.size() * 2, 0.0);
        mask_ = 1;
        while (mask_ * 2 <= static_cast<std::int64_t>(tree_.size()) - 1) mask_ *= 2;
        rebuild();
    } else {
        w_.push_back(w);
        ++size_;
        for (std::int64_t j = size_; j <= static_cast<std::int64_t>(tree_.size()) - 1; j += j & (-j))
            tree_[std::size_t(j)] += w;
        total_ += w;
    }
    ++updates_;
}

void WeightIndex::update(std::int64_t i, double w) {
    double delta = w - w_[std::size_t(i)];
    w_[std::size_t(i)] = w;
    for (std::int64_t j = i + 1; j <= static_cast<std::int64_t>(tree_.size()) - 1; j += j & (-j))
        tree_[std::size_t(j)] += delta;
    total_ += delta;
    ++updates_;
}

std::int64_t WeightIndex::sample(double x) const {
    std::int64_t pos = 0;
    for (std::int64_t step = mask_; step > 0; step >>= 1) {
        std::int64_t nxt = pos + step;
        if (nxt <= static_cast<std::int64_t>(tree_.size()) - 1 && tree_[std::size_t(nxt)] <= x) {
            x -= tree_[std::size_t(nxt)];
            pos = nxt;
        }
    }
    return std::min(pos, size_ - 1);
}

double WeightIndex::prefix(std::int64_t i) const {
    double s = 0;
    for (std::int64_t j = i; j > 0; j -= j & (-j)) s += tree_[std::size_t(j)];
    return s;
}

double WeightIndex::drift() const {
    const auto n = static_cast<std::int64_t>(tree_.size()) - 1;
    std::vector<double> fresh(tree_.size(), 0.0);
    for (std::int64_t i = 1; i <= n; ++i) {
        if (i <= size_) fresh[std::size_t(i)] += w_[std::size_t(i - 1)];
        std::int64_t j = i + (i & -i);
        if (j <= n) fresh[std::size_t(j)] += fresh[std::size_t(i)];
    }
    double worst = 0;
    for (std::size_t i = 1; i < tree_.size(); ++i) {
        double denom = std::max(std::abs(fresh[i]), 1.0);
        worst = std::max(worst, std::abs(fresh[i] - tree_[i]) / denom);
    }
    return worst;
}

void WeightIndex::rebuild() {
    const auto n = static_cast<std::int64_t>(tree_.size()) - 1;
    std::fill(tree_.begin(), tree_.end(), 0.0);
    DD tot;
    for (std::int64_t i = 1; i <= n; ++i) {
        if (i <= size_) {
            tree_[std::size_t(i)] += w_[std::size_t(i - 1)];
            tot.add(w_[std::size_t(i - 1)]);
        }
        std::int64_t j = i + (i & -i);
        if (j <= n) tree_[std::size_t(j)] += tree_[std::size_t(i)];
    }
    total_ = tot.value();
}

// ---------------------------------------------------------------------------
// GrowthState

GrowthState::GrowthState(const AttachmentFunction& f, std::int64_t capacity)
    : f_(&f), fc_(f), deg_(), widx_(capacity) {
    deg_.reserve(std::size_t(capacity));
    deg_.push_back(0);  // the root, degree 0, weight f(0)
    double w0 = fc_(0);
    if (!(w0 > 0)) throw ModelError("attachment weight f(0) must be positive to grow from the seed");
    widx_.append(w0);
}

void GrowthState::leader_update(std::int64_t v, std::int64_t d) {
    if (v == leader_idx_) {
        leader_deg_ = d;
        return;
    }
    if (d > leader_deg_ || (d == leader_deg_ && v < leader_idx_)) {
        leader_idx_ = v;
        leader_deg_ = d;
        ++leader_changes_;
    }
}

void GrowthState::bump(std::int64_t v) {
    std::int32_t d = ++deg_[std::size_t(v)];
    if (v != nascent_) widx_.update(v, fc_(d));
    leader_update(v, d);
}

std::int64_t GrowthState::attach_edge(RngStream& rng) {
    double total = widx_.total();
    if (!(total > 0)) throw ModelError("total attachment weight is not positive");
    std::int64_t tgt = widx_.sample(rng.u01() * total);
    bump(tgt);
    bump(nascent_);
    ++k_;
    return tgt;
}

void GrowthState::add_vertex(std::int64_t m, RngStream& rng) {
    ++n_;
    nascent_ = n_;
    deg_.push_back(0);
    for (std::int64_t j = 0; j < m; ++j) attach_edge(rng);
    widx_.append(fc_(deg_[std::size_t(nascent_)]));
    nascent_ = -1;
}

std::int64_t GrowthState::sum_degrees() const {
    std::int64_t s = 0;
    for (auto d : deg_) s += d;
    return s;
}

void GrowthState::check_weights(double rtol) {
    // per-vertex weights are exact by construction; verify the tree, then reset it
    double d = widx_.drift();
    if (d > rtol)
        throw ModelError("weight index drift " + std::to_string(d) + " exceeds tolerance");
    widx_.rebuild();
}

TrajectoryRecord grow(const AttachmentFunction& f, const AttachmentSequence& seq,
                      std::int64_t n_max, std::span<const std::int64_t> checkpoint_ns,
                      RngStream& rng, const GrowOptions& opts) {
    if (n_max < 1) throw ConfigError("grow requires n_max >= 1");
    std::vector<std::int64_t> cks(checkpoint_ns.begin(), checkpoint_ns.end());
    std::sort(cks.begin(), cks.end());
    TrajectoryRecord rec;
    rec.stream_seed = rng.seed();

    GrowthState st(f, std::min(n_max + 1, opts.max_vertices + 1));
    std::uint64_t last_rebuild = 0;
    std::size_t ci = 0;
    auto snapshot = [&](std::int64_t n) {
        GrowthCheckpoint cp;
        cp.n = n;
        cp.k = st.edges();
        cp.d_max = st.d_max();
        cp.leader_index = st.leader();
        cp.leader_changes = st.leader_changes();
        cp.root_degree = st.degree(0);
        cp.phi1_dmax = std::numeric_limits<double>::quiet_NaN();
        if (opts.phi && cp.d_max <= opts.phi->horizon()) cp.phi1_dmax = opts.phi->phi1(cp.d_max);
        rec.checkpoints.push_back(cp);
    };
    while (ci < cks.size() && cks[ci] <= 0) {
        snapshot(0);
        ++ci;
    }
    for (std::int64_t n = 1; n <= n_max; ++n) {
        if (n > opts.max_vertices) {
            rec.capped = true;
            break;
        }
        std::int64_t m = seq.draw(n, rng);
        if (st.edges() + m > opts.max_edges) {
            rec.capped = true;
            break;
        }
        st.add_vertex(m, rng);
        if (st.weights().updates() - last_rebuild >= opts.rebuild_every) {
            st.check_weights();
            last_rebuild = st.weights().updates();
        }
        while (ci < cks.size() && cks[ci] == n) {
            snapshot(n);
            ++ci;
        }
    }
    st.check_weights();
    rec.final_n = st.vertices();
    rec.final_k = st.edges();
    return rec;
}

LeaderStats leader_statistics(const TrajectoryRecord& rec, std::int64_t n_lo, std::int64_t n_hi) {
    const GrowthCheckpoint* lo = nullptr;
    const GrowthCheckpoint* hi = nullptr;
    for (const auto& c : rec.checkpoints) {
        if (c.n == n_lo && !lo) lo = &c;
        if (c.n == n_hi) hi = &c;
    }
    if (!lo || !hi || n_lo > n_hi)
        throw ConfigError("leader_statistics: window endpoints must be recorded checkpoints");
    LeaderStats out;
    out.change_count = hi->leader_changes - lo->leader_changes;
    out.changed = out.change_count > 0;
    out.final_leader = hi->leader_index;
    return out;
}

// ---------------------------------------------------------------------------
// bound chains

std::vector<std::int64_t> bound_process_lower(const AttachmentFunction& f, std::int64_t k_max,
                                              RngStream& rng) {
    if (!f.monotone()) throw ConfigError("lower bound chain requires a monotone attachment function");
    auto cf = f.linear_bound_cf();
    if (!cf) throw ConfigError("lower bound chain requires a declared linear bound C_f");
    std::vector<std::int64_t> path;
    path.reserve(std::size_t(k_max) + 1);
    std::int64_t d = 0;
    path.push_back(d);
    for (std::int64_t k = 0; k < k_max; ++k) {
        double p = f(d) / (3.0 * *cf * double(k + 1));
        if (rng.u01() < p) ++d;
        path.push_back(d);
    }
    return path;
}

namespace {
// realized prefix sums s_0=0, s_1, ... covering k_max
std::vector<std::int64_t> realize_s(const AttachmentSequence& seq, std::int64_t k_max,
                                    RngStream& rng) {
    std::vector<std::int64_t> s{0};
    while (s.back() <= k_max) s.push_back(s.back() + seq.draw(std::int64_t(s.size()), rng));
    return s;
}
}  // namespace

UpperBoundPath bound_process_upper(const AttachmentFunction& f, double eps, std::int64_t l,
                                   const AttachmentSequence& seq, std::int64_t k_max,
                                   RngStream& rng) {
    if (!f.monotone()) throw ConfigError("upper bound chain requires a monotone attachment function");
    if (!(eps > 0)) throw ConfigError("upper bound chain requires eps > 0");
    if (l < 0) throw ConfigError("upper bound chain: vertex index must be >= 0");
    auto s = realize_s(seq, k_max, rng);
    // premise: s^{-1}(k) >= eps(k+1), where s^{-1}(k) = n for s_{n-1} <= k < s_n
    {
        std::int64_t n = 1;
        for (std::int64_t k = 0; k <= k_max; ++k) {
            while (s[std::size_t(n)] <= k) ++n;
            if (double(n) < eps * double(k + 1))
                throw ConfigError("upper bound chain: premise s^{-1}(k) >= eps(k+1) fails first at k=" +
                                  std::to_string(k));
        }
    }
    if (std::size_t(l) >= s.size())
        throw ConfigError("upper bound chain: vertex index beyond realized sequence");
    UpperBoundPath out;
    out.k_start = l == 0 ? 0 : s[std::size_t(l - 1)];
    double f0 = f(0);
    std::int64_t d = 0;
    out.path.push_back(d);
    for (std::int64_t k = out.k_start; k < k_max; ++k) {
        double p = f(d) / (eps * double(k + 1) * f0);
        if (p > 1) {
            p = 1;
            out.clamped = true;
        }
        if (rng.u01() < p) ++d;
        out.path.push_back(d);
    }
    return out;
}

CoupledLowerRun grow_coupled_lower(const AttachmentFunction& f, const AttachmentSequence& seq,
                                   std::int64_t k_max, RngStream& rng) {
    if (!f.monotone()) throw ConfigError("coupled lower run requires a monotone attachment function");
    auto cf_opt = f.linear_bound_cf();
    if (!cf_opt) throw ConfigError("coupled lower run requires a declared linear bound C_f");
    double cf = *cf_opt;

    FValueCache fc(f);
    std::vector<std::int32_t> deg{0};
    WeightIndex widx(k_max + 2);
    widx.append(fc(0));

    CoupledLowerRun out;
    std::int64_t dlow = 0, k = 0, n = 0;
    while (k < k_max) {
        ++n;
        std::int64_t m = seq.draw(n, rng);
        deg.push_back(0);
        for (std::int64_t j = 0; j < m && k < k_max; ++j) {
            double total = widx.total();
            double w0 = widx.weight(0);
            double p_low = fc(dlow) / (3.0 * cf * double(k + 1));
            double p_root = w0 / total;
            if (p_low > p_root * (1 + 1e-12))
                throw ModelError("coupled lower run: coupling order violated (check C_f)");
            double u = rng.u01();
            std::int64_t tgt;
            if (u < p_low) {
                ++dlow;
                tgt = 0;
            } else if (u < p_root) {
                tgt = 0;
            } else {
                // conditional on missing the root, targets are proportional among the rest
                double x = w0 + rng.u01() * (total - w0);
                tgt = widx.sample(std::min(x, total * (1 - 1e-16)));
                if (tgt == 0) tgt = std::min<std::int64_t>(1, widx.size() - 1);
            }
            ++deg[std::size_t(tgt)];
            widx.update(tgt, fc(deg[std::size_t(tgt)]));
            ++deg[std::size_t(n)];
            ++k;
            out.lower.push_back(dlow);
            out.root.push_back(deg[0]);
        }
        widx.append(fc(deg[std::size_t(n)]));
    }
    return out;
}

CoupledUpperRun grow_coupled_upper(const AttachmentFunction& f, const AttachmentSequence& seq,
                                   double eps, std::int64_t l, std::int64_t k_max,
                                   RngStream& rng) {
    if (!f.monotone()) throw ConfigError("coupled upper run requires a monotone attachment function");
    if (!(eps > 0) || l < 1) throw ConfigError("coupled upper run requires eps > 0 and l >= 1");

    FValueCache fc(f);
    std::vector<std::int32_t> deg{0};
    WeightIndex widx(k_max + 2);
    widx.append(fc(0));
    double f0 = fc(0);

    // The chain couples with the received-edge dynamics of vertex l, so the
    // tracked pair starts when v_l finishes attaching (k = s_l) at the common
    // value m_l; the transition probability is the one from the bound chain.
    CoupledUpperRun out;
    std::int64_t dbar = -1;
    std::int64_t k = 0, n = 0;
    while (k < k_max) {
        ++n;
        std::int64_t m = seq.draw(n, rng);
        deg.push_back(0);
        for (std::int64_t j = 0; j < m && k < k_max; ++j) {
            if (double(n) < eps * double(k + 1))
                throw ConfigError("coupled upper run: premise s^{-1}(k) >= eps(k+1) fails at k=" +
                                  std::to_string(k));
            double total = widx.total();
            std::int64_t tgt;
            if (n > l) {
                double wl = widx.weight(l);
                double p_l = wl / total;
                double raw = fc(dbar) / (eps * double(k + 1) * f0);
                double p_up = raw;
                if (p_up > 1) {
                    p_up = 1;
                    out.clamped = true;
                }
                if (p_l > p_up * (1 + 1e-12))
                    throw ModelError("coupled upper run: coupling order violated");
                double u = rng.u01();
                if (u < p_l) {
                    ++dbar;
                    tgt = l;
                } else {
                    if (u < p_up) ++dbar;
                    double x = rng.u01() * (total - wl);
                    if (x >= widx.prefix(l)) x += wl;
                    tgt = widx.sample(std::min(x, total * (1 - 1e-16)));
                    if (tgt == l) tgt = l - 1;
                }
            } else {
                tgt = widx.sample(rng.u01() * total);
            }
            ++deg[std::size_t(tgt)];
            widx.update(tgt, fc(deg[std::size_t(tgt)]));
            ++deg[std::size_t(n)];
            ++k;
            if (n > l) {
                out.upper.push_back(dbar);
                out.tracked.push_back(deg[std::size_t(l)]);
            }
        }
        widx.append(fc(deg[std::size_t(n)]));
        if (n == l) {
            dbar = deg[std::size_t(l)];  // = m_l
            out.k_start = k;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// race

namespace {
void race_bookkeeping(RaceResult& r) {
    std::int64_t last_sign = 0;
    r.lead_changes = 0;
    r.tie_visits = 0;
    for (std::size_t j = 1; j < r.path.size(); ++j) {
        auto [x1, x2] = r.path[j];
        std::int64_t s = x1 == x2 ? 0 : (x1 > x2 ? 1 : -1);
        if (s == 0) ++r.tie_visits;
        if (s != 0) {
            if (last_sign != 0 && s != last_sign) ++r.lead_changes;
            last_sign = s;
        }
    }
}
}  // namespace

RaceResult race(const AttachmentFunction& f, std::int64_t a, std::int64_t b, std::int64_t steps,
                RngStream& rng) {
    if (a < 1 || b < 1) throw ConfigError("race starts at degrees >= 1");
    RaceResult r;
    r.path.reserve(std::size_t(steps) + 1);
    std::int64_t x1 = a, x2 = b;
    r.path.emplace_back(x1, x2);
    for (std::int64_t j = 0; j < steps; ++j) {
        double f1 = f(x1), f2 = f(x2);
        if (rng.u01() < f1 / (f1 + f2))
            ++x1;
        else
            ++x2;
        r.path.emplace_back(x1, x2);
    }
    race_bookkeeping(r);
    return r;
}

RaceResult race_via_clocks(const AttachmentFunction& f, std::int64_t a, std::int64_t b,
                           std::int64_t steps, RngStream& rng) {
    if (a < 1 || b < 1) throw ConfigError("race starts at degrees >= 1");
    RaceResult r;
    r.path.reserve(std::size_t(steps) + 1);
    std::int64_t x1 = a, x2 = b;
    r.path.emplace_back(x1, x2);
    for (std::int64_t j = 0; j < steps; ++j) {
        // memorylessness lets both pending clocks be redrawn after every jump
        double t1 = rng.exponential(f(x1));
        double t2 = rng.exponential(f(x2));
        if (t1 < t2)
            ++x1;
        else
            ++x2;
        r.path.emplace_back(x1, x2);
    }
    race_bookkeeping(r);
    return r;
}

}  // namespace hubsim
