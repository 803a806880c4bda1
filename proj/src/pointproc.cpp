#include "hubsim/pointproc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "hubsim/errors.hpp"
#include "hubsim/parallel.hpp"

namespace hubsim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::int64_t XiTrajectory::count_at(double t) const {
    return std::upper_bound(event_times.begin(), event_times.end(), t) - event_times.begin();
}

XiTrajectory simulate_xi(const AttachmentFunction& f, std::int64_t A, double t_end,
                         RngStream& rng, std::int64_t max_events) {
    if (!(t_end >= 0)) throw ModelError("simulate_xi requires t_end >= 0");
    XiTrajectory traj;
    traj.A = A;
    traj.t_end = t_end;
    double t = 0;
    std::int64_t j = 0;
    for (;;) {
        double rate = f(A + j);
        if (!(rate > 0)) throw ModelError("simulate_xi: non-positive rate at count " + std::to_string(j));
        t += rng.exponential(rate);
        if (t > t_end) break;
        if (j >= max_events) {
            traj.capped = true;
            break;
        }
        traj.event_times.push_back(t);
        ++j;
    }
    return traj;
}

MartingalePath martingale_path(const AttachmentFunction& f, std::int64_t A,
                               std::span<const double> checkpoints, RngStream& rng,
                               std::int64_t max_events) {
    MartingalePath path;
    path.times.assign(checkpoints.begin(), checkpoints.end());
    if (!std::is_sorted(path.times.begin(), path.times.end()) ||
        (!path.times.empty() && path.times.front() < 0))
        throw ConfigError("martingale_path: checkpoints must be sorted and non-negative");
    const std::size_t nc = path.times.size();
    path.m.assign(nc, std::numeric_limits<double>::quiet_NaN());
    path.qv.assign(nc, std::numeric_limits<double>::quiet_NaN());
    path.counts.assign(nc, -1);
    if (nc == 0) return path;

    double t = 0;
    std::int64_t count = 0;
    DD phi;     // Phi_1^A(count)
    DD qv;      // integral of 1/f_A up to t
    std::size_t ci = 0;
    for (;;) {
        double rate = f(A + count);
        if (!(rate > 0))
            throw ModelError("martingale_path: non-positive rate at count " + std::to_string(count));
        double inv = 1.0 / rate;
        double t_next = t + rng.exponential(rate);
        while (ci < nc && path.times[ci] <= t_next) {
            double ck = path.times[ci];
            path.m[ci] = phi.value() - ck;
            path.qv[ci] = qv.value() + (ck - t) * inv;
            path.counts[ci] = count;
            ++ci;
        }
        if (ci == nc) return path;
        if (count >= max_events) {
            path.capped = true;
            return path;
        }
        qv.add((t_next - t) * inv);
        phi.add(inv);
        ++count;
        t = t_next;
    }
}

// ---------------------------------------------------------------------------
// hypoexponential CDF

namespace {

// absorbing pure-birth occupancy: states 0..m with rates r[0..m-1]; returns p
// at time t.  RK4, dt small against both the stiffness limit and t/2^16.
std::vector<double> pure_birth_probs(std::span<const double> rates, double t,
                                     double* max_ac3 = nullptr,
                                     const AttachmentFunction* f = nullptr,
                                     std::int64_t* steps_out = nullptr,
                                     double dt_request = 0) {
    const std::size_t m = rates.size();
    std::vector<double> p(m + 1, 0.0);
    p[0] = 1.0;
    if (t <= 0) return p;
    double rmax = 0;
    for (double r : rates) {
        if (!(r > 0)) throw ModelError("pure-birth integrator: non-positive rate");
        rmax = std::max(rmax, r);
    }
    double dt = 0.1 / rmax;
    if (dt_request > 0) dt = std::min(dt, dt_request);
    dt = std::min(dt, t / 65536.0);
    auto steps = static_cast<std::int64_t>(std::ceil(t / dt));
    if (steps > 400'000'000) throw ResourceError("pure-birth integrator: step count too large");
    dt = t / double(steps);

    std::vector<double> k1(m + 1), k2(m + 1), k3(m + 1), k4(m + 1), tmp(m + 1);
    auto deriv = [&](const std::vector<double>& q, std::vector<double>& out) {
        out[0] = -rates[0] * q[0];
        for (std::size_t j = 1; j < m; ++j) out[j] = rates[j - 1] * q[j - 1] - rates[j] * q[j];
        out[m] = rates[m - 1] * q[m - 1];
    };
    double f0 = f ? (*f)(0) : 0;
    for (std::int64_t s = 0; s < steps; ++s) {
        deriv(p, k1);
        for (std::size_t j = 0; j <= m; ++j) tmp[j] = p[j] + 0.5 * dt * k1[j];
        deriv(tmp, k2);
        for (std::size_t j = 0; j <= m; ++j) tmp[j] = p[j] + 0.5 * dt * k2[j];
        deriv(tmp, k3);
        for (std::size_t j = 0; j <= m; ++j) tmp[j] = p[j] + dt * k3[j];
        deriv(tmp, k4);
        for (std::size_t j = 0; j <= m; ++j)
            p[j] += dt / 6.0 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
        if ((s & 4095) == 4095) {
            double sum = 0;
            for (auto& q : p) {
                if (q < 0) q = 0;
                sum += q;
            }
            for (auto& q : p) q /= sum;
        }
        if (max_ac3 && f) {
            for (std::size_t j = 0; j < m; ++j) {
                double v = p[j] * (*f)(std::int64_t(j)) / f0 - 1.0;
                if (v > *max_ac3) *max_ac3 = v;
            }
        }
    }
    if (steps_out) *steps_out = steps;
    return p;
}

}  // namespace

double hypoexp_log_cdf_grid(std::span<const double> rates, double t) {
    if (rates.empty()) throw ConfigError("hypoexp: empty rate list");
    if (t <= 0) return -kInf;
    auto p = pure_birth_probs(rates, t);
    double mass = p.back();
    return mass > 0 ? std::log(mass) : -kInf;
}

HypoexpResult hypoexp_cdf(std::vector<double> rates, double t, DuplicatePolicy policy) {
    if (rates.empty()) throw ConfigError("hypoexp: empty rate list");
    for (double r : rates)
        if (!(r > 0)) throw ModelError("hypoexp: rates must be positive");
    HypoexpResult out;
    if (t <= 0) return out;
    if (policy == DuplicatePolicy::ConvolveGrid) {
        out.cdf = std::exp(hypoexp_log_cdf_grid(rates, t));
        out.grid_fallback = true;
        return out;
    }
    std::sort(rates.begin(), rates.end());
    // near-equal rates make the partial fractions singular
    bool dup = false;
    for (std::size_t i = 1; i < rates.size(); ++i)
        if (rates[i] - rates[i - 1] <= 1e-8 * rates[i]) dup = true;
    if (dup) {
        if (policy == DuplicatePolicy::ExactDistinct)
            throw ModelError("hypoexp: duplicate rates with exact_distinct policy");
        std::size_t run = 0;
        for (std::size_t i = 1; i < rates.size(); ++i) {
            if (rates[i] - rates[i - 1] <= 1e-8 * rates[i])
                rates[i] *= 1.0 + double(++run) * 1e-9;
            else
                run = 0;
        }
        std::sort(rates.begin(), rates.end());
    }

    // P(S > t) = sum_i w_i e^{-r_i t},  w_i = prod_{j != i} r_j/(r_j - r_i);
    // weights via log magnitudes so n ~ 200 does not overflow
    const std::size_t n = rates.size();
    DD acc;
    for (std::size_t i = 0; i < n; ++i) {
        double logw = 0;
        int sign = 1;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double d = rates[j] - rates[i];
            logw += std::log(rates[j]) - std::log(std::abs(d));
            if (d < 0) sign = -sign;
        }
        double term = double(sign) * std::exp(logw - rates[i] * t);
        acc.add(term);
    }
    double cdf = 1.0 - acc.value();
    if (!std::isfinite(cdf) || cdf < -1e-9 || cdf > 1 + 1e-9) {
        out.cdf = std::exp(hypoexp_log_cdf_grid(rates, t));
        out.grid_fallback = true;
        return out;
    }
    out.cdf = std::clamp(cdf, 0.0, 1.0);
    return out;
}

// ---------------------------------------------------------------------------
// forward equations

ForwardSolution forward_equations(const AttachmentFunction& f, const PhiTable& table,
                                  double t_end, std::int64_t state_cap, double dt) {
    if (state_cap < 1) throw ConfigError("forward_equations: state_cap must be >= 1");
    if (state_cap > table.horizon())
        throw TableRangeError("forward_equations: state_cap beyond phi table", state_cap);
    std::vector<double> rates(static_cast<std::size_t>(state_cap));
    for (std::int64_t j = 0; j < state_cap; ++j) rates[std::size_t(j)] = f(j);

    ForwardSolution sol;
    sol.t_end = t_end;
    double viol = 0;
    std::int64_t steps = 0;
    sol.p = pure_birth_probs(rates, t_end, &viol, &f, &steps, dt);
    sol.max_ac3_violation = viol;
    sol.steps = steps;
    sol.states.resize(sol.p.size());
    for (std::size_t j = 0; j < sol.p.size(); ++j) sol.states[j] = table.phi1(std::int64_t(j));
    double total = 0;
    for (double q : sol.p) total += q;
    sol.total = total;
    sol.tail_mass = sol.p.back();
    if (sol.tail_mass > 1e-10) {
        std::int64_t suggested = state_cap * 2;
        try {
            double kt = table.K(std::min(t_end, table.phi1_max() * 0.99));
            double target = t_end + 12.0 * std::sqrt(std::max(kt, 1.0));
            if (target <= table.phi1_max())
                suggested = std::max(suggested,
                                     static_cast<std::int64_t>(std::ceil(table.phi1_inv(target))) + 8);
        } catch (const TableRangeError&) {
        }
        throw ResourceError("forward_equations: tail mass " + std::to_string(sol.tail_mass) +
                            " above 1e-10 at t_end; state_cap of about " +
                            std::to_string(suggested) + " required");
    }
    return sol;
}

// ---------------------------------------------------------------------------
// tail bound and MDP checks

double wilson_upper(std::int64_t successes, std::int64_t n, double z) {
    double phat = double(successes) / double(n);
    double z2 = z * z;
    double denom = 1.0 + z2 / double(n);
    double centre = phat + z2 / (2.0 * double(n));
    double rad = z * std::sqrt(phat * (1 - phat) / double(n) + z2 / (4.0 * double(n) * double(n)));
    return std::min(1.0, (centre + rad) / denom);
}

TailBoundCheck tail_bound_check(const AttachmentFunction& f, const PhiTable& table, double x,
                                double t, double s, std::int64_t reps, std::uint64_t master_seed,
                                std::optional<std::pair<double, double>> c3_constants,
                                int threads) {
    if (!(x >= 0) || !(s >= 0) || s > t) throw ConfigError("tail_bound_check: need 0 <= s <= t, x >= 0");
    TailBoundCheck out;
    out.x = x;
    out.t = t;
    out.s = s;
    out.reps = reps;

    double kt = table.K(t);
    double fstar = f.f_star();
    if (!(fstar > 0)) throw ModelError("tail_bound_check: f_* must be positive");
    double denom = 1.0 / (fstar * fstar) + table.K(t + x * kt);
    out.analytic_general = std::exp(-0.5 * x * x * kt * kt / denom);
    if (c3_constants) {
        auto [tprime, D] = *c3_constants;
        bool valid = t >= tprime && x <= 2 * t / kt && D > 0;
        // the simplified form also needs K(t) >= 1/(D f_*^2)
        valid = valid && kt >= 1.0 / (D * fstar * fstar);
        if (valid) out.analytic_simplified = std::exp(-x * x * kt / (4 * D));
    }

    const double threshold = x * kt;
    const std::string purpose = "tail_bound_check/x=" + std::to_string(x) + ",t=" +
                                std::to_string(t) + ",s=" + std::to_string(s);
    auto hits = parallel_map<char>(reps, threads, [&](std::int64_t rep) -> char {
        RngStream rng = derive_stream(master_seed, std::uint64_t(rep), purpose);
        double clock = 0;
        std::int64_t count = 0;
        DD phi;
        for (;;) {
            double rate = f(count);
            clock += rng.exponential(rate);
            if (clock > s) break;
            phi.add(1.0 / rate);
            ++count;
        }
        double m = phi.value() - s;
        return m > threshold ? 1 : 0;
    });
    for (char h : hits) out.successes += h;
    out.empirical = double(out.successes) / double(reps);
    out.wilson_upper99 = wilson_upper(out.successes, reps, 2.3263478740408408);
    return out;
}

MdpCheck mdp_rate_check(const AttachmentFunction& f, const PhiTable& table, std::int64_t n,
                        double x) {
    if (n < 1 || n > table.horizon()) throw TableRangeError("mdp_rate_check: n beyond table", n);
    MdpCheck out;
    out.n = n;
    out.x = x;
    double p1 = table.phi1(n), p2 = table.phi2(n);
    out.threshold_t = p1 - x * p2;
    out.predicted = -0.5 * x * x * p2;
    if (x == 0) {
        out.applicable = false;
        out.note = "zero deviation: ratio to predicted 0 not applicable";
    }
    if (out.threshold_t < 0) {
        out.exact_logprob = -kInf;
        out.ratio = kInf;
        out.applicable = false;
        out.note = "threshold below 0: S_1(n) is positive, probability 0";
        return out;
    }
    std::vector<double> rates(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) rates[std::size_t(i)] = f(i);
    out.exact_logprob = hypoexp_log_cdf_grid(rates, out.threshold_t);
    out.ratio = out.predicted != 0 ? out.exact_logprob / out.predicted
                                   : std::numeric_limits<double>::quiet_NaN();
    return out;
}

}  // namespace hubsim
