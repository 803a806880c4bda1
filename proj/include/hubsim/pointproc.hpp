#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hubsim/attachment.hpp"
#include "hubsim/phi.hpp"
#include "hubsim/rng.hpp"

namespace hubsim {

// One realization of the point process xi_A: inter-event times are independent
// Exp(f(A+j)) for the j-th gap, so the j-th event lands at S_1(j+1).
struct XiTrajectory {
    std::int64_t A = 0;
    double t_end = 0;
    std::vector<double> event_times;
    bool capped = false;

    std::int64_t count_at(double t) const;
};

XiTrajectory simulate_xi(const AttachmentFunction& f, std::int64_t A, double t_end,
                         RngStream& rng, std::int64_t max_events = 50'000'000);

// M_A(t) = Phi_1^A(xi_A(t)) - t and its predictable quadratic variation
// <M_A>(t) = integral of 1/f_A(xi_A(s-)) ds, both sampled at the checkpoints
// of a single trajectory.
struct MartingalePath {
    std::vector<double> times;
    std::vector<double> m;
    std::vector<double> qv;
    std::vector<std::int64_t> counts;
    bool capped = false;
};

MartingalePath martingale_path(const AttachmentFunction& f, std::int64_t A,
                               std::span<const double> checkpoints, RngStream& rng,
                               std::int64_t max_events = 50'000'000);

enum class DuplicatePolicy { ExactDistinct, Perturb, ConvolveGrid };

struct HypoexpResult {
    double cdf = 0;
    bool grid_fallback = false;  // partial fractions cancelled catastrophically
};

// P(S_1(n) <= t) for S_1(n) = sum of independent Exp(rates[i]).  Distinct rates
// use the partial-fraction form (log-magnitude arithmetic, compensated sum);
// near-equal rates are perturbed or routed to the grid integrator.
HypoexpResult hypoexp_cdf(std::vector<double> rates, double t,
                          DuplicatePolicy policy = DuplicatePolicy::Perturb);

// log P(S_1(n) <= t) via the pure-birth master equation on a fine grid; the
// certified fallback, stable for any rate multiset.
double hypoexp_log_cdf_grid(std::span<const double> rates, double t);

struct ForwardSolution {
    double t_end = 0;
    std::vector<double> p;       // p[j] = P(N(t) = Phi_1(j)), last entry absorbing
    std::vector<double> states;  // Phi_1(j)
    double total = 0;
    double tail_mass = 0;        // mass absorbed at the cap
    double max_ac3_violation = 0;  // max over steps/states of p_v f(v)/f(0) - 1
    std::int64_t steps = 0;
};

// Kolmogorov forward equations for N(t) = Phi_1(xi(t)) on the state set
// {Phi_1(j) : j <= state_cap}; explicit RK4 with dt <= 0.1/max-rate.
ForwardSolution forward_equations(const AttachmentFunction& f, const PhiTable& table,
                                  double t_end, std::int64_t state_cap, double dt = 0);

struct TailBoundCheck {
    double x = 0, t = 0, s = 0;
    std::int64_t reps = 0, successes = 0;
    double empirical = 0;
    double wilson_upper99 = 0;       // one-sided 99% upper confidence limit
    double analytic_general = 0;     // exp{-x^2 K(t)^2 / (2 (f_*^-2 + K(t + xK(t))))}
    std::optional<double> analytic_simplified;  // exp{-x^2 K(t)/(4D)} when (t',D) valid
};

TailBoundCheck tail_bound_check(const AttachmentFunction& f, const PhiTable& table, double x,
                                double t, double s, std::int64_t reps, std::uint64_t master_seed,
                                std::optional<std::pair<double, double>> c3_constants = {},
                                int threads = 0);

struct MdpCheck {
    std::int64_t n = 0;
    double x = 0;
    double threshold_t = 0;     // Phi_1(n) - x Phi_2(n)
    double exact_logprob = 0;   // log P(S_1(n) <= threshold_t), -inf marker when impossible
    double predicted = 0;       // -x^2 Phi_2(n) / 2
    double ratio = 0;
    bool applicable = true;
    std::string note;
};

MdpCheck mdp_rate_check(const AttachmentFunction& f, const PhiTable& table, std::int64_t n,
                        double x);

double wilson_upper(std::int64_t successes, std::int64_t n, double z);

}  // namespace hubsim
