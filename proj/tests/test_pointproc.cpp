#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "hubsim/errors.hpp"
#include "hubsim/pointproc.hpp"
#include "hubsim/stats.hpp"

using namespace hubsim;

TEST_CASE("xi with unit rates is a Poisson process") {
    auto f = AttachmentFunction::constant(1);
    const int reps = 100000;
    double acc = 0;
    RngStream rng = derive_stream(11, 0, "poisson");
    for (int r = 0; r < reps; ++r) {
        auto traj = simulate_xi(f, 0, 5.0, rng);
        acc += double(traj.event_times.size());
    }
    double mean = acc / reps;
    CHECK(std::abs(mean - 5.0) < 3.0 * std::sqrt(5.0 / reps));
}

TEST_CASE("xi at t=0 never counts events; caps flag the trajectory") {
    auto f = AttachmentFunction::constant(1);
    RngStream rng(3);
    auto traj = simulate_xi(f, 0, 0.0, rng);
    CHECK(traj.event_times.empty());
    auto capped = simulate_xi(AttachmentFunction::affine(5), 0, 1e9, rng, 100);
    CHECK(capped.capped);
    CHECK(std::int64_t(capped.event_times.size()) == 100);
}

TEST_CASE("simulated counts match the hypoexponential law") {
    // P(xi(t) >= n) = P(S_1(n) <= t), checked for n = 1..10 at t = 2
    auto f = AttachmentFunction::power(0.3);
    const std::int64_t reps = 100000;
    const double t = 2.0;
    std::vector<std::int64_t> ge(11, 0);
    RngStream rng = derive_stream(12, 0, "counts");
    for (std::int64_t r = 0; r < reps; ++r) {
        auto traj = simulate_xi(f, 0, t, rng);
        auto c = std::int64_t(traj.event_times.size());
        for (std::int64_t n = 1; n <= 10; ++n)
            if (c >= n) ++ge[std::size_t(n)];
    }
    for (std::int64_t n = 1; n <= 10; ++n) {
        std::vector<double> rates;
        for (std::int64_t i = 0; i < n; ++i) rates.push_back(f(i));
        double p = hypoexp_cdf(rates, t).cdf;
        double se = std::sqrt(p * (1 - p) / double(reps));
        // ~Bonferroni-corrected two-sided binomial check across the 10 slots
        CHECK(std::abs(double(ge[std::size_t(n)]) / double(reps) - p) < 4.5 * se + 1e-9);
    }
}

TEST_CASE("shifted clocks: xi_A for f=k+1 is a Yule process started at A+1") {
    auto f = AttachmentFunction::affine(1);
    const std::int64_t A = 3;
    const double t = 1.0;
    // E xi_A(t) = (A+1)(e^t - 1), summed from the exact hypoexponential law
    DD expect_sum;
    for (std::int64_t n = 1; n < 400; ++n) {
        std::vector<double> rates;
        for (std::int64_t i = 0; i < n; ++i) rates.push_back(f(A + i));
        double p = hypoexp_cdf(rates, t).cdf;
        expect_sum.add(p);
        if (p < 1e-14) break;
    }
    double closed = double(A + 1) * (std::exp(t) - 1.0);
    CHECK(expect_sum.value() == doctest::Approx(closed).epsilon(1e-6));

    const int reps = 50000;
    double acc = 0;
    for (int r = 0; r < reps; ++r) {
        RngStream rng = derive_stream(13, std::uint64_t(r), "shifted");
        acc += double(simulate_xi(f, A, t, rng).event_times.size());
    }
    // Var xi_A(t) = (A+1) e^t (e^t - 1) for the Yule start
    double sd = std::sqrt(double(A + 1) * std::exp(t) * (std::exp(t) - 1.0) / reps);
    CHECK(std::abs(acc / reps - closed) < 3.5 * sd);
}

TEST_CASE("martingale paths: start at zero, unit-rate QV, centered mean") {
    auto f1 = AttachmentFunction::constant(1);
    RngStream rng(5);
    std::vector<double> cks{0.0, 1.0, 2.5, 7.0};
    auto p = martingale_path(f1, 0, cks, rng);
    CHECK(p.m[0] == 0.0);
    for (std::size_t i = 0; i < cks.size(); ++i)
        CHECK(p.qv[i] == doctest::Approx(cks[i]).epsilon(1e-12));

    auto f = AttachmentFunction::power(0.3);
    const int reps = 100000;
    std::vector<double> ck{10.0};
    std::vector<double> ms;
    std::vector<double> qvs;
    for (int r = 0; r < reps; ++r) {
        RngStream s = derive_stream(77, std::uint64_t(r), "mart");
        auto path = martingale_path(f, 0, ck, s);
        ms.push_back(path.m[0]);
        qvs.push_back(path.qv[0]);
    }
    double mu = mean(ms);
    double sd = std::sqrt(variance(ms) / reps);
    CHECK(std::abs(mu) < 3 * sd);
    // martingale isometry: Var M(t) = E <M>(t)
    CHECK(variance(ms) ==
          doctest::Approx(mean(qvs)).epsilon(3.0 * std::sqrt(2.0 / reps) + 0.01));
}

TEST_CASE("martingale jumps stay below 1/f_*(A)") {
    auto f = AttachmentFunction::power(0.3);
    RngStream rng(6);
    auto traj = simulate_xi(f, 2, 30.0, rng);
    double fstar_from_2 = f(2);  // monotone f
    for (std::size_t j = 0; j < traj.event_times.size(); ++j) {
        double jump = 1.0 / f(2 + std::int64_t(j));
        CHECK(jump <= 1.0 / fstar_from_2 + 1e-15);
    }
}

TEST_CASE("hypoexponential closed forms") {
    CHECK(hypoexp_cdf({1, 2}, 1.0).cdf ==
          doctest::Approx(1 - 2 * std::exp(-1.0) + std::exp(-2.0)).epsilon(1e-12));
    CHECK(hypoexp_cdf({1, 1}, 1.0).cdf ==
          doctest::Approx(1 - 2 * std::exp(-1.0)).epsilon(1e-7));  // Poisson(1) >= 2
    CHECK(hypoexp_cdf({3, 5, 9}, 0.0).cdf == 0.0);
    CHECK_THROWS_AS(hypoexp_cdf({1, 1 + 1e-12}, 1.0, DuplicatePolicy::ExactDistinct), ModelError);
}

TEST_CASE("partial fractions agree with the grid integrator") {
    std::vector<double> rates;
    for (int i = 1; i <= 8; ++i) rates.push_back(double(i));
    for (double t : {0.3, 1.0, 2.5}) {
        double pf = hypoexp_cdf(rates, t).cdf;
        double gd = std::exp(hypoexp_log_cdf_grid(rates, t));
        CHECK(pf == doctest::Approx(gd).epsilon(1e-8));
    }
}

TEST_CASE("catastrophic cancellation falls back to the grid") {
    // ~120 clustered rates sink the partial-fraction form in doubles
    auto f = AttachmentFunction::power(0.3);
    std::vector<double> rates;
    for (int i = 0; i < 120; ++i) rates.push_back(f(i));
    auto res = hypoexp_cdf(rates, 30.0);
    CHECK(res.grid_fallback);
    CHECK(res.cdf >= 0.0);
    CHECK(res.cdf <= 1.0);
}

TEST_CASE("forward equations: exact zero-state decay and Poisson match") {
    auto f = AttachmentFunction::constant(1);
    PhiTable t(f, 128);
    auto sol = forward_equations(f, t, 1.0, 64);
    CHECK(sol.p[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
    double logpmf = -1.0;
    double fact = 1;
    for (int n = 0; n <= 20; ++n) {
        if (n > 0) fact *= n;
        double poisson = std::exp(-1.0) / fact;
        CHECK(std::abs(sol.p[std::size_t(n)] - poisson) < 1e-8);
    }
    (void)logpmf;
    CHECK(sol.total == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("forward equations agree with the hypoexponential oracle") {
    auto f = AttachmentFunction::affine(1);
    PhiTable t(f, 128);
    auto sol = forward_equations(f, t, 1.0, 64);
    for (std::int64_t n = 1; n <= 20; ++n) {
        double tail = 0;
        for (std::size_t j = std::size_t(n); j < sol.p.size(); ++j) tail += sol.p[j];
        std::vector<double> rates;
        for (std::int64_t i = 0; i < n; ++i) rates.push_back(f(i));
        CHECK(std::abs(tail - hypoexp_cdf(rates, 1.0).cdf) < 1e-6);
    }
}

TEST_CASE("forward equations: occupancy bound and cap handling") {
    auto f = AttachmentFunction::power(0.3);
    PhiTable t(f, 512);
    auto sol = forward_equations(f, t, 20.0, 160);
    CHECK(sol.max_ac3_violation <= 1e-12);  // p_v <= f(0)/f(v) at every step
    CHECK(sol.tail_mass < 1e-10);
    CHECK_THROWS_AS(forward_equations(f, t, 20.0, 16), ResourceError);
    try {
        forward_equations(f, t, 20.0, 16);
    } catch (const ResourceError& e) {
        CHECK(std::string(e.what()).find("state_cap") != std::string::npos);
    }
}

TEST_CASE("tail bound check: degenerate x and bound conformance") {
    auto f = AttachmentFunction::power(0.3);
    PhiTable t(f, 4096);
    auto r0 = tail_bound_check(f, t, 0.0, 10.0, 10.0, 2000, 99);
    CHECK(r0.analytic_general == doctest::Approx(1.0));
    CHECK(r0.empirical <= 1.0);
    auto r = tail_bound_check(f, t, 0.5, 50.0, 50.0, 20000, 99);
    CHECK(r.wilson_upper99 <= r.analytic_general);
    CHECK(r.empirical <= r.wilson_upper99);
    // simplified form appears once C3 constants are supplied and valid
    auto rs = tail_bound_check(f, t, 0.5, 50.0, 50.0, 2000, 99, std::make_pair(1.0, 1.9));
    CHECK(rs.analytic_simplified.has_value());
}

TEST_CASE("moderate deviation rates against the exact oracle") {
    auto f = AttachmentFunction::power(0.3);
    PhiTable t(f, 512);
    // frozen from two independent oracles (stiff ODE solve at rtol 1e-12 and a
    // 60-digit partial-fraction evaluation)
    struct Frozen {
        std::int64_t n;
        double logprob, ratio;
    };
    for (auto fr : {Frozen{50, -3.09919, 2.4671}, Frozen{100, -3.74291, 2.1615},
                    Frozen{200, -4.54101, 1.9240}}) {
        auto c = mdp_rate_check(f, t, fr.n, 0.5);
        CHECK(c.applicable);
        CHECK(c.exact_logprob == doctest::Approx(fr.logprob).epsilon(1e-4));
        CHECK(c.ratio == doctest::Approx(fr.ratio).epsilon(1e-3));
    }

    auto zero = mdp_rate_check(f, t, 50, 0.0);
    CHECK(!zero.applicable);
    auto neg = mdp_rate_check(f, t, 50, 100.0);
    CHECK(std::isinf(neg.exact_logprob));
    CHECK(neg.exact_logprob < 0);
}
