#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hubsim/errors.hpp"
#include "hubsim/malthusian.hpp"

using namespace hubsim;

TEST_CASE("rho_hat closed forms and examples") {
    CHECK(rho_hat(AttachmentFunction::constant(1), 2.0, 1e-12).value ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rho_hat(AttachmentFunction::affine(1), 3.0, 1e-12).value ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rho_hat(AttachmentFunction::affine(1), 0.9, 1e-12).diverged);
}

TEST_CASE("rho_hat closed form agrees with the raw series") {
    // brute-force oracle: long truncation with compensated accumulation
    auto brute = [](auto&& f, double lambda, std::int64_t terms) {
        DD sum;
        double t = 1;
        for (std::int64_t k = 1; k <= terms; ++k) {
            double fk = f(k);
            t *= fk / (lambda + fk);
            sum.add(t);
        }
        return sum.value();
    };
    auto aff = AttachmentFunction::affine(0.5);
    double closed = rho_hat(aff, 3.7, 1e-14).value;
    CHECK(closed == doctest::Approx(1.5 / 2.7).epsilon(1e-14));
    CHECK(brute(aff, 3.7, 4'000'000) == doctest::Approx(closed).epsilon(1e-8));

    auto pw = AttachmentFunction::power(0.3);
    auto r = rho_hat(pw, 1.0, 1e-11);
    CHECK(r.converged);
    CHECK(brute(pw, 1.0, 1'000'000) == doctest::Approx(r.value).epsilon(1e-9));
}

TEST_CASE("rho_hat is nonincreasing in lambda") {
    auto f = AttachmentFunction::power(0.3);
    double prev = 1e300;
    for (double lam : {0.4, 0.8, 1.2, 1.8, 2.5, 4.0}) {
        double v = rho_hat(f, lam, 1e-10).value;
        CHECK(v <= prev);
        prev = v;
    }
}

TEST_CASE("divergence markers") {
    // superlinear attachment: the terms do not vanish and the series explodes
    auto super = AttachmentFunction::power(1.5);
    auto r = rho_hat(super, 5.0, 1e-10, 1'000'000);
    CHECK(r.diverged);
    CHECK(std::isinf(r.value));
    auto solved = solve_lambda_star(super, 1e-8);
    CHECK(!solved.found);
}

TEST_CASE("Malthusian rates match the known families") {
    for (double a : {0.0, 0.5, 1.0, 2.0}) {
        auto r = solve_lambda_star(AttachmentFunction::affine(a), 1e-9);
        REQUIRE(r.found);
        CHECK(std::abs(r.lambda_star - (2.0 + a)) < 1e-8);
        CHECK(r.hi - r.lo <= 1e-9);
    }
    auto u = solve_lambda_star(AttachmentFunction::constant(1), 1e-11);
    REQUIRE(u.found);
    CHECK(std::abs(u.lambda_star - 1.0) < 1e-10);
}

TEST_CASE("solver bracket brackets a sign change") {
    auto f = AttachmentFunction::power(0.3);
    double tol = 1e-9;
    auto r = solve_lambda_star(f, tol);
    REQUIRE(r.found);
    double h = 10 * tol;
    CHECK(rho_hat(f, r.lambda_star - h, 1e-13).value > 1.0);
    CHECK(rho_hat(f, r.lambda_star + h, 1e-13).value < 1.0);
    CHECK(r.rho_at_lo > 1.0);
    CHECK(r.rho_at_hi < 1.0);
    // frozen from an independent 30-digit evaluation of the same series
    CHECK(r.lambda_star == doctest::Approx(1.3628279041).epsilon(1e-9));
}

TEST_CASE("assumption checks for the three reference models") {
    {
        auto f = AttachmentFunction::constant(1);
        PhiTable t(f, 20000);
        auto rep = check_assumptions(f, t);
        CHECK(rep.c1 == TriState::True);
        CHECK(rep.c2_verdict);
        for (const auto& s : rep.c2_surface) {
            CHECK(s.ratio >= 1.0);
            CHECK(s.ratio == doctest::Approx(1 + s.delta).epsilon(1e-9));
        }
        CHECK(rep.c3_estimate == doctest::Approx(3.0).epsilon(1e-9));
        CHECK(rep.prop_under_lamb == TriState::True);
    }
    {
        auto f = AttachmentFunction::power(0.3);
        PhiTable t(f, 500000);
        auto rep = check_assumptions(f, t);
        CHECK(rep.c1 == TriState::True);
        CHECK(rep.c2_verdict);
        CHECK(rep.c3_estimate == doctest::Approx(std::pow(3.0, 4.0 / 7.0)).epsilon(0.03));
        CHECK(rep.prop_under_lamb == TriState::True);
        CHECK(rep.d_bar < 0.1);
    }
    {
        auto f = AttachmentFunction::power(0.8);
        PhiTable t(f, 20000);
        auto rep = check_assumptions(f, t);
        CHECK(rep.c1 == TriState::False);
        CHECK(rep.prop_under_lamb == TriState::True);  // sublinear, rho(0+) = inf
    }
}

TEST_CASE("asymptotic predictions") {
    auto f = AttachmentFunction::power(0.3);
    PhiTable t(f, 20000);
    auto lam = solve_lambda_star(f, 1e-10);
    auto p1 = predict_asymptotics(f, t, lam, 1e4);
    auto p2 = predict_asymptotics(f, t, lam, 1e6);
    CHECK(p1.applies);
    CHECK(p1.pred_log_index > 0);
    CHECK(p2.pred_log_index > p1.pred_log_index);
    CHECK(p2.pred_phi1_dmax > p1.pred_phi1_dmax);

    auto fper = AttachmentFunction::power(0.8);
    PhiTable tper(fper, 20000);
    CHECK_THROWS_AS(predict_asymptotics(fper, tper, solve_lambda_star(fper, 1e-8), 1e6),
                    ModelError);

    auto fu = AttachmentFunction::constant(1);
    PhiTable tu(fu, 20000);
    auto pu = predict_asymptotics(fu, tu, solve_lambda_star(fu, 1e-10), std::exp(10.0));
    CHECK(pu.pred_log_index == doctest::Approx(5.0).epsilon(1e-6));
    CHECK(!pu.applies);  // flagged: uniform attachment breaks the formula
}

TEST_CASE("uniform tree constants") {
    auto c = uniform_tree_constants();
    CHECK(std::abs(c.u_hat - (1.0 - 1.0 / (2.0 * std::log(2.0)))) < 1e-8);
    CHECK(std::abs(c.max_slope - 1.0 / std::log(2.0)) < 1e-8);
    CHECK(uniform_tree_psi(0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(uniform_tree_psi(c.u_hat + 1e-3) < c.max_slope);
    CHECK(uniform_tree_psi(c.u_hat - 1e-3) < c.max_slope);
    CHECK(uniform_tree_w(0.0) == 0.0);
    CHECK(uniform_tree_w_inv(uniform_tree_w(0.7)) == doctest::Approx(0.7).epsilon(1e-10));
}
