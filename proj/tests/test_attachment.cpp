#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hubsim/attachment.hpp"
#include "hubsim/errors.hpp"

using namespace hubsim;

TEST_CASE("closed-form kinds evaluate as declared") {
    CHECK(AttachmentFunction::constant(1)(7) == 1.0);
    CHECK(AttachmentFunction::power(0.5)(3) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(AttachmentFunction::affine(1)(4) == 5.0);
    CHECK(AttachmentFunction::affine(0.5)(0) == 0.5);
}

TEST_CASE("step extension f(x) = f(floor x)") {
    auto f = AttachmentFunction::power(0.3);
    CHECK(f.at_real(3.999) == f(3));
    CHECK(f.at_real(4.0) == f(4));
    CHECK_THROWS_AS(f.at_real(-0.1), ModelError);
}

TEST_CASE("table kind honors the tail rule") {
    auto held = AttachmentFunction::table({2, 3, 5}, TableTail::HoldLast);
    CHECK(held(2) == 5.0);
    CHECK(held(100) == 5.0);
    CHECK(held.growth() == Growth::Bounded);
    auto strict = AttachmentFunction::table({2, 3, 5}, TableTail::Error);
    CHECK(strict(2) == 5.0);
    CHECK_THROWS_AS(strict(3), ModelError);
}

TEST_CASE("declared facts are validated on a prefix") {
    auto f = AttachmentFunction::table({1, 2, 1.5}, TableTail::HoldLast);
    f.declare_monotone(true);
    CHECK_THROWS_AS(f.validate_prefix(3), ModelError);

    auto g = AttachmentFunction::affine(1);
    g.declare_linear_bound(0.5);  // k+1 > 0.5 (k+1)
    CHECK_THROWS_AS(g.validate_prefix(4), ModelError);
    AttachmentFunction::affine(1).validate_prefix(1000);
}

TEST_CASE("affine(0) is degenerate at zero and flagged by validation") {
    auto f = AttachmentFunction::affine(0);
    CHECK(f(0) == 0.0);
    CHECK(f(1) == 1.0);
    CHECK_THROWS_AS(f.validate_prefix(1), ModelError);
    CHECK(f.f_star() == 0.0);
}

TEST_CASE("f_star and upper bounds") {
    CHECK(AttachmentFunction::power(0.3).f_star() == 1.0);
    CHECK(AttachmentFunction::constant(2.5).f_star() == 2.5);
    CHECK(AttachmentFunction::table({4, 2, 9}, TableTail::HoldLast).f_star() == 2.0);
    CHECK(*AttachmentFunction::constant(2.5).upper_bound() == 2.5);
    CHECK(!AttachmentFunction::affine(1).upper_bound().has_value());
    auto comp = AttachmentFunction::product(
        {AttachmentFunction::constant(2), AttachmentFunction::table({1, 3}, TableTail::HoldLast)});
    CHECK(*comp.upper_bound() == 6.0);
}

TEST_CASE("composites evaluate pointwise") {
    auto f = AttachmentFunction::sum({AttachmentFunction::affine(1), AttachmentFunction::constant(2)});
    CHECK(f(3) == 6.0);  // (3+1) + 2
    auto g = AttachmentFunction::product({AttachmentFunction::power(0.5), AttachmentFunction::constant(3)});
    CHECK(g(3) == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(g.monotone());
    CHECK(g.describe() == "product(power(0.5),constant(3))");
}

TEST_CASE("value cache matches direct evaluation") {
    auto f = AttachmentFunction::power(0.3);
    FValueCache fc(f);
    for (std::int64_t k : {0, 5, 3, 100, 7}) CHECK(fc(k) == f(k));
}
