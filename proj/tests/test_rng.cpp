#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "hubsim/rng.hpp"

using namespace hubsim;

TEST_CASE("stream derivation is deterministic and purpose/replicate sensitive") {
    CHECK(derive_stream_seed(1, 0, "a") == derive_stream_seed(1, 0, "a"));
    CHECK(derive_stream_seed(1, 0, "a") != derive_stream_seed(1, 1, "a"));
    CHECK(derive_stream_seed(1, 0, "a") != derive_stream_seed(1, 0, "b"));
    CHECK(derive_stream_seed(1, 0, "a") != derive_stream_seed(2, 0, "a"));

    RngStream s1(derive_stream_seed(7, 3, "x"));
    RngStream s2(derive_stream_seed(7, 3, "x"));
    for (int i = 0; i < 100; ++i) CHECK(s1.next_u64() == s2.next_u64());
}

TEST_CASE("uniforms live in [0,1) and exponentials have the right mean") {
    RngStream s(123);
    double acc = 0;
    for (int i = 0; i < 200000; ++i) {
        double u = s.u01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        acc += u;
    }
    CHECK(std::abs(acc / 200000 - 0.5) < 0.005);

    RngStream e(456);
    double sum = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) sum += e.exponential(2.0);
    // mean 1/2, sd of the mean = 1/(2 sqrt(n))
    CHECK(std::abs(sum / n - 0.5) < 5.0 / (2 * std::sqrt(double(n))));
}

TEST_CASE("cross-purpose streams pass a serial-correlation smoke test") {
    RngStream a = derive_stream(99, 0, "purpose-one");
    RngStream b = derive_stream(99, 0, "purpose-two");
    const int n = 1'000'000;
    double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
    for (int i = 0; i < n; ++i) {
        double x = a.u01(), y = b.u01();
        sa += x;
        sb += y;
        sab += x * y;
        saa += x * x;
        sbb += y * y;
    }
    double ma = sa / n, mb = sb / n;
    double cov = sab / n - ma * mb;
    double rho = cov / std::sqrt((saa / n - ma * ma) * (sbb / n - mb * mb));
    CHECK(std::abs(rho) < 0.01);
}

TEST_CASE("below() is in range and roughly uniform") {
    RngStream s(9);
    std::vector<int> counts(10, 0);
    for (int i = 0; i < 100000; ++i) ++counts[std::size_t(s.below(10))];
    for (int c : counts) CHECK(std::abs(c - 10000) < 600);
}
