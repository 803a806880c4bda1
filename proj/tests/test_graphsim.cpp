#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "hubsim/errors.hpp"
#include "hubsim/graphsim.hpp"
#include "hubsim/stats.hpp"

using namespace hubsim;

TEST_CASE("attachment sequences: supports, means, formulas") {
    RngStream rng(1);
    auto geo = AttachmentSequence::iid_geometric(0.5);
    double acc = 0;
    for (int i = 0; i < 100000; ++i) {
        auto m = geo.draw(1, rng);
        REQUIRE(m >= 1);
        acc += double(m);
    }
    CHECK(acc / 100000 == doctest::Approx(2.0).epsilon(0.02));

    auto zipf = AttachmentSequence::iid_zipf(2.2, 1000);
    double zacc = 0;
    for (int i = 0; i < 100000; ++i) {
        auto m = zipf.draw(1, rng);
        REQUIRE(m >= 1);
        REQUIRE(m <= 1000);
        zacc += double(m);
    }
    CHECK(zacc / 100000 == doctest::Approx(zipf.mean()).epsilon(0.03));

    auto lp = AttachmentSequence::log_power(2.0);
    for (std::int64_t n : {1, 2, 10, 1000, 100000}) {
        auto expect = std::int64_t(std::floor(1.0 + std::pow(std::log(double(n)), 2.0)));
        CHECK(lp.deterministic_value(n) == expect);
    }
    CHECK(AttachmentSequence::constant(3).draw(5, rng) == 3);
}

TEST_CASE("weight index: exactness, sampling, drift reset") {
    WeightIndex w(16);
    std::vector<double> ref;
    RngStream rng(2);
    for (int i = 0; i < 40; ++i) {  // forces a capacity regrowth
        double v = 0.5 + rng.u01();
        w.append(v);
        ref.push_back(v);
    }
    for (int rounds = 0; rounds < 200; ++rounds) {
        auto i = std::int64_t(rng.below(40));
        double v = 0.5 + rng.u01();
        w.update(i, v);
        ref[std::size_t(i)] = v;
    }
    double total = 0;
    for (double v : ref) total += v;
    CHECK(w.total() == doctest::Approx(total).epsilon(1e-12));
    CHECK(w.drift() < 1e-12);
    for (std::int64_t i = 0; i < 40; ++i) CHECK(w.weight(i) == ref[std::size_t(i)]);
    // sampling returns the owner of the mass point
    double run = 0;
    for (std::int64_t i = 0; i < 40; ++i) {
        CHECK(w.prefix(i) == doctest::Approx(run).epsilon(1e-12));
        CHECK(w.sample(run + 1e-9) == i);
        run += ref[std::size_t(i)];
        CHECK(w.sample(run - 1e-9) == i);
    }
    w.rebuild();
    CHECK(w.drift() == 0.0);
}

TEST_CASE("degree sum equals twice the attached edges") {
    auto f = AttachmentFunction::power(0.3);
    auto seq = AttachmentSequence::iid_zipf(2.0, 50);
    RngStream rng(3);
    GrowthState st(f, 4096);
    for (std::int64_t n = 1; n <= 500; ++n) {
        st.add_vertex(seq.draw(n, rng), rng);
        CHECK(st.sum_degrees() == 2 * st.edges());
    }
    st.check_weights(1e-9);
}

TEST_CASE("first vertex always joins the root") {
    auto f = AttachmentFunction::power(0.3);
    RngStream rng(4);
    GrowthState st(f, 8);
    st.add_vertex(1, rng);
    CHECK(st.degree(0) == 1);
    CHECK(st.degree(1) == 1);
    CHECK(st.d_max() == 1);
    CHECK(st.leader() == 0);  // oldest of the tied pair
}

TEST_CASE("exact two-step attachment laws") {
    // uniform attachment at n=3: v2 hits the root with probability 1/2
    const int reps = 100000;
    int hit = 0;
    for (int r = 0; r < reps; ++r) {
        RngStream rng = derive_stream(20, std::uint64_t(r), "uat3");
        GrowthState st(AttachmentFunction::constant(1), 8);
        st.add_vertex(1, rng);
        st.add_vertex(1, rng);
        hit += st.degree(0) == 2;
    }
    double se = std::sqrt(0.25 / reps);
    CHECK(std::abs(double(hit) / reps - 0.5) < 4 * se);

    // linear preferential attachment: root degree 2 after two steps w.p. 1/2
    hit = 0;
    for (int r = 0; r < reps; ++r) {
        RngStream rng = derive_stream(21, std::uint64_t(r), "pa2");
        GrowthState st(AttachmentFunction::affine(1), 8);
        st.add_vertex(1, rng);
        st.add_vertex(1, rng);
        hit += st.degree(0) == 2;
    }
    CHECK(std::abs(double(hit) / reps - 0.5) < 4 * se);
}

TEST_CASE("leader matches a brute-force oldest-argmax scan") {
    auto f = AttachmentFunction::power(0.3);
    RngStream rng(5);
    GrowthState st(f, 4096);
    for (std::int64_t n = 1; n <= 3000; ++n) {
        st.add_vertex(1, rng);
        std::int64_t best = -1, arg = -1;
        for (std::int64_t i = 0; i <= n; ++i) {
            if (st.degree(i) > best) {
                best = st.degree(i);
                arg = i;
            }
        }
        REQUIRE(st.d_max() == best);
        REQUIRE(st.leader() == arg);
    }
}

TEST_CASE("grow: checkpoints, reproducibility, leader statistics") {
    auto f = AttachmentFunction::affine(1);
    auto seq = AttachmentSequence::constant(1);
    std::vector<std::int64_t> cks{100, 1000, 5000};
    RngStream a(derive_stream_seed(31, 0, "grow"));
    RngStream b(derive_stream_seed(31, 0, "grow"));
    auto r1 = grow(f, seq, 5000, cks, a);
    auto r2 = grow(f, seq, 5000, cks, b);
    REQUIRE(r1.checkpoints.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(r1.checkpoints[i].n == cks[i]);
        CHECK(r1.checkpoints[i].k == cks[i]);
        CHECK(r1.checkpoints[i].d_max == r2.checkpoints[i].d_max);
        CHECK(r1.checkpoints[i].leader_index == r2.checkpoints[i].leader_index);
        CHECK(r1.checkpoints[i].leader_changes == r2.checkpoints[i].leader_changes);
    }
    CHECK(r1.checkpoints[2].d_max >= r1.checkpoints[0].d_max);

    auto ls = leader_statistics(r1, 100, 5000);
    CHECK(ls.change_count ==
          r1.checkpoints[2].leader_changes - r1.checkpoints[0].leader_changes);
    CHECK(ls.final_leader == r1.checkpoints[2].leader_index);
    CHECK_THROWS_AS(leader_statistics(r1, 100, 4999), ConfigError);
}

TEST_CASE("sublinear attachment sees leader turnover by n = 1e5") {
    auto f = AttachmentFunction::power(0.3);
    auto seq = AttachmentSequence::constant(1);
    int changed = 0;
    const int reps = 60;
    for (int r = 0; r < reps; ++r) {
        RngStream rng = derive_stream(32, std::uint64_t(r), "turnover");
        auto rec = grow(f, seq, 100000, std::vector<std::int64_t>{100000}, rng);
        changed += rec.checkpoints[0].leader_changes > 0;
    }
    CHECK(changed * 2 >= reps);  // at least half the replicates
}

TEST_CASE("lower bound chain: closed-form mean and per-step domination") {
    auto f1 = AttachmentFunction::constant(1);
    RngStream rng(40);
    CHECK(bound_process_lower(f1, 0, rng) == std::vector<std::int64_t>{0});
    // E d(k) = H_k / 3 for f == 1, C_f = 1
    const int reps = 4000;
    const std::int64_t kmax = 2000;
    double acc = 0;
    for (int r = 0; r < reps; ++r) {
        RngStream s = derive_stream(41, std::uint64_t(r), "lb");
        acc += double(bound_process_lower(f1, kmax, s).back());
    }
    double hk = 0;
    for (std::int64_t j = 1; j <= kmax; ++j) hk += 1.0 / double(j);
    double expect = hk / 3.0;
    CHECK(std::abs(acc / reps - expect) < 4 * std::sqrt(expect / reps));

    for (int r = 0; r < 20; ++r) {
        RngStream s = derive_stream(42, std::uint64_t(r), "lbcouple");
        auto run = grow_coupled_lower(AttachmentFunction::affine(1),
                                      AttachmentSequence::constant(1), 2000, s);
        for (std::size_t k = 0; k < run.lower.size(); ++k)
            REQUIRE(run.lower[k] <= run.root[k]);
    }
}

TEST_CASE("upper bound chain: premise checks, clamping, domination") {
    auto f = AttachmentFunction::affine(1);
    auto seq = AttachmentSequence::constant(1);
    RngStream rng(50);
    auto up = bound_process_upper(f, 0.5, 3, seq, 2000, rng);
    CHECK(up.k_start == 2);  // s_{l-1} with m == 1
    CHECK(up.clamped);       // early k: f(d)/(eps (k+1) f(0)) > 1

    // m growing like a zipf draw breaks s^{-1}(k) >= eps(k+1) for eps near 1
    auto heavy = AttachmentSequence::iid_zipf(1.5, 1000);
    CHECK_THROWS_AS(bound_process_upper(f, 0.95, 3, heavy, 2000, rng), ConfigError);

    for (int r = 0; r < 20; ++r) {
        RngStream s = derive_stream(51, std::uint64_t(r), "ubcouple");
        auto run = grow_coupled_upper(f, seq, 0.5, 3, 2000, s);
        REQUIRE(!run.upper.empty());
        for (std::size_t k = 0; k < run.upper.size(); ++k)
            REQUIRE(run.tracked[k] <= run.upper[k]);
    }
}

TEST_CASE("race: exact step laws and bookkeeping") {
    RngStream rng(60);
    auto f1 = AttachmentFunction::constant(1);
    int first = 0;
    const int reps = 100000;
    for (int r = 0; r < reps; ++r) {
        RngStream s = derive_stream(61, std::uint64_t(r), "race1");
        auto res = race(f1, 1, 1, 1, s);
        first += res.path[1].first == 2;
    }
    CHECK(std::abs(double(first) / reps - 0.5) < 4 * std::sqrt(0.25 / reps));

    auto fa = AttachmentFunction::affine(1);
    first = 0;
    for (int r = 0; r < reps; ++r) {
        RngStream s = derive_stream(62, std::uint64_t(r), "race2");
        auto res = race(fa, 2, 1, 1, s);
        first += res.path[1].first == 3;
    }
    CHECK(std::abs(double(first) / reps - 0.6) < 4 * std::sqrt(0.24 / reps));

    auto res = race(fa, 1, 1, 50, rng);
    std::int64_t ties = 0, changes = 0, last = 0;
    for (std::size_t j = 1; j < res.path.size(); ++j) {
        auto [x1, x2] = res.path[j];
        std::int64_t s = x1 == x2 ? 0 : (x1 > x2 ? 1 : -1);
        if (s == 0) ++ties;
        if (s != 0) {
            if (last != 0 && s != last) ++changes;
            last = s;
        }
    }
    CHECK(res.tie_visits == ties);
    CHECK(res.lead_changes == changes);
    CHECK_THROWS_AS(race(fa, 0, 1, 5, rng), ConfigError);
}

TEST_CASE("race lead changes order by attachment exponent") {
    // sublinear weight keeps the race tight; near-linear locks in a leader
    auto lo = AttachmentFunction::power(0.3);
    auto hi = AttachmentFunction::power(0.8);
    std::vector<double> c_lo, c_hi;
    for (int r = 0; r < 500; ++r) {
        RngStream s1 = derive_stream(63, std::uint64_t(r), "racelo");
        RngStream s2 = derive_stream(63, std::uint64_t(r), "racehi");
        c_lo.push_back(double(race(lo, 1, 1, 10000, s1).lead_changes));
        c_hi.push_back(double(race(hi, 1, 1, 10000, s2).lead_changes));
    }
    CHECK(median(c_lo) > median(c_hi));
}

TEST_CASE("race law equals the two-clock jump chain law") {
    auto f = AttachmentFunction::affine(1);
    const std::int64_t reps = 30000;
    std::map<std::int64_t, std::int64_t> ca, cb;
    for (std::int64_t r = 0; r < reps; ++r) {
        RngStream s1 = derive_stream(64, std::uint64_t(r), "rl/chain");
        RngStream s2 = derive_stream(64, std::uint64_t(r), "rl/clock");
        auto key = [](const RaceResult& res) {
            std::int64_t code = 0;
            for (std::size_t j = 1; j < res.path.size(); ++j)
                code = 2 * code + (res.path[j].first > res.path[j - 1].first ? 1 : 0);
            return code;
        };
        ++ca[key(race(f, 1, 1, 10, s1))];
        ++cb[key(race_via_clocks(f, 1, 1, 10, s2))];
    }
    RngStream boot(7);
    auto tv = tv_debiased(ca, cb, reps, reps, 16, boot);
    CHECK(tv.debiased < 0.02);
}
