#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rauzylab/iet.hpp"
#include "rauzylab/rng.hpp"

#include <algorithm>
#include <cmath>

using namespace rauzylab;

namespace {

Permutation perm2_swap() { return Permutation::parse("AB/BA"); }
Permutation perm2_id() { return Permutation::parse("AB/AB"); }
Permutation perm3_rev() { return Permutation::parse("ABC/CBA"); }

// Independent oracle for w_a: evaluate the defining sums directly in exact
// arithmetic, with no shared code path (no prefix-sum trick).
std::vector<Rational> w_oracle(const Permutation& p, const std::vector<Rational>& l) {
    int d = p.size();
    std::vector<Rational> w(d, Rational(0));
    for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
            if (p.position(1, b) < p.position(1, a)) w[a] += l[b];
            if (p.position(0, b) < p.position(0, a)) w[a] -= l[b];
        }
    }
    return w;
}

} // namespace

TEST_CASE("build_iet translation vectors") {
    SUBCASE("d=2 swap") {
        auto iet = build_iet<double>(perm2_swap(), {0.3, 0.7});
        CHECK(iet.translations()[0] == doctest::Approx(0.7));
        CHECK(iet.translations()[1] == doctest::Approx(-0.3));
    }
    SUBCASE("identity permutation gives w = 0") {
        auto iet = build_iet<double>(perm2_id(), {0.4, 0.6});
        CHECK(iet.translations()[0] == 0.0);
        CHECK(iet.translations()[1] == 0.0);
    }
    SUBCASE("d=3 exact rationals, checked against the defining sums") {
        std::vector<Rational> l{Rational(1, 2), Rational(1, 3), Rational(1, 6)};
        auto iet = build_iet<Rational>(perm3_rev(), l);
        auto expect = w_oracle(perm3_rev(), l);
        CHECK(iet.translations() == expect);
        CHECK(iet.translations()[0] == Rational(1, 2));
        CHECK(iet.translations()[1] == Rational(-1, 3));
        CHECK(iet.translations()[2] == Rational(-5, 6));
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(build_iet<double>(perm2_swap(), {0.3, -0.1}), InvalidLength);
        CHECK_THROWS_AS(build_iet<double>(perm2_swap(), {0.3}), InvalidLength);
        CHECK_THROWS_AS(Permutation({0, 0}, {0, 1}), InvalidPermutation);
    }
}

TEST_CASE("evaluate") {
    auto iet = build_iet<double>(perm2_swap(), {0.3, 0.7});
    CHECK(iet.evaluate(0.1) == doctest::Approx(0.8));
    CHECK(iet.evaluate(0.5) == doctest::Approx(0.2));
    CHECK_THROWS_AS(iet.evaluate(1.0), DomainError);
    CHECK_THROWS_AS(iet.evaluate(-0.1), DomainError);

    // d=3: I_B = [1/2, 5/6) so f(0.6) = 0.6 - 1/3; cross-check locate by a
    // brute-force interval scan built from scratch.
    std::vector<Rational> l{Rational(1, 2), Rational(1, 3), Rational(1, 6)};
    auto iet3 = build_iet<Rational>(perm3_rev(), l);
    Rational x(3, 5);
    CHECK(iet3.evaluate(x) == Rational(3, 5) - Rational(1, 3));
    // brute-force: walk subintervals in pi0 order
    Rational acc(0);
    int hit = -1;
    for (int j = 0; j < 3; ++j) {
        int a = iet3.perm().symbol_at(0, j);
        if (x >= acc && x < acc + l[a]) hit = a;
        acc += l[a];
    }
    CHECK(hit == 1); // symbol B
    CHECK(iet3.locate(x) == hit);
}

TEST_CASE("monodromy and irreducibility") {
    CHECK(perm2_swap().monodromy() == std::vector<int>{2, 1});
    CHECK(perm2_id().monodromy() == std::vector<int>{1, 2});
    CHECK(perm3_rev().monodromy() == std::vector<int>{3, 2, 1});
    CHECK(perm2_swap().is_irreducible());
    CHECK_FALSE(Permutation::parse("ABC/ACB").is_irreducible());
    CHECK(perm3_rev().is_irreducible());
}

TEST_CASE("classify_type") {
    auto t0 = build_iet<double>(perm2_swap(), {0.3, 0.7});
    CHECK(t0.classify_type() == Type::type0);
    auto t1 = build_iet<double>(perm2_swap(), {0.7, 0.3});
    CHECK(t1.classify_type() == Type::type1);
    auto tie = build_iet<double>(perm2_swap(), {0.5, 0.5});
    CHECK_THROWS_AS(tie.classify_type(), TieError);
}

TEST_CASE("classify_type antisymmetric under swapping the last-interval lengths") {
    Rng rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        double a = rng.uniform(0.05, 0.95);
        std::vector<double> l{a, 1.0 - a};
        if (std::fabs(l[0] - l[1]) < 1e-6) continue;
        auto fwd = build_iet<double>(perm2_swap(), l);
        auto swp = build_iet<double>(perm2_swap(), {l[1], l[0]});
        CHECK(fwd.classify_type() == opposite(swp.classify_type()));
    }
}

TEST_CASE("check_keane") {
    SUBCASE("irrational rotation passes to depth 1000") {
        double s = std::sqrt(2.0);
        auto iet = build_iet<double>(perm2_swap(), {1.0 / (1.0 + s), s / (1.0 + s)});
        auto v = check_keane(iet, 1000);
        CHECK(v.ok);
    }
    SUBCASE("period-2 rotation violates at n=1") {
        auto iet = build_iet<Rational>(perm2_swap(), {Rational(1, 2), Rational(1, 2)});
        auto v = check_keane(iet, 2);
        CHECK_FALSE(v.ok);
        CHECK(v.violation_at == 1);
    }
    SUBCASE("rational rotation violates early") {
        auto iet = build_iet<Rational>(perm2_swap(), {Rational(1, 3), Rational(2, 3)});
        auto v = check_keane(iet, 10);
        CHECK_FALSE(v.ok);
        CHECK(v.violation_at <= 3);
    }
}

TEST_CASE("partition and bijectivity properties on random samples") {
    Rng rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> l{rng.uniform(0.05, 0.9), 0, 0};
        l[1] = rng.uniform(0.05, 1.0 - l[0] - 0.05);
        l[2] = 1.0 - l[0] - l[1];
        auto iet = build_iet<double>(perm3_rev(), l);

        // image intervals [left_a + w_a, left_a + w_a + l_a) partition [0,1)
        std::vector<std::pair<double, double>> images;
        double total = 0;
        for (int a = 0; a < 3; ++a) {
            double lo = to_double(iet.left_endpoint(a)) + iet.translations()[a];
            images.push_back({lo, lo + l[a]});
            total += l[a];
        }
        std::sort(images.begin(), images.end());
        CHECK(images[0].first == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(images[0].second == doctest::Approx(images[1].first).epsilon(1e-12));
        CHECK(images[1].second == doctest::Approx(images[2].first).epsilon(1e-12));
        CHECK(images[2].second == doctest::Approx(total).epsilon(1e-12));

        // bijectivity on samples: invert by searching the image intervals
        for (int s = 0; s < 25; ++s) {
            double x = rng.uniform() * total;
            double y = iet.evaluate(x);
            double back = -1;
            for (int a = 0; a < 3; ++a) {
                double lo = to_double(iet.left_endpoint(a)) + iet.translations()[a];
                if (y >= lo && y < lo + l[a]) back = y - iet.translations()[a];
            }
            CHECK(back == doctest::Approx(x).epsilon(1e-12));
        }
    }
}

TEST_CASE("rebuilding from (pi,lambda) reproduces w exactly") {
    std::vector<Rational> l{Rational(2, 7), Rational(3, 7), Rational(2, 7)};
    auto a = build_iet<Rational>(perm3_rev(), l);
    auto b = build_iet<Rational>(a.perm(), a.lengths());
    CHECK(a.translations() == b.translations());
}
