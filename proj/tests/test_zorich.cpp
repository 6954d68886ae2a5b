#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rauzylab/rng.hpp"
#include "rauzylab/zorich.hpp"

#include <cmath>
#include <map>

using namespace rauzylab;

namespace {
Permutation perm2() { return Permutation::parse("AB/BA"); }
Permutation perm3() { return Permutation::parse("ABC/CBA"); }
} // namespace

TEST_CASE("zorich_step on d=2") {
    SUBCASE("(0.3, 0.7): burst of two type-0 steps ending at (3/4, 1/4)") {
        auto s = zorich_step<Rational>(perm2(), {Rational(3, 10), Rational(7, 10)});
        CHECK(s.n1 == 2);
        CHECK(s.start_type == Type::type0);
        CHECK(s.end_type == Type::type1);
        CHECK(s.end_lengths == std::vector<Rational>{Rational(3, 4), Rational(1, 4)});
    }
    SUBCASE("mirror symmetry: (0.7, 0.3) has the same n1") {
        auto s = zorich_step<Rational>(perm2(), {Rational(7, 10), Rational(3, 10)});
        CHECK(s.n1 == 2);
        CHECK(s.start_type == Type::type1);
        CHECK(s.end_lengths == std::vector<Rational>{Rational(1, 4), Rational(3, 4)});
    }
    SUBCASE("tie inside the burst") {
        // (1/4, 3/4) -> (1/3, 2/3) -> (1/2, 1/2): tie on the third comparison
        CHECK_THROWS_AS(zorich_orbit<Rational>(perm2(), {Rational(1, 4), Rational(3, 4)}, 3),
                        TieError);
    }
    SUBCASE("burst cap") {
        CHECK_THROWS_AS(zorich_step<Rational>(perm2(), {Rational(1, 1000001), Rational(1000000, 1000001)}, 100),
                        BurstTooLong);
    }
}

TEST_CASE("replaying n1 single steps reproduces the accelerated step exactly") {
    std::vector<Rational> l{Rational(5, 17), Rational(3, 17), Rational(9, 17)};
    auto s = zorich_step<Rational>(perm3(), l);
    auto rec = iterate_t0<Rational>(perm3(), l, static_cast<int>(s.n1));
    CHECK(rec.states.back().first == s.end_perm);
    CHECK(rec.states.back().second == s.end_lengths);
    CHECK(rec.theta.matrix == s.theta.matrix);
    for (long k = 0; k + 1 < s.n1; ++k) CHECK(rec.types[k] == s.start_type);
}

TEST_CASE("types strictly alternate along a Zorich orbit") {
    std::vector<double> l{1.0, std::sqrt(2.0), std::sqrt(3.0)};
    double tot = l[0] + l[1] + l[2];
    for (auto& x : l) x /= tot;
    auto orbit = zorich_orbit(perm3(), l, 30);
    REQUIRE(orbit.size() == 30);
    for (std::size_t k = 0; k < orbit.size(); ++k) {
        CHECK(orbit[k].end_type == opposite(orbit[k].start_type));
        if (k > 0) CHECK(orbit[k].start_type == orbit[k - 1].end_type);
    }
    CHECK(zorich_orbit(perm3(), l, 0).empty());
}

TEST_CASE("golden point: every n1 equals 1") {
    // The golden point repels the renormalisation, so doubles drift off it
    // after ~35 steps.  F_n/F_{n+1} has the same all-ones expansion for the
    // first n-2 steps and is exact, so it certifies 100 steps.
    BigInt a = 1, b = 1;
    for (int i = 2; i <= 205; ++i) {
        BigInt c = a + b;
        a = b;
        b = c;
    } // a = F_204, b = F_205
    std::vector<Rational> l{Rational(b - a, b), Rational(a, b)};
    auto orbit = zorich_orbit<Rational>(perm2(), l, 100);
    for (const auto& s : orbit) CHECK(s.n1 == 1);

    // and the true fixed point in doubles holds for a shorter window
    double g = (std::sqrt(5.0) - 1.0) / 2.0;
    std::vector<double> ld{1.0 - g, g};
    auto od = zorich_orbit(perm2(), ld, 25);
    for (const auto& s : od) CHECK(s.n1 == 1);
}

TEST_CASE("near-degenerate doubles abort instead of looping") {
    std::vector<double> l{1e-14, 1.0 - 1e-14};
    CHECK_THROWS_AS(zorich_step(perm2(), l), NearDegenerate);
}

TEST_CASE("cylinder (pi, eps, n1) determines the target cell") {
    // all points sharing start type and n1 share the end permutation, the end
    // type, and the accumulated matrix
    Rng rng(23);
    std::map<long, std::pair<Permutation, IntMatrix>> rep;
    int grouped = 0;
    for (int s = 0; s < 300; ++s) {
        std::vector<double> l{rng.uniform(), rng.uniform(), rng.uniform()};
        double tot = l[0] + l[1] + l[2];
        for (auto& x : l) x /= tot;
        ZorichStep<double> z;
        try {
            z = zorich_step(perm3(), l, 1000);
        } catch (const Error&) {
            continue;
        }
        if (z.start_type != Type::type0) continue; // fix the cylinder's eps
        auto it = rep.find(z.n1);
        if (it == rep.end()) {
            rep.emplace(z.n1, std::make_pair(z.end_perm, z.theta.matrix));
        } else {
            CHECK(it->second.first == z.end_perm);
            CHECK(it->second.second == z.theta.matrix);
            ++grouped;
        }
        CHECK(z.end_type == Type::type1);
    }
    CHECK(grouped > 50); // the check above actually fired many times
}

TEST_CASE("estimate_mu1 on d=2") {
    auto rc = rauzy_class(perm2());
    double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0), s5 = std::sqrt(5.0);
    std::vector<std::pair<Permutation, std::vector<double>>> seed_a{
        {perm2(), {1.0 / (1.0 + s2), s2 / (1.0 + s2)}}};
    std::vector<std::pair<Permutation, std::vector<double>>> seed_b{
        {perm2(), {s3 / (s3 + s5), s5 / (s3 + s5)}}};

    const long n = 1000000;
    auto ea = estimate_mu1(rc, seed_a, n, 32);
    auto eb = estimate_mu1(rc, seed_b, n, 32);
    // long orbits occasionally die on a burst beyond the cap (the digit
    // distribution has an infinite mean); partial data is kept and is more
    // than enough here
    CHECK(ea.samples[0] + ea.samples[1] > 20000);
    CHECK(eb.samples[0] + eb.samples[1] > 20000);

    for (int eps = 0; eps < 2; ++eps) {
        double total = 0;
        for (long b = 0; b < ea.bins_per_class(); ++b) total += ea.mass[eps][b];
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(ea.l1_distance(eb, eps) < 0.05);
    }

    // the class-eps density lives on its own half of the simplex and is
    // positive on every cell there
    for (long c = 0; c < 16; ++c) {
        CHECK(ea.mass[0][c] > 0.0);
        CHECK(ea.mass[1][16 + c] > 0.0);
        CHECK(ea.mass[1][c] == 0.0); // type-1 states have lambda_A > 1/2
    }
}

TEST_CASE("estimate_mu1 flags aborted orbits but keeps partial data") {
    auto rc = rauzy_class(perm2());
    std::vector<std::pair<Permutation, std::vector<double>>> seeds{
        {perm2(), {0.25, 0.75}}}; // reaches the (1/2, 1/2) tie in two steps
    auto est = estimate_mu1(rc, seeds, 1000, 8);
    CHECK(est.aborted);
    CHECK(est.samples[0] + est.samples[1] > 0);
}
